import json

import pytest

from kdcscatter.cli import ConfigError, RunConfig, load_config, main


def run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def test_run_writes_artifacts(tmp_path, capsys):
    assert run(tmp_path, "run", "--scheme", "ks2", "--R", "2", "--nkfe", "6", "--ppw", "10") == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    for key in ("scheme", "grid", "L", "ffp_l2_rel_error", "residual", "seconds"):
        assert key in summary
    assert summary["grid"] == "10x63"
    assert (tmp_path / "ffp.csv").exists() and (tmp_path / "field.csv").exists()


def test_sweep_is_byte_stable(tmp_path):
    args = ["sweep", "--scheme", "kdc4", "--R", "2", "--nkfe", "6", "--ppw", "10,14", "--no-timing"]
    assert run(tmp_path / "a", *args) == 0
    assert run(tmp_path / "b", *args, "--workers", "2") == 0
    a = (tmp_path / "a" / "convergence.csv").read_bytes()
    assert a == (tmp_path / "b" / "convergence.csv").read_bytes()
    assert len(a.splitlines()) == 3


def test_config_file_and_override(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nk = 2pi\nR = 2\nnkfe = 5\nscheme = kdc6\nppw = 10, 12\n")
    vals = load_config(p)
    assert vals["ppw"] == [10.0, 12.0] and vals["nkfe"] == 5
    assert run(tmp_path, "run", "--config", str(p), "--ppw", "11") == 0
    assert json.loads((tmp_path / "summary.json").read_text())["ppw"] == 11.0


@pytest.mark.parametrize(
    "args,needle",
    [
        (["--R", "0.5"], "r0 < R"),
        (["--ppw", "5"], "ppw"),
        (["--ppw", "30,20"], "increasing"),
        (["--nterms-exact", "3"], "nterms_exact"),
        (["--refine-steps", "7"], "refine_steps"),
    ],
)
def test_invalid_config_exits_nonzero(tmp_path, capsys, args, needle):
    assert run(tmp_path, "run", *args) == 1
    assert needle in capsys.readouterr().err


def test_unknown_config_key(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("wavelength = 1\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_dump_stencil(capsys):
    assert main(["dump-stencil", "--named", "ks4-outer-d2"]) == 0
    out = capsys.readouterr().out
    assert "-4: 1/12" in out
    assert main(["dump-stencil", "--deriv", "4", "--accuracy", "2"]) == 0
    assert "[-2: 1, -1: -4, +0: 6, +1: -4, +2: 1]" in capsys.readouterr().out


def test_dump_matrix(tmp_path):
    assert run(tmp_path, "dump-matrix", "--R", "2", "--ppw", "10", "--nkfe", "3") == 0
    header = (tmp_path / "matrix.coo").read_text().splitlines()[0]
    assert header.startswith("# 1008 1008 ")


def test_default_config_is_valid():
    RunConfig().validate()
