"""Command-line harness: single runs, convergence sweeps, timing and dumps.

Configuration comes from an optional flat ``key = value`` file; command-line
flags override file values. Every key mirrors a :class:`RunConfig` field.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import fdstencil as fd
from .assembly import assemble_second_order, write_coo
from .grid import build_grid
from .ks4 import PRINTED_OUTER_D1, PRINTED_OUTER_D2, KS4_PLAN, assemble_ks4
from .oracle import BC_KINDS, ExactConfig, exact_ffp
from .postprocess import (
    ConvergenceRecord,
    l2_rel_error,
    numerical_ffp,
    write_convergence_csv,
    write_ffp_csv,
    write_field_csv,
)
from .solver import RESIDUAL_MAX, ResidualWarning, dc_ladder, solve_ks4

log = logging.getLogger("kdcscatter")

SCHEMES = {"ks2": 2, "kdc4": 4, "kdc6": 6, "ks4": 4}

# (ppw, L) pairs reaching a target FFP error at k = 2 pi, r0 = 1, R = 3
TIMING_PAIRS = {
    5e-4: {"ks4": (17, 8), "kdc4": (20, 8), "kdc6": (13, 2)},
    1e-4: {"ks4": (26, 9), "kdc4": (31, 8), "kdc6": (17, 5)},
    5e-5: {"ks4": (35, 9), "kdc4": (40, 8), "kdc6": (20, 6)},
    1e-5: {"ks4": (51, 11), "kdc4": (60, 8), "kdc6": (26, 7)},
    5e-6: {"ks4": (60, 11), "kdc4": (70, 8), "kdc6": (29, 8)},
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    k: float = 2 * math.pi
    r0: float = 1.0
    R: float = 3.0
    bc: str = "dirichlet"
    nkfe: int = 9
    ppw: list[float] = field(default_factory=lambda: [20.0])
    scheme: str = "kdc6"
    nterms_exact: int = 60
    refine_steps: int = 1
    out: str = "out"

    def validate(self) -> None:
        if self.k <= 0:
            raise ConfigError(f"k must be positive, got {self.k}")
        if not 0 < self.r0 < self.R:
            raise ConfigError(f"need 0 < r0 < R, got r0={self.r0}, R={self.R}")
        if self.bc not in BC_KINDS:
            raise ConfigError(f"bc must be one of {BC_KINDS}, got {self.bc!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {sorted(SCHEMES)}, got {self.scheme!r}")
        if self.nkfe < 1:
            raise ConfigError(f"nkfe must be >= 1, got {self.nkfe}")
        if not self.ppw:
            raise ConfigError("at least one ppw value is required")
        if any(p < 10 for p in self.ppw):
            raise ConfigError(f"ppw values must be >= 10, got {self.ppw}")
        if list(self.ppw) != sorted(set(self.ppw)):
            raise ConfigError(f"ppw values must be strictly increasing, got {self.ppw}")
        if not 0 <= self.refine_steps <= 3:
            raise ConfigError(f"refine_steps must be in 0..3, got {self.refine_steps}")
        need = math.ceil(self.k * self.r0) + 20
        if self.nterms_exact < need:
            raise ConfigError(f"nterms_exact must be >= ceil(k*r0)+20 = {need}, got {self.nterms_exact}")
        for p in self.ppw:
            try:
                build_grid(self.r0, self.R, self.k, p)
            except ValueError as exc:
                raise ConfigError(f"ppw={p:g}: {exc}") from exc


def _parse_value(name: str, raw: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    if name not in types:
        raise ConfigError(f"unknown config key {name!r}")
    raw = raw.strip()
    try:
        if name == "ppw":
            return [float(v) for v in raw.replace(",", " ").split()]
        if name in ("nkfe", "nterms_exact", "refine_steps"):
            return int(raw)
        if name in ("k", "r0", "R"):
            return _parse_float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc
    return raw


def _parse_float(raw: str) -> float:
    # allow "2pi" and "2*pi" for the wavenumber
    s = raw.replace("*", "").lower()
    if s.endswith("pi"):
        coef = s[:-2]
        return (float(coef) if coef else 1.0) * math.pi
    return float(raw)


def load_config(path) -> dict:
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        out[key] = _parse_value(key, val)
    return out


def _solve(cfg: RunConfig, ppw: float, L: int | None = None):
    L = cfg.nkfe if L is None else L
    grid = build_grid(cfg.r0, cfg.R, cfg.k, ppw)
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResidualWarning)
        if cfg.scheme == "ks4":
            sset = solve_ks4(grid, L, cfg.bc, cfg.k, cfg.refine_steps)
        else:
            sset = dc_ladder(grid, L, cfg.bc, cfg.k, SCHEMES[cfg.scheme], cfg.refine_steps)
    seconds = time.perf_counter() - t0
    return grid, sset, seconds


def run_case(cfg: RunConfig, ppw: float) -> dict:
    """One solve; returns the summary fields plus arrays for the writers."""
    grid, sset, seconds = _solve(cfg, ppw)
    sol = sset.top
    P = numerical_ffp(sol.F[0], sol.G[0], cfg.k)
    Pe = exact_ffp(ExactConfig(cfg.k, cfg.r0, cfg.bc, cfg.nterms_exact), grid.theta)
    residual = max(s.residual for s in sset.orders.values())
    return {
        "scheme": cfg.scheme,
        "bc": cfg.bc,
        "ppw": ppw,
        "grid": grid.shape_label,
        "h": grid.h,
        "L": cfg.nkfe,
        "ffp_l2_rel_error": l2_rel_error(P, Pe),
        "residual": residual,
        "residual_ok": bool(residual <= RESIDUAL_MAX),
        "seconds": seconds,
        "_grid": grid,
        "_ffp": (P, Pe),
        "_u": sol.u,
    }


def _public(summary: dict) -> dict:
    return {k: v for k, v in summary.items() if not k.startswith("_")}


def cmd_run(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    res = run_case(cfg, cfg.ppw[0])
    grid = res["_grid"]
    P, Pe = res["_ffp"]
    write_ffp_csv(out / "ffp.csv", grid.theta, P, Pe)
    write_field_csv(out / "field.csv", res["_u"], grid, cfg.k)
    summary = _public(res)
    summary["seconds_note"] = "wall clock, machine dependent"
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(_public(res)))
    return 0 if res["residual_ok"] else 2


def _sweep_worker(args):
    cfg_dict, ppw = args
    res = run_case(RunConfig(**cfg_dict), ppw)
    return _public(res)


def cmd_sweep(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(asdict(cfg), p) for p in cfg.ppw]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]
    rec = ConvergenceRecord(cfg.scheme)
    for r in results:
        rec.add(r["ppw"], r["h"], r["ffp_l2_rel_error"], r["seconds"], r["grid"])
    write_convergence_csv(out / "convergence.csv", rec, include_seconds=not args.no_timing)
    orders = rec.orders
    summary = {
        "scheme": cfg.scheme,
        "bc": cfg.bc,
        "L": cfg.nkfe,
        "R": cfg.R,
        "runs": results,
        "observed_orders": orders,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{'ppw':>5} {'grid':>9} {'h':>9} {'error':>11} {'order':>6} {'seconds':>8}")
    for i, r in enumerate(results):
        o = f"{orders[i - 1]:6.2f}" if i else " " * 6
        print(f"{r['ppw']:5g} {r['grid']:>9} {r['h']:9.5f} {r['ffp_l2_rel_error']:11.3e} {o} {r['seconds']:8.3f}")
    return 0 if all(r["residual_ok"] for r in results) else 2


def cmd_bench(cfg: RunConfig, args) -> int:
    target = args.target
    pairs = TIMING_PAIRS.get(target)
    if pairs is None:
        raise ConfigError(f"target must be one of {sorted(TIMING_PAIRS)}, got {target}")
    schemes = args.schemes.split(",") if args.schemes else list(pairs)
    rows = []
    ok = True
    for scheme in schemes:
        if scheme not in pairs:
            raise ConfigError(f"no (ppw, L) pair for scheme {scheme!r}")
        ppw, L = pairs[scheme]
        c = RunConfig(**{**asdict(cfg), "scheme": scheme, "nkfe": L, "ppw": [float(ppw)]})
        times = []
        err = None
        for _ in range(args.repeat):
            res = run_case(c, float(ppw))
            times.append(res["seconds"])
            err = res["ffp_l2_rel_error"]
            ok &= res["residual_ok"]
        rows.append({"scheme": scheme, "ppw": ppw, "L": L, "mean_seconds": float(np.mean(times)), "ffp_l2_rel_error": err})
    for r in rows:
        print(f"{r['scheme']:>5} ppw={r['ppw']:<3} L={r['L']:<3} mean {r['mean_seconds']:.4f}s  error {r['ffp_l2_rel_error']:.3e}")
    print("timings are wall clock and machine dependent")
    if args.json:
        Path(args.json).write_text(json.dumps({"target": target, "runs": rows}, indent=2) + "\n")
    return 0 if ok else 2


def cmd_dump_stencil(cfg: RunConfig, args) -> int:
    if args.named:
        if args.named == "ks4-outer-d1":
            st, printed = KS4_PLAN.outer_d1, PRINTED_OUTER_D1
        elif args.named == "ks4-outer-d2":
            st, printed = KS4_PLAN.outer_d2, PRINTED_OUTER_D2
        else:
            raise ConfigError(f"unknown stencil name {args.named!r}")
        print("derived:", st)
        print("printed:", ", ".join(f"{s:+d}: {printed[s]}" for s in st.offsets))
        return 0
    if args.lo is not None or args.hi is not None:
        lo = -100 if args.lo is None else args.lo
        hi = 100 if args.hi is None else args.hi
        st = fd.fitted(args.deriv, args.accuracy, lo, hi)
    else:
        st = fd.centered(args.deriv, args.accuracy)
    print(st)
    return 0


def cmd_dump_matrix(cfg: RunConfig, args) -> int:
    grid = build_grid(cfg.r0, cfg.R, cfg.k, cfg.ppw[0])
    if cfg.scheme == "ks4":
        system = assemble_ks4(grid, cfg.nkfe, cfg.bc, cfg.k)
    else:
        system = assemble_second_order(grid, cfg.nkfe, cfg.bc, cfg.k)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / args.file
    write_coo(system, path)
    print(f"wrote {system.size}x{system.size} matrix with {system.nnz} nonzeros to {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--k", type=_parse_float)
    common.add_argument("--r0", type=float)
    common.add_argument("--R", type=float)
    common.add_argument("--bc", choices=BC_KINDS)
    common.add_argument("--nkfe", type=int, help="number of Karp expansion terms L")
    common.add_argument("--ppw", help="points per wavelength; comma list for sweeps")
    common.add_argument("--scheme", choices=sorted(SCHEMES))
    common.add_argument("--out", help="output directory")
    common.add_argument("--nterms-exact", type=int, dest="nterms_exact")
    common.add_argument("--refine-steps", type=int, dest="refine_steps")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="kdcscatter", description="Disk scattering with Karp farfield boundaries")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="single solve: ffp.csv, field.csv, summary.json")
    sw = sub.add_parser("sweep", parents=[common], help="convergence study over a ppw list")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--no-timing", action="store_true", help="leave the seconds column empty (byte-stable output)")
    b = sub.add_parser("bench", parents=[common], help="mean wall time at the tabulated (ppw, L) pairs")
    b.add_argument("--target", type=float, default=1e-5)
    b.add_argument("--schemes", help="comma list, default all three")
    b.add_argument("--repeat", type=int, default=10)
    b.add_argument("--json", help="also write results to this file")
    ds = sub.add_parser("dump-stencil", parents=[common], help="print finite-difference weights")
    ds.add_argument("--deriv", type=int, default=2)
    ds.add_argument("--accuracy", type=int, default=2)
    ds.add_argument("--lo", type=int)
    ds.add_argument("--hi", type=int)
    ds.add_argument("--named", help="ks4-outer-d1 or ks4-outer-d2")
    dm = sub.add_parser("dump-matrix", parents=[common], help="write the matrix as row col re im lines")
    dm.add_argument("--file", default="matrix.coo")
    return p


def resolve_config(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(load_config(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is None:
            continue
        values[f.name] = _parse_value("ppw", v) if f.name == "ppw" else v
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "bench": cmd_bench,
    "dump-stencil": cmd_dump_stencil,
    "dump-matrix": cmd_dump_matrix,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
