import math

import pytest

from kdcscatter import build_grid

K = 2 * math.pi


@pytest.fixture
def small_grid():
    # N=11, m=63: cheap but wide enough for every correction stencil
    return build_grid(1.0, 2.0, K, 10)


@pytest.fixture(params=["dirichlet", "neumann"])
def bc(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE
    except ImportError:
        return
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
