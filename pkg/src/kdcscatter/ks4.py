"""Standard fourth-order scheme (KS4).

Nine-point cross stencil in the interior, biased fourth-order radial
stencils on the rings next to the obstacle and the artificial boundary, and
fourth-order one-sided matching rows at r = R that keep one ghost ring. The
ghost is eliminated through the first-derivative matching row, exactly as in
the second-order system; the boundary Helmholtz row then closes the block.
"""

from __future__ import annotations

from fractions import Fraction

from . import fdstencil as fd
from .assembly import ScatteringSystem, StencilPlan, assemble
from .grid import PolarGrid

__all__ = ["KS4_PLAN", "PRINTED_OUTER_D1", "PRINTED_OUTER_D2", "StandardSystem", "assemble_ks4"]

# weights as printed for the boundary rows, keyed by ring offset from r = R
PRINTED_OUTER_D1 = {
    1: Fraction(1, 4),
    0: Fraction(5, 6),
    -1: Fraction(-3, 2),
    -2: Fraction(1, 2),
    -3: Fraction(-1, 12),
}
PRINTED_OUTER_D2 = {
    1: Fraction(5, 6),
    0: Fraction(-5, 4),
    -1: Fraction(-1, 3),
    -2: Fraction(7, 6),
    -3: Fraction(-1, 2),
    -4: Fraction(1, 12),
}

StandardSystem = ScatteringSystem


def _ks4_radial(ring: int, B: int, bc: str) -> tuple[fd.Stencil, fd.Stencil]:
    # lowest usable ring: the Neumann ghost only for the obstacle row itself
    lo = -1 if (bc == "neumann" and ring == 0) else 0
    if 0 < ring < B:
        hi = B  # ring B is available through continuity; the ghost is not
    else:
        hi = B + 1
    return fd.fitted(2, 4, lo - ring, hi - ring), fd.fitted(1, 4, lo - ring, hi - ring)


KS4_PLAN = StencilPlan(
    name="ks4",
    order=4,
    radial=_ks4_radial,
    angular=fd.centered(2, 4),
    outer_d1=fd.one_sided_left(1, 4, 1),
    outer_d2=fd.one_sided_left(2, 4, 1),
    inner_d1=fd.one_sided_right(1, 4, -1),
    recursion=fd.centered(2, 4),
)


def _check_printed():
    for st, printed in ((KS4_PLAN.outer_d1, PRINTED_OUTER_D1), (KS4_PLAN.outer_d2, PRINTED_OUTER_D2)):
        derived = dict(zip(st.offsets, st.weights))
        if derived != printed:
            raise AssertionError(f"derived boundary weights {derived} differ from the printed {printed}")


_check_printed()


def assemble_ks4(grid: PolarGrid, L: int, bc: str, k: float | None = None) -> StandardSystem:
    """Matrix A4 and data vector of the standard fourth-order scheme."""
    if grid.N < 7:
        raise ValueError(f"KS4 needs N >= 7 radial points for its one-sided stencils, got {grid.N}")
    return assemble(grid, L, bc, k, KS4_PLAN)
