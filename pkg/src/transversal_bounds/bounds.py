"""Closed-form bound formulas and the main bound pipeline.

All bound values here are density-only coefficients; multiply by the product of
part sizes for a count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations, product
from typing import Any, Sequence

import numpy as np

from . import canonicalize as canon
from .decomp import ENUMERATION_CAP, OddCycleDecomposition, brute_min, evaluate
from .errors import BadCycle, NumericalFailure, TooLarge, ValidationError
from .lp import DEFAULT_TOL, LogWeights, PrimalSolution, build_log_weights, solve
from .model import DensityMatrix

AUTO_ENUMERATION_MAX_K = 7
CROSSCHECK_RTOL = 1e-7

SLACK_NOTE = (
    "coefficient multiplies n_1...n_k; the upper bound holds up to an additive "
    "o(n_1...n_k) term (explicit only for three parts: + n_2 n_3)"
)


class Method(str, Enum):
    LP = "lp"
    ENUMERATION = "enumeration"
    AUTO = "auto"


@dataclass
class BoundReport:
    bound_coefficient: float
    witness: OddCycleDecomposition
    primal: PrimalSolution | None
    method: str
    slack_note: str = SLACK_NOTE
    baseline: float | None = None
    crosscheck: float | None = None
    lp_objective: float | None = None
    canonical_moves: int = 0

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "coefficient": self.bound_coefficient,
            "witness": self.witness.to_json(),
            "a": None if self.primal is None else list(self.primal.a),
            "method": self.method,
            "baseline": self.baseline,
            "notes": self.slack_note,
        }
        if self.crosscheck is not None:
            out["crosscheck"] = self.crosscheck
        return out


def _saturated_witness(d: DensityMatrix, pairs) -> OddCycleDecomposition:
    i, j = min(pairs)
    return OddCycleDecomposition(((i, j),) + tuple((v,) for v in range(d.k) if v not in (i, j)))


def _lp_path(d: DensityMatrix, w: LogWeights, tol: float) -> BoundReport:
    pr, du = solve(w, tol)
    q = canon.canonicalize(canon.support_graph(du, tol), w, tol)
    h = canon.to_decomposition(q)
    coef = evaluate(h, d)
    if abs(-math.log(coef) - du.objective) > 1e-7 * (1 + du.objective):
        raise NumericalFailure(
            f"decomposition value {coef:.12g} disagrees with the LP optimum exp(-{du.objective:.12g})"
        )
    primal = canon.recover_primal(h, w, reference=pr, tol=tol)
    return BoundReport(coef, h, primal, Method.LP.value, lp_objective=du.objective, canonical_moves=len(q.moves))


def _enumeration_path(d: DensityMatrix, w: LogWeights, tol: float) -> BoundReport:
    h, coef = brute_min(d)
    primal = canon.recover_primal(h, w, tol=tol)
    return BoundReport(coef, h, primal, Method.ENUMERATION.value)


def main_bound(
    d: DensityMatrix,
    method: Method | str = Method.AUTO,
    crosscheck: bool = False,
    tol: float = DEFAULT_TOL,
) -> BoundReport:
    """Minimum over odd cycle decompositions of the product of sqrt(1 - d) factors.

    ``auto`` enumerates for k <= 7 and uses the LP route above; with
    ``crosscheck`` both routes run and must agree to 1e-7 relative.
    """
    method = Method(method)
    if method is Method.ENUMERATION and d.k > ENUMERATION_CAP:
        raise TooLarge(f"enumeration supports k <= {ENUMERATION_CAP}, got {d.k}")
    baseline = fhl_baseline(d)
    w = build_log_weights(d)
    if w.infinite_pairs:
        h = _saturated_witness(d, w.infinite_pairs)
        return BoundReport(evaluate(h, d), h, None, method.value, baseline=baseline)

    if method is Method.AUTO:
        method = Method.ENUMERATION if d.k <= AUTO_ENUMERATION_MAX_K else Method.LP
    report = _lp_path(d, w, tol) if method is Method.LP else _enumeration_path(d, w, tol)
    report.baseline = baseline

    if crosscheck and d.k <= ENUMERATION_CAP:
        other = _enumeration_path(d, w, tol) if method is Method.LP else _lp_path(d, w, tol)
        report.crosscheck = other.bound_coefficient
        scale = max(abs(report.bound_coefficient), abs(other.bound_coefficient))
        if abs(report.bound_coefficient - other.bound_coefficient) > CROSSCHECK_RTOL * scale:
            raise NumericalFailure(
                f"lp and enumeration disagree: {report.bound_coefficient!r} vs {other.bound_coefficient!r}"
            )
    return report


def fhl_baseline(d: DensityMatrix) -> float:
    """Product over pairs of (1 - d_ij) ** (floor(k/2) / C(k,2))."""
    k = d.k
    expo = (k // 2) / math.comb(k, 2)
    return math.prod((1.0 - d[i, j]) ** expo for i, j in combinations(range(k), 2))


def triangle_bound(d12: float, d13: float, d23: float) -> float:
    """Transversal-clique coefficient for three parts: min(d12, sqrt(d12 d13 d23)), inputs sorted."""
    lo, mid, hi = sorted((float(d12), float(d13), float(d23)))
    return min(lo, math.sqrt(lo * mid * hi))


def cycle_bound(d: DensityMatrix, cycle: Sequence[int]) -> float:
    """Clique coefficient along a cycle of parts: prod of sqrt(d) over consecutive pairs.

    Three-part cycles go through :func:`triangle_bound`.
    """
    cyc = [int(v) for v in cycle]
    if len(cyc) < 3:
        raise BadCycle(f"a cycle needs at least 3 parts, got {len(cyc)}")
    if len(set(cyc)) != len(cyc):
        raise BadCycle(f"cycle repeats a part: {[v + 1 for v in cyc]}")
    if any(not 0 <= v < d.k for v in cyc):
        raise BadCycle(f"cycle leaves the {d.k} parts: {[v + 1 for v in cyc]}")
    m = len(cyc)
    if m == 3:
        a, b, c = cyc
        return triangle_bound(d[a, b], d[a, c], d[b, c])
    return math.prod(math.sqrt(d[cyc[t], cyc[(t + 1) % m]]) for t in range(m))


@dataclass(frozen=True)
class TriangleProgram:
    n1: int
    d12: float
    d13: float
    d23: float
    g: int = 8

    def __post_init__(self) -> None:
        if not 0.0 <= self.d12 <= self.d13 <= self.d23 <= 1.0:
            raise ValidationError(f"need 0 <= d12 <= d13 <= d23 <= 1, got {self.d12}, {self.d13}, {self.d23}")
        if self.n1 < 1 or self.g < 1:
            raise ValidationError("n1 and g must be positive")


GRID_TOL = 1e-12
_GRID_CELLS = 4_000_000


def triangle_grid_oracle(tp: TriangleProgram) -> float:
    """Exhaustive grid maximum of sum_i min(a_i b_i, d23).

    Variables range over {0, 1/g, ..., 1} subject to sum a_i <= d12 n1 and
    sum b_i <= d13 n1.  The result under-approximates the continuous optimum.
    """
    if tp.n1 > 4 or tp.g > 8:
        raise TooLarge(f"grid oracle supports n1 <= 4 and g <= 8, got n1={tp.n1}, g={tp.g}")
    levels = np.arange(tp.g + 1) / tp.g
    grid = np.array(list(product(levels, repeat=tp.n1)))
    sums = grid.sum(axis=1)
    A = grid[sums <= tp.d12 * tp.n1 + GRID_TOL]
    B = grid[sums <= tp.d13 * tp.n1 + GRID_TOL]
    best = 0.0
    step = max(1, _GRID_CELLS // (len(B) * tp.n1))
    for start in range(0, len(A), step):
        block = A[start : start + step]
        vals = np.minimum(block[:, None, :] * B[None, :, :], tp.d23).sum(axis=2)
        best = max(best, float(vals.max()))
    return best


def triangle_grid_ceiling(tp: TriangleProgram) -> float:
    """Upper bound the grid oracle must respect: n1 sqrt(d12 d13 d23) + 1."""
    return tp.n1 * math.sqrt(tp.d12 * tp.d13 * tp.d23) + 1.0


def k3_decomposition_minimum(d: DensityMatrix) -> float:
    """min(triangle, best double edge, 1) for three parts, computed directly."""
    if d.k != 3:
        raise ValidationError("needs exactly three parts")
    comp = d.complement()
    tri = math.sqrt(comp[0, 1] * comp[0, 2] * comp[1, 2])
    best_edge = min(comp[i, j] for i, j in combinations(range(3), 2))
    return min(tri, best_edge, 1.0)
