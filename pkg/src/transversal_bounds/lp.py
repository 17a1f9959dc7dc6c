"""Covering LP over log weights and its packing dual.

With ``p_ij = -ln(1 - d_ij)`` the product program ``max prod a_i`` subject to
``a_i a_j <= 1 - d_ij`` becomes the covering LP

    min sum b_i   s.t.  b_i + b_j >= p_ij,  b_i >= 0

whose dual, written with one slack ``y_i`` per vertex, is the packing LP

    max sum p_ij x_ij   s.t.  y_i + sum_j x_ij = 1,  x, y >= 0.

The packing LP starts feasible at ``x = 0, y = 1``, so a single-phase dense
tableau simplex solves it; the covering solution is read off the final
tableau as the simplex multipliers.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import NumericalFailure, ValidationError
from .model import DensityMatrix

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class LogWeights:
    p: np.ndarray
    infinite_pairs: frozenset[tuple[int, int]] = frozenset()

    @property
    def k(self) -> int:
        return self.p.shape[0]

    def pairs(self):
        return combinations(range(self.k), 2)


@dataclass(frozen=True)
class PrimalSolution:
    b: tuple[float, ...]
    a: tuple[float, ...]
    objective: float

    @classmethod
    def from_b(cls, b) -> PrimalSolution:
        b = tuple(float(x) for x in b)
        return cls(b, tuple(math.exp(-x) for x in b), math.fsum(b))

    def is_feasible(self, w: LogWeights, tol: float = DEFAULT_TOL) -> bool:
        if any(x < -tol for x in self.b):
            return False
        return all(self.b[i] + self.b[j] >= w.p[i, j] - tol for i, j in w.pairs())


@dataclass(frozen=True)
class DualSolution:
    x: np.ndarray
    y: np.ndarray
    objective: float
    basic: bool = False
    iterations: int = 0

    @property
    def k(self) -> int:
        return len(self.y)

    def degree_residuals(self) -> np.ndarray:
        return self.y + self.x.sum(axis=1) - 1.0

    def is_feasible(self, tol: float = DEFAULT_TOL) -> bool:
        return (
            bool(np.all(np.abs(self.degree_residuals()) <= tol))
            and bool(np.all(self.x >= -tol))
            and bool(np.all(self.y >= -tol))
        )

    @classmethod
    def from_weights(cls, x: np.ndarray, y, w: LogWeights) -> DualSolution:
        x = np.array(x, dtype=float)
        y = np.array(y, dtype=float)
        obj = math.fsum(w.p[i, j] * x[i, j] for i, j in w.pairs())
        return cls(x, y, obj)


def build_log_weights(d: DensityMatrix) -> LogWeights:
    k = d.k
    p = np.zeros((k, k))
    infinite = set()
    for i, j in combinations(range(k), 2):
        if d[i, j] >= 1.0:
            infinite.add((i, j))
        else:
            p[i, j] = p[j, i] = -math.log1p(-d[i, j])
    p.setflags(write=False)
    return LogWeights(p, frozenset(infinite))


@dataclass
class SimplexResult:
    x: np.ndarray
    duals: np.ndarray
    objective: float
    basis: list[int]
    iterations: int
    trace: list[str] = field(default_factory=list)


def simplex_max(
    c: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    basis: list[int],
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
) -> SimplexResult:
    """Maximise ``c @ x`` subject to ``A x = b, x >= 0`` from a feasible basis.

    ``A[:, basis]`` must be the identity and ``b >= 0``.  Pivoting follows
    Bland's rule (lowest entering index, lowest leaving basic index on ratio
    ties), which cannot cycle; ``max_iter`` is only a guard against numerical
    trouble.
    """
    m, n = A.shape
    T = np.zeros((m + 1, n + 1))
    T[:m, :n] = A
    T[:m, n] = b
    basis = list(basis)
    if not np.allclose(A[:, basis], np.eye(m)):
        raise ValidationError("initial basis columns must form an identity")
    # reduced-cost row: c_j - c_B B^-1 A_j
    T[m, :n] = c - c[basis] @ A
    T[m, n] = -(c[basis] @ b)
    if max_iter is None:
        max_iter = 50 * (m + n)
    trace: list[str] = []
    it = 0
    while True:
        entering = next((j for j in range(n) if T[m, j] > tol), None)
        if entering is None:
            break
        if it >= max_iter:
            raise NumericalFailure(f"simplex exceeded {max_iter} pivots")
        col = T[:m, entering]
        rows = [r for r in range(m) if col[r] > tol]
        if not rows:
            raise NumericalFailure("packing LP reported unbounded; constraint matrix is malformed")
        ratios = [T[r, n] / col[r] for r in rows]
        best = min(ratios)
        leaving_row = min(
            (r for r, q in zip(rows, ratios) if q <= best + tol),
            key=lambda r: basis[r],
        )
        T[leaving_row] /= T[leaving_row, entering]
        for r in range(m + 1):
            if r != leaving_row and T[r, entering] != 0.0:
                T[r] -= T[r, entering] * T[leaving_row]
        line = f"pivot {it}: enter {entering} leave {basis[leaving_row]} objective {-T[m, n]:.12g}"
        trace.append(line)
        log.debug(line)
        basis[leaving_row] = entering
        it += 1

    x = np.zeros(n)
    for r, j in enumerate(basis):
        x[j] = max(T[r, n], 0.0)
    # multipliers u = c_B B^-1; the initial basis columns hold B^-1
    duals = c[basis] @ T[:m, :n][:, _initial_basis_cols(A, m)]
    return SimplexResult(x, duals, float(c @ x), basis, it, trace)


def _initial_basis_cols(A: np.ndarray, m: int) -> list[int]:
    cols = []
    for r in range(m):
        unit = np.zeros(m)
        unit[r] = 1.0
        cols.append(next(j for j in range(A.shape[1]) if np.array_equal(A[:, j], unit)))
    return cols


def _require_finite(w: LogWeights) -> None:
    if w.infinite_pairs:
        pairs = sorted((i + 1, j + 1) for i, j in w.infinite_pairs)
        raise ValidationError(f"pairs with density 1 cannot enter the LP: {pairs}")


def _packing_tableau(w: LogWeights) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[tuple[int, int]]]:
    k = w.k
    pairs = list(w.pairs())
    n = len(pairs) + k
    A = np.zeros((k, n))
    c = np.zeros(n)
    for col, (i, j) in enumerate(pairs):
        A[i, col] = A[j, col] = 1.0
        c[col] = w.p[i, j]
    for i in range(k):
        A[i, len(pairs) + i] = 1.0
    return c, A, np.ones(k), pairs


def solve(w: LogWeights, tol: float = DEFAULT_TOL) -> tuple[PrimalSolution, DualSolution]:
    """Solve the packing LP once; return the certified (covering, packing) optimum pair."""
    _require_finite(w)
    k = w.k
    c, A, rhs, pairs = _packing_tableau(w)
    res = simplex_max(c, A, rhs, basis=list(range(len(pairs), len(pairs) + k)), tol=tol)

    x = np.zeros((k, k))
    for col, (i, j) in enumerate(pairs):
        x[i, j] = x[j, i] = res.x[col]
    y = res.x[len(pairs) :].copy()
    dual_obj = math.fsum(w.p[i, j] * x[i, j] for i, j in pairs)
    du = DualSolution(x, y, dual_obj, basic=True, iterations=res.iterations)

    b = np.where(np.abs(res.duals) <= tol, 0.0, res.duals)
    pr = PrimalSolution.from_b(b)

    if not du.is_feasible(tol):
        raise NumericalFailure(f"packing solution infeasible: residuals {du.degree_residuals()}")
    if not pr.is_feasible(w, tol):
        raise NumericalFailure("covering solution read from the tableau is infeasible")
    gap = abs(pr.objective - du.objective)
    if gap > tol * (1.0 + abs(pr.objective)):
        raise NumericalFailure(f"duality gap {gap:.3g} exceeds tolerance")
    return pr, du


def solve_lp2(w: LogWeights, tol: float = DEFAULT_TOL) -> PrimalSolution:
    return solve(w, tol)[0]


def solve_lp2_dual(w: LogWeights, tol: float = DEFAULT_TOL) -> DualSolution:
    return solve(w, tol)[1]


def is_half_integral(du: DualSolution, tol: float = DEFAULT_TOL) -> bool:
    vals = du.x[np.triu_indices(du.k, 1)]
    return bool(np.all(np.abs(vals * 2 - np.round(vals * 2)) <= tol))


@dataclass
class SlacknessReport:
    passed: bool
    pair_residuals: dict[tuple[int, int], float]
    loop_residuals: dict[int, float]
    failures: list[str]


def check_complementary_slackness(
    pr: PrimalSolution, du: DualSolution, w: LogWeights, tol: float = DEFAULT_TOL
) -> SlacknessReport:
    """Every positive ``x_ij`` needs a tight covering row; every positive ``y_i`` needs ``b_i = 0``."""
    pair_res: dict[tuple[int, int], float] = {}
    loop_res: dict[int, float] = {}
    failures = []
    for i, j in w.pairs():
        if du.x[i, j] > tol:
            r = pr.b[i] + pr.b[j] - w.p[i, j]
            pair_res[(i, j)] = r
            if abs(r) > tol:
                failures.append(f"pair ({i + 1},{j + 1}): x={du.x[i, j]:.6g} but slack {r:.3g}")
    for i in range(w.k):
        if du.y[i] > tol:
            loop_res[i] = pr.b[i]
            if abs(pr.b[i]) > tol:
                failures.append(f"vertex {i + 1}: y={du.y[i]:.6g} but b={pr.b[i]:.6g}")
    return SlacknessReport(not failures, pair_res, loop_res, failures)
