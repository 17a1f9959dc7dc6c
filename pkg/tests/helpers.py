"""Independent reference implementations and fixture generators for the tests.

Nothing here calls into the enumeration or LP code of the package, so these
can act as oracles for it.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import permutations

import numpy as np

from transversal_bounds.model import DensityMatrix, validate_densities

DENOMINATORS = (2, 3, 4, 5, 8, 10, 16, 100)


def random_rational_matrix(rng: np.random.Generator, k: int, zero_prob: float = 0.15) -> DensityMatrix:
    den = int(rng.choice(DENOMINATORS))
    m = [[Fraction(0)] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            if rng.random() < zero_prob:
                v = Fraction(0)
            else:
                v = Fraction(int(rng.integers(0, den)), den)
            m[i][j] = m[j][i] = v
    return validate_densities([[str(v) for v in row] for row in m])


def trial_matrices(k: int, count: int, seed: int) -> list[DensityMatrix]:
    rng = np.random.default_rng([seed, k])
    return [random_rational_matrix(rng, k) for _ in range(count)]


def egf_counts(kmax: int) -> list[int]:
    """Decomposition counts from exp(x + x^2/2 + sum_{odd m>=3} x^m / (2m))."""
    f = [Fraction(0)] * (kmax + 1)
    f[1] = Fraction(1)
    if kmax >= 2:
        f[2] = Fraction(1, 2)
    for m in range(3, kmax + 1, 2):
        f[m] = Fraction(1, 2 * m)
    # g = exp(f) via g' = f' g
    g = [Fraction(0)] * (kmax + 1)
    g[0] = Fraction(1)
    for n in range(1, kmax + 1):
        g[n] = sum(m * f[m] * g[n - m] for m in range(1, n + 1)) / n
    return [int(g[n] * math.factorial(n)) for n in range(kmax + 1)]


def _set_partitions(items: list[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for idx in range(len(part)):
            yield part[:idx] + [[first] + part[idx]] + part[idx + 1 :]


def _block_values(block: list[int], comp: np.ndarray) -> list[float]:
    """Every piece value available on one block of a set partition."""
    m = len(block)
    if m == 1:
        return [1.0]
    if m == 2:
        return [comp[block[0], block[1]]]
    if m % 2 == 0:
        return []
    head, tail = block[0], block[1:]
    vals = []
    for perm in permutations(tail):
        if perm[0] > perm[-1]:
            continue
        cyc = (head,) + perm
        vals.append(math.prod(math.sqrt(comp[cyc[t], cyc[(t + 1) % m]]) for t in range(m)))
    return vals


def partition_min(d: DensityMatrix) -> float:
    """Brute-force minimum over set partitions of K_k into admissible pieces."""
    comp = 1.0 - np.asarray(d.d)
    best = math.inf
    for partition in _set_partitions(list(range(d.k))):
        per_block = [_block_values(b, comp) for b in partition]
        if any(not v for v in per_block):
            continue
        best = min(best, math.prod(min(v) for v in per_block))
    return best


def partition_count(k: int) -> int:
    total = 0
    for partition in _set_partitions(list(range(k))):
        ways = 1
        for b in partition:
            m = len(b)
            if m >= 3:
                ways *= math.factorial(m - 1) // 2 if m % 2 else 0
        total += ways
    return total


def scipy_lp2(p: np.ndarray) -> tuple[float, float]:
    """(covering optimum, packing optimum) for weights p via scipy's HiGHS."""
    from scipy.optimize import linprog

    k = p.shape[0]
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    a_ub = np.zeros((len(pairs), k))
    for r, (i, j) in enumerate(pairs):
        a_ub[r, i] = a_ub[r, j] = -1.0
    pv = np.array([p[i, j] for i, j in pairs])
    cover = linprog(np.ones(k), A_ub=a_ub, b_ub=-pv, bounds=[(0, None)] * k, method="highs")
    # packing: max p.x with sum_j x_ij <= 1 (the slack is y_i)
    pack = linprog(-pv, A_ub=-a_ub.T, b_ub=np.ones(k), bounds=[(0, None)] * len(pairs), method="highs")
    return float(cover.fun), float(-pack.fun)
