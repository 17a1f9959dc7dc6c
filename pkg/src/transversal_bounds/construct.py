"""Extremal lower-bound construction.

In the complement of G every pair of cores S_i x S_j is complete bipartite, so
the cores alone give prod |S_i| transversal cliques of the complement, i.e.
independent transversals of G.  Remaining complement edges are placed in a
seeded random order to hit the target densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Any, Sequence

import numpy as np

from .errors import BadDimension, InfeasibleRounding, ValidationError
from .lp import DEFAULT_TOL, PrimalSolution
from .model import DensityMatrix, MultipartiteGraph, PartSpec, realized_density

# a_i n_i values this close below an integer are floored up to it
FLOOR_TOL = 1e-9


@dataclass(frozen=True)
class ExtremalConstruction:
    graph: MultipartiteGraph
    cores: tuple[tuple[int, ...], ...]
    achieved_densities: dict[tuple[int, int], Fraction]
    targets: dict[tuple[int, int], int]
    seed: int

    def sidecar_json(self) -> dict[str, Any]:
        k = self.graph.k
        achieved = [[0.0] * k for _ in range(k)]
        for (i, j), f in self.achieved_densities.items():
            achieved[i][j] = achieved[j][i] = float(f)
        return {
            "cores": [[v + 1 for v in core] for core in self.cores],
            "achieved": achieved,
            "seed": self.seed,
        }


def core_sizes(a: Sequence[float], parts: PartSpec) -> list[int]:
    return [int(math.floor(ai * ni + FLOOR_TOL)) for ai, ni in zip(a, parts.n)]


def complement_target(d: DensityMatrix, parts: PartSpec, i: int, j: int) -> int:
    """Complement edge count round((1 - d_ij) n_i n_j), halves rounded up."""
    x = (1 - d.fraction(i, j)) * parts.n[i] * parts.n[j]
    return math.floor(x + Fraction(1, 2))


def build_extremal(
    d: DensityMatrix,
    parts: PartSpec,
    a: PrimalSolution | Sequence[float],
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> ExtremalConstruction:
    """Graph G with cores of size floor(a_i n_i), densities matched up to rounding.

    ``a`` must satisfy a_i a_j <= 1 - d_ij; entries may be 0 (used when a pair
    has density 1).
    """
    parts.check_against(d)
    a = list(a.a) if isinstance(a, PrimalSolution) else [float(x) for x in a]
    k = d.k
    if len(a) != k:
        raise BadDimension(f"{len(a)} core fractions for {k} parts")
    if any(not -tol <= x <= 1 + tol for x in a):
        raise ValidationError(f"core fractions must lie in [0, 1], got {a}")
    for i, j in combinations(range(k), 2):
        if a[i] * a[j] > 1.0 - d[i, j] + tol:
            raise ValidationError(
                f"a_{i + 1} a_{j + 1} = {a[i] * a[j]:.6g} exceeds 1 - d = {1 - d[i, j]:.6g}"
            )

    sizes = core_sizes(a, parts)
    rng = np.random.default_rng(seed)
    blocks: dict[tuple[int, int], np.ndarray] = {}
    targets: dict[tuple[int, int], int] = {}
    for i, j in combinations(range(k), 2):
        ni, nj = parts.n[i], parts.n[j]
        si, sj = sizes[i], sizes[j]
        m = complement_target(d, parts, i, j)
        targets[(i, j)] = m
        if m < si * sj:
            raise InfeasibleRounding(
                f"pair ({i + 1},{j + 1}) needs {si * sj} core edges but the target allows only {m}"
            )
        comp = np.zeros((ni, nj), dtype=bool)
        comp[:si, :sj] = True
        eligible = np.flatnonzero(~comp.ravel())
        filler = m - si * sj
        if filler:
            chosen = rng.permutation(eligible)[:filler]
            comp.ravel()[chosen] = True
        blocks[(i, j)] = ~comp

    g = MultipartiteGraph.from_matrices(parts, blocks)
    achieved = {(i, j): realized_density(g, i, j) for i, j in combinations(range(k), 2)}
    cores = tuple(tuple(range(s)) for s in sizes)
    return ExtremalConstruction(g, cores, achieved, targets, seed)


def core_guarantee(c: ExtremalConstruction) -> int:
    return math.prod(len(core) for core in c.cores)
