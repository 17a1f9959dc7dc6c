"""Exact and sampled counts of independent transversals / transversal cliques."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Any

import numpy as np

from .errors import Guard, ValidationError
from .model import Mode, MultipartiteGraph

MAX_EXACT_PARTS = 12
MAX_EXACT_PART_SIZE = 256


@dataclass(frozen=True)
class CountResult:
    mode: Mode
    value: float
    exact: bool
    se: float = 0.0
    samples: int = 0
    nodes_visited: int = 0
    elapsed: float = 0.0

    def to_json(self, timing: bool = True) -> dict[str, Any]:
        if self.exact:
            out: dict[str, Any] = {"count": int(self.value), "mode": self.mode.value, "nodes": self.nodes_visited}
        else:
            out = {"estimate": self.value, "se": self.se, "samples": self.samples, "mode": self.mode.value}
        if timing:
            out["ms"] = round(self.elapsed * 1000.0, 3)
        return out


def check_guard(g: MultipartiteGraph) -> None:
    if g.k > MAX_EXACT_PARTS or max(g.n) > MAX_EXACT_PART_SIZE:
        raise Guard(
            f"exact counting is limited to k <= {MAX_EXACT_PARTS} and parts <= {MAX_EXACT_PART_SIZE}; "
            "use count_sample"
        )


def _masks(g: MultipartiteGraph, order: list[int], mode: Mode) -> list[list[list[int]]]:
    """masks[a][b][u]: compatible vertices of part order[b] for vertex u of part order[a]."""
    out = []
    for a, i in enumerate(order):
        row = []
        for b, j in enumerate(order):
            if b <= a:
                row.append([])
                continue
            full = (1 << g.n[j]) - 1
            nbrs = g.adj[(i, j)]
            row.append(list(nbrs) if mode is Mode.CLIQUE else [full & ~m for m in nbrs])
        out.append(row)
    return out


def _search(masks, sizes: list[int], first_vertices: range) -> tuple[int, int]:
    k = len(sizes)
    nodes = 0

    def dfs(level: int, cands: list[int]) -> int:
        nonlocal nodes
        if level == k - 1:
            return cands[level].bit_count()
        total = 0
        mask = cands[level]
        row = masks[level]
        while mask:
            low = mask & -mask
            u = low.bit_length() - 1
            mask ^= low
            nodes += 1
            nxt = cands[:]
            ok = True
            for b in range(level + 1, k):
                nxt[b] &= row[b][u]
                if not nxt[b]:
                    ok = False
                    break
            if ok:
                total += dfs(level + 1, nxt)
        return total

    start = [(1 << s) - 1 for s in sizes]
    first = 0
    for u in first_vertices:
        first |= 1 << u
    start[0] &= first
    return dfs(0, start), nodes


def _search_job(args):
    masks, sizes, lo, hi = args
    return _search(masks, sizes, range(lo, hi))


def count_exact(g: MultipartiteGraph, mode: Mode | str = Mode.INDEPENDENT, jobs: int = 1) -> CountResult:
    """Depth-first count over parts in ascending size, intersecting candidate bit sets.

    ``jobs > 1`` splits the first part's vertices across worker processes.
    """
    mode = Mode.parse(mode)
    check_guard(g)
    t0 = time.perf_counter()
    order = sorted(range(g.k), key=lambda i: (g.n[i], i))
    sizes = [g.n[i] for i in order]
    masks = _masks(g, order, mode)
    if jobs > 1 and sizes[0] > 1:
        bounds = np.linspace(0, sizes[0], min(jobs, sizes[0]) + 1).astype(int)
        tasks = [(masks, sizes, int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:])]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_search_job, tasks))
        value = sum(p[0] for p in parts)
        nodes = sum(p[1] for p in parts)
    else:
        value, nodes = _search(masks, sizes, range(sizes[0]))
    return CountResult(mode, value, True, nodes_visited=nodes, elapsed=time.perf_counter() - t0)


def count_naive(g: MultipartiteGraph, mode: Mode | str = Mode.INDEPENDENT) -> int:
    """Check every one of the prod n_i transversals; reference for tests."""
    mode = Mode.parse(mode)
    mats = {(i, j): g.bool_matrix(i, j) for i, j in combinations(range(g.k), 2)}
    grids = np.meshgrid(*[np.arange(n) for n in g.n], indexing="ij")
    flat = [x.ravel() for x in grids]
    ok = np.ones(flat[0].shape, dtype=bool)
    for (i, j), mat in mats.items():
        adjacent = mat[flat[i], flat[j]]
        ok &= adjacent if mode is Mode.CLIQUE else ~adjacent
    return int(ok.sum())


def count_sample(
    g: MultipartiteGraph, samples: int, seed: int = 0, mode: Mode | str = Mode.INDEPENDENT
) -> CountResult:
    """Monte Carlo estimate from uniform transversals: p_hat * prod n_i."""
    mode = Mode.parse(mode)
    if samples < 1:
        raise ValidationError("need at least one sample")
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    picks = [rng.integers(0, n, size=samples) for n in g.n]
    ok = np.ones(samples, dtype=bool)
    for i, j in combinations(range(g.k), 2):
        adjacent = g.bool_matrix(i, j)[picks[i], picks[j]]
        ok &= adjacent if mode is Mode.CLIQUE else ~adjacent
    p_hat = float(ok.mean())
    total = math.prod(g.n)
    se = total * math.sqrt(p_hat * (1.0 - p_hat) / samples)
    return CountResult(
        mode, p_hat * total, False, se=se, samples=samples, elapsed=time.perf_counter() - t0
    )
