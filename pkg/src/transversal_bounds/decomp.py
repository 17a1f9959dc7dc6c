"""Odd cycle decompositions of K_k: representation, enumeration, evaluation.

A decomposition partitions the vertex set into odd cycles, double edges and
isolated vertices.  Internally every piece is a vertex tuple: length 1 is an
isolated vertex, length 2 a double edge, odd length >= 3 a cycle in canonical
orientation (smallest vertex first, smaller neighbour second).  A decomposition
is the tuple of its pieces sorted by first vertex; comparing these tuples gives
the canonical (lexicographic) order used for tie-breaking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from typing import Any, Iterator, Sequence

import numpy as np

from .errors import CoverageMismatch, TooLarge, ValidationError
from .model import DensityMatrix, Mode

ENUMERATION_CAP = 10
TIE_TOL = 1e-12
_CACHE_MAX_K = 8
_CHUNK = 20000

RawPiece = tuple[int, ...]
RawDecomposition = tuple[RawPiece, ...]


def canonical_cycle(vertices: Sequence[int]) -> RawPiece:
    vs = [int(v) for v in vertices]
    if len(vs) < 3 or len(vs) % 2 == 0:
        raise ValidationError(f"an odd cycle needs odd length >= 3, got {vs}")
    if len(set(vs)) != len(vs):
        raise ValidationError(f"cycle repeats a vertex: {vs}")
    r = vs.index(min(vs))
    vs = vs[r:] + vs[:r]
    if vs[1] > vs[-1]:
        vs = [vs[0]] + vs[1:][::-1]
    return tuple(vs)


def _canonical_piece(vertices: Sequence[int]) -> RawPiece:
    vs = tuple(int(v) for v in vertices)
    if len(vs) == 1:
        return vs
    if len(vs) == 2:
        if vs[0] == vs[1]:
            raise ValidationError(f"double edge needs two distinct vertices, got {vs}")
        return tuple(sorted(vs))
    return canonical_cycle(vs)


def piece_kind(piece: RawPiece) -> str:
    return {1: "isolated", 2: "double_edge"}.get(len(piece), "cycle")


def piece_edges(piece: RawPiece) -> list[tuple[int, int]]:
    """Edge multiset of a piece as sorted pairs; a double edge lists its pair twice."""
    if len(piece) == 1:
        return []
    if len(piece) == 2:
        return [piece, piece]
    m = len(piece)
    return [tuple(sorted((piece[t], piece[(t + 1) % m]))) for t in range(m)]


@dataclass(frozen=True)
class OddCycleDecomposition:
    pieces: RawDecomposition

    def __post_init__(self) -> None:
        pieces = tuple(sorted(_canonical_piece(p) for p in self.pieces))
        seen: set[int] = set()
        for p in pieces:
            if seen.intersection(p):
                raise CoverageMismatch(f"pieces overlap at {sorted(seen.intersection(p))}")
            seen.update(p)
        object.__setattr__(self, "pieces", pieces)

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(v for p in self.pieces for v in p)

    @property
    def k(self) -> int:
        return len(self.vertices)

    @property
    def key(self) -> RawDecomposition:
        return self.pieces

    def cycles(self) -> list[RawPiece]:
        return [p for p in self.pieces if len(p) >= 3]

    def double_edges(self) -> list[RawPiece]:
        return [p for p in self.pieces if len(p) == 2]

    def isolated(self) -> list[int]:
        return [p[0] for p in self.pieces if len(p) == 1]

    def edges(self) -> list[tuple[int, int]]:
        return [e for p in self.pieces for e in piece_edges(p)]

    def check_cover(self, k: int) -> None:
        if self.vertices != frozenset(range(k)):
            missing = sorted(set(range(k)) - self.vertices)
            extra = sorted(self.vertices - set(range(k)))
            raise CoverageMismatch(f"decomposition does not partition [{k}]: missing {missing}, extra {extra}")

    def to_json(self) -> dict[str, Any]:
        out = []
        for p in self.pieces:
            kind = piece_kind(p)
            if kind == "isolated":
                out.append({"isolated": p[0] + 1})
            else:
                out.append({kind: [v + 1 for v in p]})
        return {"pieces": out}

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> OddCycleDecomposition:
        pieces = []
        for item in obj["pieces"]:
            if "isolated" in item:
                pieces.append((int(item["isolated"]) - 1,))
            elif "double_edge" in item:
                u, v = item["double_edge"]
                pieces.append((int(u) - 1, int(v) - 1))
            elif "cycle" in item:
                cyc = [int(v) - 1 for v in item["cycle"]]
                if len(cyc) < 3:
                    raise ValidationError(f"cycle piece too short: {item}")
                pieces.append(tuple(cyc))
            else:
                raise ValidationError(f"unknown piece {item}")
        return cls(tuple(pieces))


def _pair_factor(d: DensityMatrix, i: int, j: int, mode: Mode) -> float:
    x = d[i, j]
    return 1.0 - x if mode is Mode.INDEPENDENT else x


def evaluate(h: OddCycleDecomposition, d: DensityMatrix, mode: Mode | str = Mode.INDEPENDENT) -> float:
    """Product over all piece edges of sqrt(1 - d) (or sqrt(d) in clique mode)."""
    mode = Mode.parse(mode)
    h.check_cover(d.k)
    value = 1.0
    for p in h.pieces:
        if len(p) == 2:
            value *= _pair_factor(d, p[0], p[1], mode)
        elif len(p) >= 3:
            for i, j in piece_edges(p):
                value *= math.sqrt(_pair_factor(d, i, j, mode))
    return value


def decomposition_count(k: int) -> int:
    """Number of odd cycle decompositions of K_k from the first-vertex recurrence."""
    counts = [1, 1]
    for n in range(2, k + 1):
        total = counts[n - 1] + (n - 1) * counts[n - 2]
        for m in range(3, n + 1, 2):
            total += math.comb(n - 1, m - 1) * (math.factorial(m - 1) // 2) * counts[n - m]
        counts.append(total)
    return counts[k]


def _raw_decompositions(vertices: tuple[int, ...]) -> Iterator[RawDecomposition]:
    if not vertices:
        yield ()
        return
    v, rest = vertices[0], vertices[1:]
    for tail in _raw_decompositions(rest):
        yield ((v,),) + tail
    for idx, u in enumerate(rest):
        for tail in _raw_decompositions(rest[:idx] + rest[idx + 1 :]):
            yield ((v, u),) + tail
    for m in range(3, len(vertices) + 1, 2):
        for chosen in combinations(rest, m - 1):
            remaining = tuple(x for x in rest if x not in chosen)
            tails = None
            for perm in permutations(chosen):
                if perm[0] > perm[-1]:
                    continue
                if tails is None:
                    tails = list(_raw_decompositions(remaining))
                cyc = (v,) + perm
                for tail in tails:
                    yield (cyc,) + tail


def _check_k(k: int, cap: int) -> None:
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    if k > cap:
        raise TooLarge(f"k={k} exceeds the enumeration cap of {cap}")


def enumerate_decompositions(k: int, cap: int = ENUMERATION_CAP) -> Iterator[OddCycleDecomposition]:
    """Yield every odd cycle decomposition of K_k exactly once."""
    _check_k(k, cap)
    for raw in _raw_decompositions(tuple(range(k))):
        yield OddCycleDecomposition(raw)


def _pair_index(k: int) -> dict[tuple[int, int], int]:
    return {pair: idx for idx, pair in enumerate(combinations(range(k), 2))}


def _edge_counts(raws: Sequence[RawDecomposition], k: int) -> np.ndarray:
    """Rows: decompositions; columns: pairs; entries: number of sqrt-factors."""
    index = _pair_index(k)
    counts = np.zeros((len(raws), len(index)), dtype=np.int8)
    for r, raw in enumerate(raws):
        for p in raw:
            for e in piece_edges(p):
                counts[r, index[e]] += 1
    return counts


@lru_cache(maxsize=None)
def _table(k: int) -> tuple[tuple[RawDecomposition, ...], np.ndarray]:
    raws = tuple(sorted(_raw_decompositions(tuple(range(k)))))
    return raws, _edge_counts(raws, k)


def _log_factors(d: DensityMatrix, mode: Mode) -> tuple[np.ndarray, np.ndarray]:
    """Half log of each pair factor, plus a mask of pairs whose factor is zero."""
    f = np.array([_pair_factor(d, i, j, mode) for i, j in combinations(range(d.k), 2)])
    zero = f <= 0.0
    with np.errstate(divide="ignore"):
        half_log = np.where(zero, 0.0, 0.5 * np.log(np.where(zero, 1.0, f)))
    return half_log, zero


def _chunks(k: int) -> Iterator[tuple[Sequence[RawDecomposition], np.ndarray]]:
    if k <= _CACHE_MAX_K:
        yield _table(k)
        return
    buf: list[RawDecomposition] = []
    for raw in _raw_decompositions(tuple(range(k))):
        buf.append(raw)
        if len(buf) >= _CHUNK:
            yield buf, _edge_counts(buf, k)
            buf = []
    if buf:
        yield buf, _edge_counts(buf, k)


def _scores(counts: np.ndarray, half_log: np.ndarray, zero: np.ndarray) -> np.ndarray:
    scores = counts @ half_log
    if zero.any():
        scores = np.where(counts[:, zero].any(axis=1), -np.inf, scores)
    return scores


def brute_min(
    d: DensityMatrix, mode: Mode | str = Mode.INDEPENDENT, cap: int = ENUMERATION_CAP
) -> tuple[OddCycleDecomposition, float]:
    """Minimise :func:`evaluate` over all decompositions of K_k.

    Values within a relative ``TIE_TOL`` of the minimum count as ties; the
    lexicographically least decomposition among them wins.
    """
    mode = Mode.parse(mode)
    _check_k(d.k, cap)
    half_log, zero = _log_factors(d, mode)
    best_score = math.inf
    best_key: RawDecomposition | None = None
    for raws, counts in _chunks(d.k):
        scores = _scores(counts, half_log, zero)
        lo = scores.min()
        for idx in np.flatnonzero(scores <= lo + TIE_TOL):
            s, key = scores[idx], raws[idx]
            if s < best_score - TIE_TOL:
                best_score, best_key = s, key
            elif s <= best_score + TIE_TOL and key < best_key:
                best_score, best_key = min(best_score, s), key
    h = OddCycleDecomposition(best_key)
    return h, evaluate(h, d, mode)


def brute_minimizers(
    d: DensityMatrix, mode: Mode | str = Mode.INDEPENDENT, rel_tol: float = 1e-9
) -> list[OddCycleDecomposition]:
    """All decompositions whose value is within ``rel_tol`` (log scale) of the minimum."""
    mode = Mode.parse(mode)
    _check_k(d.k, _CACHE_MAX_K)
    raws, counts = _table(d.k)
    half_log, zero = _log_factors(d, mode)
    scores = _scores(counts, half_log, zero)
    lo = scores.min()
    if lo == -np.inf:
        hits = np.flatnonzero(scores == -np.inf)
    else:
        hits = np.flatnonzero(scores <= lo + rel_tol)
    return [OddCycleDecomposition(raws[i]) for i in hits]
