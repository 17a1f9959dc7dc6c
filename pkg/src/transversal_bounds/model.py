"""Core domain types: pairwise density matrices, part sizes, multipartite graphs.

Parts and vertices are 0-indexed in memory.  All JSON readers and writers use
1-based labels.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import AsymmetricMatrix, BadDimension, OutOfRange, SamePart, ValidationError

SYMMETRY_TOL = 1e-12
MAX_PARTS = 64
MAX_PART_SIZE = 4096


def _to_fraction(value: Any) -> Fraction | None:
    """Exact value of a JSON scalar when one is recoverable (strings, ints)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"boolean is not a density: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse density {value!r}") from exc
    return None


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Symmetric k x k matrix of pairwise edge densities.

    ``exact`` optionally carries the rational value of every off-diagonal entry
    (``None`` where unknown) so that fixtures such as 3/4 survive round trips.
    Build instances through :func:`validate_densities`.
    """

    d: np.ndarray
    exact: tuple[tuple[Fraction | None, ...], ...] | None = None

    @property
    def k(self) -> int:
        return self.d.shape[0]

    def __getitem__(self, ij: tuple[int, int]) -> float:
        return float(self.d[ij])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return np.array_equal(self.d, other.d) and self.exact == other.exact

    def pairs(self) -> Iterable[tuple[int, int]]:
        return combinations(range(self.k), 2)

    def fraction(self, i: int, j: int) -> Fraction:
        """Exact rational for the pair; falls back to the exact value of the float."""
        if self.exact is not None and self.exact[i][j] is not None:
            return self.exact[i][j]
        return Fraction(float(self.d[i, j]))

    def complement(self) -> DensityMatrix:
        exact = None
        if self.exact is not None:
            exact = tuple(
                tuple(None if i == j or f is None else 1 - f for j, f in enumerate(row))
                for i, row in enumerate(self.exact)
            )
        out = 1.0 - self.d
        np.fill_diagonal(out, 0.0)
        return _freeze(out, exact)

    @classmethod
    def uniform(cls, k: int, value: float | Fraction | str) -> DensityMatrix:
        return validate_densities([[value] * k for _ in range(k)])

    def to_json(self) -> dict[str, Any]:
        dens = [[0.0 if i == j else float(self.d[i, j]) for j in range(self.k)] for i in range(self.k)]
        out: dict[str, Any] = {"k": self.k, "densities": dens}
        if self.exact is not None:
            out["rationals"] = [
                [
                    None if (i == j or f is None) else [str(f.numerator), str(f.denominator)]
                    for j, f in enumerate(row)
                ]
                for i, row in enumerate(self.exact)
            ]
        return out

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> DensityMatrix:
        if "densities" not in obj:
            raise ValidationError("density file needs a 'densities' field")
        dm = validate_densities(obj["densities"], obj.get("rationals"))
        if "k" in obj and int(obj["k"]) != dm.k:
            raise BadDimension(f"declared k={obj['k']} but matrix is {dm.k}x{dm.k}")
        return dm


def _freeze(arr: np.ndarray, exact) -> DensityMatrix:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return DensityMatrix(arr, exact)


def validate_densities(raw: Any, rationals: Any = None) -> DensityMatrix:
    """Check a raw k x k density table and freeze it.

    Entries may be numbers or decimal/rational strings ("0.75", "3/4").  The
    diagonal is ignored.  Symmetry is checked, never averaged.
    """
    if isinstance(raw, DensityMatrix):
        return raw
    rows = [list(r) for r in (raw.tolist() if isinstance(raw, np.ndarray) else raw)]
    k = len(rows)
    if k < 2 or any(len(r) != k for r in rows):
        raise BadDimension(f"need a square matrix with k >= 2, got {k} rows of lengths {[len(r) for r in rows]}")
    if k > MAX_PARTS:
        raise BadDimension(f"k={k} exceeds the cap of {MAX_PARTS}")

    exact: list[list[Fraction | None]] = [[None] * k for _ in range(k)]
    d = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            f = _to_fraction(rows[i][j])
            if f is not None:
                exact[i][j] = f
                d[i, j] = float(f)
            else:
                try:
                    d[i, j] = float(rows[i][j])
                except (TypeError, ValueError) as exc:
                    raise ValidationError(f"entry ({i + 1},{j + 1}) is not a number") from exc

    if rationals is not None:
        if len(rationals) != k or any(len(r) != k for r in rationals):
            raise BadDimension("'rationals' must match the density matrix shape")
        for i in range(k):
            for j in range(k):
                cell = rationals[i][j]
                if i == j or cell is None:
                    continue
                num, den = cell
                f = Fraction(int(num), int(den))
                if abs(float(f) - d[i, j]) > SYMMETRY_TOL:
                    raise ValidationError(f"rational {f} disagrees with density {d[i, j]} at ({i + 1},{j + 1})")
                exact[i][j] = f
                d[i, j] = float(f)

    for i, j in combinations(range(k), 2):
        for a, b in ((i, j), (j, i)):
            if not (0.0 <= d[a, b] <= 1.0) or np.isnan(d[a, b]):
                raise OutOfRange(f"density at ({a + 1},{b + 1}) = {d[a, b]} is outside [0, 1]")
        if abs(d[i, j] - d[j, i]) > SYMMETRY_TOL:
            raise AsymmetricMatrix(f"d[{i + 1}][{j + 1}]={d[i, j]} but d[{j + 1}][{i + 1}]={d[j, i]}")
        if exact[i][j] is not None and exact[j][i] is not None and exact[i][j] != exact[j][i]:
            raise AsymmetricMatrix(f"rational entries differ at ({i + 1},{j + 1})")

    has_exact = any(exact[i][j] is not None for i in range(k) for j in range(k) if i != j)
    frozen_exact = tuple(tuple(r) for r in exact) if has_exact else None
    return _freeze(d, frozen_exact)


@dataclass(frozen=True)
class PartSpec:
    n: tuple[int, ...]

    def __post_init__(self) -> None:
        n = tuple(int(x) for x in self.n)
        object.__setattr__(self, "n", n)
        if len(n) < 2:
            raise BadDimension("need at least two parts")
        if len(n) > MAX_PARTS:
            raise BadDimension(f"{len(n)} parts exceeds the cap of {MAX_PARTS}")
        for i, x in enumerate(n):
            if x < 1:
                raise OutOfRange(f"part {i + 1} has size {x}; sizes must be >= 1")
            if x > MAX_PART_SIZE:
                raise OutOfRange(f"part {i + 1} has size {x}; cap is {MAX_PART_SIZE}")

    @property
    def k(self) -> int:
        return len(self.n)

    @property
    def total(self) -> int:
        return math.prod(self.n)

    def check_against(self, d: DensityMatrix) -> None:
        if self.k != d.k:
            raise BadDimension(f"{self.k} part sizes given for a {d.k}-part density matrix")

    @classmethod
    def parse(cls, text: str) -> PartSpec:
        try:
            return cls(tuple(int(t) for t in text.split(",") if t.strip()))
        except ValueError as exc:
            raise ValidationError(f"bad part list {text!r}") from exc


def _popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True, eq=False)
class MultipartiteGraph:
    """k-partite graph stored as per-vertex neighbour bit vectors.

    ``adj[(i, j)][u]`` is an int whose bit ``v`` is set iff vertex ``u`` of part
    ``i`` is adjacent to vertex ``v`` of part ``j``.  Both orientations of every
    pair are stored.
    """

    parts: PartSpec
    adj: dict[tuple[int, int], tuple[int, ...]] = field(repr=False)

    @property
    def k(self) -> int:
        return self.parts.k

    @property
    def n(self) -> tuple[int, ...]:
        return self.parts.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultipartiteGraph):
            return NotImplemented
        return self.parts == other.parts and self.adj == other.adj

    def __hash__(self) -> int:
        return hash((self.parts, tuple(sorted(self.adj.items()))))

    def neighbors(self, i: int, u: int, j: int) -> int:
        if i == j:
            raise SamePart(f"no edges inside part {i + 1}")
        return self.adj[(i, j)][u]

    def has_edge(self, i: int, u: int, j: int, v: int) -> bool:
        return bool((self.neighbors(i, u, j) >> v) & 1)

    def edge_count(self, i: int, j: int) -> int:
        if i == j:
            raise SamePart(f"no edges inside part {i + 1}")
        return sum(_popcount(m) for m in self.adj[(i, j)])

    def edges(self) -> Iterable[tuple[int, int, int, int]]:
        for i, j in combinations(range(self.k), 2):
            for u, mask in enumerate(self.adj[(i, j)]):
                v = 0
                while mask:
                    if mask & 1:
                        yield (i, u, j, v)
                    mask >>= 1
                    v += 1

    def bool_matrix(self, i: int, j: int) -> np.ndarray:
        """Dense n_i x n_j adjacency of a part pair."""
        nbytes = (self.n[j] + 7) // 8
        raw = b"".join(m.to_bytes(nbytes, "little") for m in self.adj[(i, j)])
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8).reshape(self.n[i], nbytes), axis=1, bitorder="little")
        return bits[:, : self.n[j]].astype(bool)

    def complement(self) -> MultipartiteGraph:
        adj = {}
        for (i, j), rows in self.adj.items():
            full = (1 << self.n[j]) - 1
            adj[(i, j)] = tuple(full & ~m for m in rows)
        return MultipartiteGraph(self.parts, adj)

    @classmethod
    def empty(cls, parts: PartSpec | Sequence[int]) -> MultipartiteGraph:
        parts = parts if isinstance(parts, PartSpec) else PartSpec(tuple(parts))
        adj = {(i, j): (0,) * parts.n[i] for i in range(parts.k) for j in range(parts.k) if i != j}
        return cls(parts, adj)

    @classmethod
    def complete(cls, parts: PartSpec | Sequence[int]) -> MultipartiteGraph:
        return cls.empty(parts).complement()

    @classmethod
    def from_edges(
        cls, parts: PartSpec | Sequence[int], edges: Iterable[tuple[int, int, int, int]]
    ) -> MultipartiteGraph:
        """Edges are 0-based ``(part_i, u, part_j, v)`` tuples."""
        parts = parts if isinstance(parts, PartSpec) else PartSpec(tuple(parts))
        rows = {(i, j): [0] * parts.n[i] for i in range(parts.k) for j in range(parts.k) if i != j}
        for i, u, j, v in edges:
            if i == j:
                raise SamePart(f"edge inside part {i + 1}")
            if not (0 <= i < parts.k and 0 <= j < parts.k):
                raise OutOfRange(f"part index out of range in edge {(i, u, j, v)}")
            if not (0 <= u < parts.n[i] and 0 <= v < parts.n[j]):
                raise OutOfRange(f"vertex index out of range in edge {(i, u, j, v)}")
            rows[(i, j)][u] |= 1 << v
            rows[(j, i)][v] |= 1 << u
        return cls(parts, {key: tuple(val) for key, val in rows.items()})

    @classmethod
    def from_matrices(
        cls, parts: PartSpec | Sequence[int], blocks: dict[tuple[int, int], np.ndarray]
    ) -> MultipartiteGraph:
        """Build from boolean ``n_i x n_j`` blocks keyed by ``(i, j)`` with ``i < j``."""
        parts = parts if isinstance(parts, PartSpec) else PartSpec(tuple(parts))
        def pack(mat: np.ndarray) -> tuple[int, ...]:
            return tuple(int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little") for row in mat)

        adj: dict[tuple[int, int], tuple[int, ...]] = {}
        for i, j in combinations(range(parts.k), 2):
            mat = np.asarray(blocks.get((i, j), np.zeros((parts.n[i], parts.n[j]), dtype=bool)), dtype=bool)
            if mat.shape != (parts.n[i], parts.n[j]):
                raise BadDimension(f"block ({i + 1},{j + 1}) has shape {mat.shape}")
            adj[(i, j)] = pack(mat)
            adj[(j, i)] = pack(mat.T)
        return cls(parts, adj)

    def to_json(self) -> dict[str, Any]:
        return {
            "parts": list(self.n),
            "edges": [[i + 1, u + 1, j + 1, v + 1] for i, u, j, v in self.edges()],
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> MultipartiteGraph:
        try:
            parts = PartSpec(tuple(obj["parts"]))
            edges = [(int(i) - 1, int(u) - 1, int(j) - 1, int(v) - 1) for i, u, j, v in obj.get("edges", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed graph JSON: {exc}") from exc
        return cls.from_edges(parts, edges)


def realized_density(g: MultipartiteGraph, i: int, j: int) -> Fraction:
    """e(V_i, V_j) / (n_i n_j) as an exact rational."""
    if i == j:
        raise SamePart(f"realized density needs two distinct parts, got {i + 1} twice")
    return Fraction(g.edge_count(i, j), g.n[i] * g.n[j])


def load_json(path: str | Path) -> Any:
    """Read JSON keeping float literals as decimal strings (parsed exactly later)."""
    with open(path) as fh:
        return json.load(fh, parse_float=str)


def load_densities(path: str | Path) -> DensityMatrix:
    return DensityMatrix.from_json(load_json(path))


def load_graph(path: str | Path) -> MultipartiteGraph:
    with open(path) as fh:
        return MultipartiteGraph.from_json(json.load(fh))


class Mode(str, Enum):
    """What is being counted: independent transversals of G or transversal cliques."""

    INDEPENDENT = "independent-transversal"
    CLIQUE = "transversal-clique"

    @classmethod
    def parse(cls, value: str | Mode) -> Mode:
        if isinstance(value, Mode):
            return value
        key = str(value).strip().lower()
        aliases = {
            "it": cls.INDEPENDENT,
            "independent": cls.INDEPENDENT,
            "independent-transversal": cls.INDEPENDENT,
            "clique": cls.CLIQUE,
            "tc": cls.CLIQUE,
            "transversal-clique": cls.CLIQUE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValidationError(f"unknown mode {value!r}") from None
