"""Reduce an optimal packing solution to odd-cycle-decomposition form.

The support graph Q of a packing solution has an edge wherever ``x_ij > 0`` and
a self-loop wherever ``y_i > 0``.  Local moves shift weight along closed
alternating walks so that every vertex keeps total weight 1 and the objective
``sum p_ij x_ij`` is unchanged, while at least one support entry drops to zero.
Once no move applies, every component is an isolated vertex, a single edge or
an induced odd cycle, which reads off directly as a decomposition.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .decomp import OddCycleDecomposition, canonical_cycle
from .errors import InfeasibleRecovery, NonConvergence, NotCanonical, OptimalityViolation
from .lp import DEFAULT_TOL, DualSolution, LogWeights, PrimalSolution, solve_lp2

log = logging.getLogger(__name__)

Key = tuple[int, int]  # (i, j) with i < j is an edge, (i, i) a loop


@dataclass
class Move:
    name: str
    eps: float
    vertices: tuple[int, ...]
    delta: float
    objective_before: float
    objective_after: float
    counts_before: tuple[int, int]
    counts_after: tuple[int, int]


@dataclass
class QGraph:
    k: int
    w: dict[Key, float]
    moves: list[Move] = field(default_factory=list)

    def copy(self) -> QGraph:
        return QGraph(self.k, dict(self.w), list(self.moves))

    def edges(self) -> list[Key]:
        return sorted(e for e in self.w if e[0] != e[1])

    def loops(self) -> list[int]:
        return sorted(e[0] for e in self.w if e[0] == e[1])

    def counts(self) -> tuple[int, int]:
        """(#non-loop edges, #loops)."""
        loops = sum(1 for e in self.w if e[0] == e[1])
        return len(self.w) - loops, loops

    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in range(self.k)}
        for i, j in self.edges():
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def weight(self, i: int, j: int) -> float:
        return self.w.get((min(i, j), max(i, j)), 0.0)

    def vertex_sums(self) -> np.ndarray:
        s = np.zeros(self.k)
        for (i, j), val in self.w.items():
            s[i] += val
            if i != j:
                s[j] += val
        return s

    def objective(self, w: LogWeights) -> float:
        return math.fsum(w.p[i, j] * val for (i, j), val in self.w.items() if i != j)

    def components(self) -> list[list[int]]:
        adj = self.adjacency()
        seen: set[int] = set()
        comps = []
        for s in range(self.k):
            if s in seen:
                continue
            comp, queue = [], deque([s])
            seen.add(s)
            while queue:
                v = queue.popleft()
                comp.append(v)
                for u in sorted(adj[v]):
                    if u not in seen:
                        seen.add(u)
                        queue.append(u)
            comps.append(sorted(comp))
        return comps

    def to_dual(self) -> DualSolution:
        x = np.zeros((self.k, self.k))
        y = np.zeros(self.k)
        for (i, j), val in self.w.items():
            if i == j:
                y[i] = val
            else:
                x[i, j] = x[j, i] = val
        return DualSolution(x, y, float("nan"))


def support_graph(du: DualSolution, tol: float = DEFAULT_TOL) -> QGraph:
    k = du.k
    w: dict[Key, float] = {}
    for i in range(k):
        for j in range(i + 1, k):
            if du.x[i, j] > tol:
                w[(i, j)] = float(du.x[i, j])
        if du.y[i] > tol:
            w[(i, i)] = float(du.y[i])
    return QGraph(k, w)


def dual_from_decomposition(h: OddCycleDecomposition, w: LogWeights) -> DualSolution:
    """Half-integral packing solution whose support is the decomposition itself."""
    k = w.k
    x = np.zeros((k, k))
    y = np.zeros(k)
    for piece in h.pieces:
        if len(piece) == 1:
            y[piece[0]] = 1.0
        elif len(piece) == 2:
            i, j = piece
            x[i, j] = x[j, i] = 1.0
        else:
            m = len(piece)
            for t in range(m):
                i, j = piece[t], piece[(t + 1) % m]
                x[i, j] = x[j, i] = 0.5
    return DualSolution.from_weights(x, y, w)


# --- structure search -----------------------------------------------------------


def _simple_cycles(adj: dict[int, set[int]]) -> Iterator[list[int]]:
    """Each simple cycle once, starting at its smallest vertex."""
    for s in sorted(adj):
        path = [s]
        on_path = {s}

        def extend(v: int) -> Iterator[list[int]]:
            for u in sorted(adj[v]):
                if u == s and len(path) >= 3 and path[1] < path[-1]:
                    yield list(path)
                elif u > s and u not in on_path:
                    path.append(u)
                    on_path.add(u)
                    yield from extend(u)
                    path.pop()
                    on_path.discard(u)

        yield from extend(s)


def _shortest_path(adj: dict[int, set[int]], sources: set[int], targets: set[int]) -> list[int] | None:
    """BFS path from the source set to the target set, as a vertex list."""
    parent: dict[int, int | None] = {s: None for s in sorted(sources)}
    queue = deque(sorted(sources))
    while queue:
        v = queue.popleft()
        if v in targets and v not in sources:
            path = [v]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        for u in sorted(adj[v]):
            if u not in parent:
                parent[u] = v
                queue.append(u)
    return None


def _edge(i: int, j: int) -> Key:
    return (i, j) if i < j else (j, i)


def _rooted(cycle: list[int], root: int) -> list[int]:
    r = cycle.index(root)
    return cycle[r:] + cycle[:r]


def _cycle_pattern(cycle: list[int], root: int, sign: int) -> dict[Key, float]:
    """Alternating +-1 around an odd cycle; net -2*sign at the root, 0 elsewhere."""
    cyc = _rooted(cycle, root)
    m = len(cyc)
    return {_edge(cyc[t], cyc[(t + 1) % m]): float(sign * (-1) ** (t + 1)) for t in range(m)}


def _path_pattern(path: list[int]) -> tuple[dict[Key, float], float]:
    """Alternating +2/-2 along a path; returns the pattern and the last coefficient."""
    pat = {}
    coef = 2.0
    for t in range(len(path) - 1):
        coef = 2.0 * (-1) ** t
        pat[_edge(path[t], path[t + 1])] = coef
    return pat, coef


def _merge(*patterns: dict[Key, float]) -> dict[Key, float]:
    out: dict[Key, float] = {}
    for pat in patterns:
        for key, c in pat.items():
            out[key] = out.get(key, 0.0) + c
    return {key: c for key, c in out.items() if c != 0.0}


@dataclass
class _Candidate:
    name: str
    pattern: dict[Key, float]
    vertices: tuple[int, ...]
    eps_rule: str  # "fixed-sign", "ratio" or "delta"
    cycle_keys: tuple[Key, ...] = ()
    side_keys: tuple[Key, ...] = ()


def _find_move(q: QGraph) -> _Candidate | None:
    loops = q.loops()
    if len(loops) >= 2:
        i, j = loops[0], loops[1]
        return _Candidate("loop-merge", {(i, i): -1.0, (j, j): -1.0, (i, j): 1.0}, (i, j), "fixed-sign")

    adj = q.adjacency()
    cycles = []
    for cyc in _simple_cycles(adj):
        if len(cyc) % 2 == 0:
            m = len(cyc)
            pat = {_edge(cyc[t], cyc[(t + 1) % m]): float((-1) ** t) for t in range(m)}
            return _Candidate("even-cycle", pat, tuple(cyc), "ratio")
        cycles.append(cyc)

    comp_of = {}
    for idx, comp in enumerate(q.components()):
        for v in comp:
            comp_of[v] = idx

    for a in range(len(cycles)):
        for b in range(a + 1, len(cycles)):
            c1, c2 = cycles[a], cycles[b]
            if comp_of[c1[0]] != comp_of[c2[0]]:
                continue
            shared = set(c1) & set(c2)
            ckeys = tuple(_cycle_pattern(c1, c1[0], 1)) + tuple(_cycle_pattern(c2, c2[0], 1))
            if len(shared) == 1:
                r = shared.pop()
                pat = _merge(_cycle_pattern(c1, r, 1), _cycle_pattern(c2, r, -1))
                return _Candidate("odd-cycles-at-vertex", pat, tuple(c1) + tuple(c2), "delta", ckeys, ())
            if shared:
                continue
            path = _shortest_path(adj, set(c1), set(c2))
            if path is None:
                continue
            ppat, last = _path_pattern(path)
            pat = _merge(_cycle_pattern(c1, path[0], 1), ppat, _cycle_pattern(c2, path[-1], int(last / 2)))
            return _Candidate(
                "odd-cycles-by-path", pat, tuple(c1) + tuple(path) + tuple(c2), "delta", ckeys, tuple(ppat)
            )

    for v in loops:
        on_cycle = [c for c in cycles if v in c]
        if on_cycle:
            c = on_cycle[0]
            pat = _merge(_cycle_pattern(c, v, 1), {(v, v): 2.0})
            ckeys = tuple(_cycle_pattern(c, v, 1))
            return _Candidate("loop-detach", pat, tuple(c), "delta", ckeys, ((v, v),))
        same = [c for c in cycles if comp_of[c[0]] == comp_of[v]]
        if same:
            c = same[0]
            path = _shortest_path(adj, set(c), {v})
            ppat, last = _path_pattern(path)
            pat = _merge(_cycle_pattern(c, path[0], 1), ppat, {(v, v): -last})
            ckeys = tuple(_cycle_pattern(c, path[0], 1))
            return _Candidate("pendant-path", pat, tuple(c) + tuple(path), "delta", ckeys, tuple(ppat) + ((v, v),))
    return None


def _step(q: QGraph, cand: _Candidate, sign: int) -> float:
    """Largest step along ``sign * pattern`` keeping all weights non-negative."""
    limits = [q.w.get(key, 0.0) / abs(c) for key, c in cand.pattern.items() if sign * c < 0]
    return min(limits) if limits else math.inf


def _zeroes(q: QGraph, cand: _Candidate, sign: int, eps: float, tol: float) -> bool:
    return any(
        key in q.w and q.w[key] + sign * c * eps <= tol for key, c in cand.pattern.items() if sign * c < 0
    )


def _apply(q: QGraph, cand: _Candidate, weights: LogWeights, tol: float) -> Move:
    unit = math.fsum(weights.p[i, j] * c for (i, j), c in cand.pattern.items() if i != j)
    sign = 1 if unit >= 0 else -1

    if cand.eps_rule == "fixed-sign":
        sign = 1
        eps = _step(q, cand, 1)
    elif cand.eps_rule == "ratio":
        if abs(unit) <= tol:
            sign = 1
        eps = _step(q, cand, sign)
    else:
        delta = min(q.w[key] for key in cand.cycle_keys)
        if cand.side_keys:
            delta_side = min(q.w[key] for key in cand.side_keys)
            eps = delta if 2 * delta <= delta_side else delta_side / 2
        else:
            eps = delta
        if abs(unit) * eps <= tol:
            sign = 1 if _zeroes(q, cand, 1, eps, tol) else -1

    change = sign * eps * unit
    if abs(change) > tol and (cand.eps_rule != "fixed-sign" or change > 0):
        raise OptimalityViolation(
            f"{cand.name} on {[v + 1 for v in cand.vertices]} changes the objective by {change:.3g}; "
            "the packing solution was not optimal"
        )

    before_obj = q.objective(weights)
    before_counts = q.counts()
    sums_before = q.vertex_sums()
    for key, c in cand.pattern.items():
        val = q.w.get(key, 0.0) + sign * c * eps
        if val < -tol:
            raise NonConvergence(f"{cand.name} drove weight {key} negative ({val:.3g})")
        if val <= tol:
            q.w.pop(key, None)
        else:
            q.w[key] = val
    after_obj = q.objective(weights)
    if np.max(np.abs(q.vertex_sums() - sums_before)) > 2 * tol * max(1, len(cand.pattern)):
        raise NonConvergence(f"{cand.name} broke the vertex weight identity")
    move = Move(
        cand.name, eps, cand.vertices, change, before_obj, after_obj, before_counts, q.counts()
    )
    log.debug(
        "%s eps=%.6g vertices=%s delta=%.3g edges=%d loops=%d",
        move.name, eps, [v + 1 for v in cand.vertices], change, *move.counts_after,
    )
    return move


def canonicalize(
    q: QGraph, weights: LogWeights, tol: float = DEFAULT_TOL, max_moves: int | None = None
) -> QGraph:
    """Apply objective-preserving moves until the support is in decomposition form.

    Moves, by priority: merge two loops into an edge; break an even cycle; pull
    apart two odd cycles meeting at a vertex or joined by a path; drain a path
    hanging off an odd cycle into its end loop; detach a loop from a cycle
    vertex.  Every move lowers (#loops, #edges) lexicographically.  Returns a
    new graph whose ``moves`` list records what was done.
    """
    q = q.copy()
    limit = max_moves if max_moves is not None else 10 * q.k * q.k
    while True:
        cand = _find_move(q)
        if cand is None:
            return q
        if len(q.moves) >= limit:
            raise NonConvergence(f"more than {limit} canonicalization moves")
        move = _apply(q, cand, weights, tol)
        before = (move.counts_before[1], move.counts_before[0])
        after = (move.counts_after[1], move.counts_after[0])
        if not after < before:
            raise NonConvergence(f"{move.name} made no progress on the support")
        q.moves.append(move)


def _walk_cycle(comp: list[int], adj: dict[int, set[int]]) -> list[int]:
    start = comp[0]
    order = [start]
    prev, cur = None, start
    while True:
        nxt = min(u for u in adj[cur] if u != prev) if prev is not None else min(adj[cur])
        if nxt == start:
            return order
        order.append(nxt)
        prev, cur = cur, nxt


def to_decomposition(q: QGraph) -> OddCycleDecomposition:
    """Read a canonical support as a decomposition: edges double, loops drop."""
    adj = q.adjacency()
    loops = set(q.loops())
    pieces = []
    for comp in q.components():
        if len(comp) == 1:
            pieces.append((comp[0],))
            continue
        n_edges = sum(len(adj[v]) for v in comp) // 2
        if loops.intersection(comp):
            raise NotCanonical(f"component {[v + 1 for v in comp]} carries a self-loop")
        if len(comp) == 2:
            pieces.append(tuple(comp))
            continue
        if len(comp) % 2 == 0 or n_edges != len(comp) or any(len(adj[v]) != 2 for v in comp):
            raise NotCanonical(f"component {[v + 1 for v in comp]} is not an induced odd cycle")
        pieces.append(canonical_cycle(_walk_cycle(comp, adj)))
    return OddCycleDecomposition(tuple(pieces))


def _cycle_solution(cycle: tuple[int, ...], p: np.ndarray) -> dict[int, float]:
    m = len(cycle)
    edge_p = [p[cycle[t], cycle[(t + 1) % m]] for t in range(m)]
    first = 0.5 * math.fsum((-1) ** t * edge_p[t] for t in range(m))
    b = {cycle[0]: first}
    for t in range(m - 1):
        b[cycle[t + 1]] = edge_p[t] - b[cycle[t]]
    return b


def _feasibility_failures(b: np.ndarray, w: LogWeights, tol: float) -> list[str]:
    bad = [f"b_{i + 1}={b[i]:.3g} < 0" for i in range(w.k) if b[i] < -tol]
    bad += [
        f"b_{i + 1}+b_{j + 1}={b[i] + b[j]:.6g} < p={w.p[i, j]:.6g}"
        for i, j in w.pairs()
        if b[i] + b[j] < w.p[i, j] - tol
    ]
    return bad


def recover_primal(
    h: OddCycleDecomposition,
    w: LogWeights,
    reference: PrimalSolution | None = None,
    tol: float = DEFAULT_TOL,
) -> PrimalSolution:
    """Covering solution tight on every piece edge, zero on isolated vertices.

    Odd cycles fix their b values uniquely.  A double edge only fixes
    ``b_i + b_j``; the even split is tried first and, if it breaks a constraint
    with another piece, the split is taken from an optimal covering solution
    (``reference``, solved on demand).
    """
    h.check_cover(w.k)
    b = np.zeros(w.k)
    for piece in h.cycles():
        for v, val in _cycle_solution(piece, w.p).items():
            b[v] = val
    doubles = h.double_edges()
    for i, j in doubles:
        b[i] = b[j] = w.p[i, j] / 2

    failures = _feasibility_failures(b, w, tol)
    if failures and doubles:
        reference = reference or solve_lp2(w, tol)
        for i, j in doubles:
            if abs(reference.b[i] + reference.b[j] - w.p[i, j]) > tol:
                raise InfeasibleRecovery(
                    f"reference solution is not tight on double edge ({i + 1},{j + 1}); decomposition is not optimal"
                )
            b[i], b[j] = reference.b[i], reference.b[j]
        failures = _feasibility_failures(b, w, tol)
    if failures:
        raise InfeasibleRecovery("recovered covering solution is infeasible: " + "; ".join(failures[:5]))
    return PrimalSolution.from_b(np.maximum(b, 0.0))
