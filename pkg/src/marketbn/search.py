"""Score-guided structure search and bootstrap ensemble consensus."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import InputError
from .graph import Dag, Edge, _pair
from .scoring import BDeuConfig, FamilyScoreCache, as_state_table

log = logging.getLogger(__name__)

IMPROVE_EPS = 1e-12


@dataclass(frozen=True)
class SearchControls:
    """Knobs of the local search."""

    tabu_tenure: int = 10
    max_stall: int = 15
    max_in_degree: int = 4
    max_iterations: int = 5000

    def __post_init__(self):
        if self.tabu_tenure < 0 or self.max_stall < 1 or self.max_in_degree < 1:
            raise InputError("search controls out of range")


class _GraphState:
    """Mutable parent-set view of a DAG during search."""

    def __init__(self, nodes: tuple[str, ...], edges: Iterable[Edge]):
        self.nodes = nodes
        self.parents: dict[str, set[str]] = {n: set() for n in nodes}
        self.children: dict[str, set[str]] = {n: set() for n in nodes}
        for a, b in edges:
            self.parents[b].add(a)
            self.children[a].add(b)

    def has_edge(self, a: str, b: str) -> bool:
        return a in self.parents[b]

    def add(self, a: str, b: str) -> None:
        self.parents[b].add(a)
        self.children[a].add(b)

    def remove(self, a: str, b: str) -> None:
        self.parents[b].discard(a)
        self.children[a].discard(b)

    def has_path(self, src: str, dst: str) -> bool:
        """Directed reachability src -> ... -> dst."""
        if src == dst:
            return True
        stack = [src]
        seen = {src}
        while stack:
            n = stack.pop()
            for c in self.children[n]:
                if c == dst:
                    return True
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def edges(self) -> set[Edge]:
        return {(a, b) for b, ps in self.parents.items() for a in ps}

    def snapshot(self) -> dict[str, frozenset[str]]:
        return {n: frozenset(ps) for n, ps in self.parents.items()}

    def restore(self, snap: dict[str, frozenset[str]]) -> None:
        self.parents = {n: set(ps) for n, ps in snap.items()}
        self.children = {n: set() for n in self.nodes}
        for b, ps in self.parents.items():
            for a in ps:
                self.children[a].add(b)


Move = tuple[str, str, str]  # (kind, a, b)


def _reverse_move(move: Move) -> Move:
    kind, a, b = move
    if kind == "add":
        return ("del", a, b)
    if kind == "del":
        return ("add", a, b)
    return ("rev", b, a)


def tabu_search(
    data,
    config: BDeuConfig | None = None,
    controls: SearchControls | None = None,
    seed: int = 0,
    *,
    candidate_edges: Iterable[Edge] | None = None,
    fixed_edges: Iterable[Edge] = (),
) -> Dag:
    """Local search over add/delete/reverse moves with short-term memory.

    The scan order and tie-breaks are lexicographic, so the result is a pure
    function of the data and controls; ``seed`` is accepted for interface
    stability and recorded by callers, not consumed here.  ``fixed_edges``
    are present from the start and never touched; ``candidate_edges``, when
    given, restricts which directed edges the search may toggle.  The result
    is polished by plain greedy ascent from the best state visited, so no
    single legal move can improve it.
    """
    del seed
    table = as_state_table(data)
    config = config or BDeuConfig()
    controls = controls or SearchControls()
    nodes = table.columns
    known = set(nodes)

    fixed = {(a, b) for a, b in fixed_edges}
    for a, b in fixed:
        if a not in known or b not in known:
            raise InputError(f"fixed edge ({a!r}, {b!r}) references an unknown column")
    if candidate_edges is None:
        candidate = {(a, b) for a in nodes for b in nodes if a != b} - fixed
    else:
        candidate = {(a, b) for a, b in candidate_edges} - fixed
        for a, b in candidate:
            if a not in known or b not in known or a == b:
                raise InputError(f"candidate edge ({a!r}, {b!r}) is not usable")
    candidate_sorted = sorted(candidate)

    Dag(nodes, fixed)  # validates endpoints and acyclicity of the fixed part
    state = _GraphState(nodes, fixed)
    cache = FamilyScoreCache(table, config)

    def family(node: str) -> float:
        return cache.family(node, frozenset(state.parents[node]))

    current = sum(family(n) for n in nodes)
    best_score = current
    best_snap = state.snapshot()

    def legal_moves() -> list[tuple[float, Move]]:
        moves: list[tuple[float, Move]] = []
        for a, b in candidate_sorted:
            if state.has_edge(a, b):
                # delete
                gain = cache.family(b, frozenset(state.parents[b] - {a})) - family(b)
                moves.append((gain, ("del", a, b)))
                # reverse
                if (
                    (b, a) in candidate
                    and not state.has_edge(b, a)
                    and len(state.parents[a]) < controls.max_in_degree
                ):
                    state.remove(a, b)
                    cyclic = state.has_path(a, b)
                    state.add(a, b)
                    if not cyclic:
                        gain_rev = (
                            cache.family(b, frozenset(state.parents[b] - {a}))
                            - family(b)
                            + cache.family(a, frozenset(state.parents[a] | {b}))
                            - family(a)
                        )
                        moves.append((gain_rev, ("rev", a, b)))
            elif (
                not state.has_edge(b, a)
                and len(state.parents[b]) < controls.max_in_degree
                and not state.has_path(b, a)
            ):
                gain = cache.family(b, frozenset(state.parents[b] | {a})) - family(b)
                moves.append((gain, ("add", a, b)))
        return moves

    def apply(move: Move) -> None:
        kind, a, b = move
        if kind == "add":
            state.add(a, b)
        elif kind == "del":
            state.remove(a, b)
        else:
            state.remove(a, b)
            state.add(b, a)

    tabu_until: dict[Move, int] = {}
    stall = 0
    for iteration in range(controls.max_iterations):
        chosen = None
        chosen_gain = None
        for gain, move in legal_moves():
            banned = tabu_until.get(move, -1) >= iteration
            if banned and current + gain <= best_score + IMPROVE_EPS:
                continue  # aspiration lifts the ban only for a new best
            if chosen is None or gain > chosen_gain + IMPROVE_EPS or (
                abs(gain - chosen_gain) <= IMPROVE_EPS and move < chosen
            ):
                chosen, chosen_gain = move, gain
        if chosen is None:
            break
        apply(chosen)
        tabu_until[_reverse_move(chosen)] = iteration + controls.tabu_tenure
        current += chosen_gain
        if current > best_score + IMPROVE_EPS:
            best_score = current
            best_snap = state.snapshot()
            stall = 0
        else:
            stall += 1
            if stall >= controls.max_stall:
                break

    # Greedy polish: certify the returned graph as a single-move optimum.
    state.restore(best_snap)
    current = best_score
    while True:
        uphill = [(g, m) for g, m in legal_moves() if g > IMPROVE_EPS]
        if not uphill:
            break
        # largest gain wins; lexicographically smallest move on near-ties
        top = max(g for g, _ in uphill)
        move = sorted(m for g, m in uphill if g >= top - IMPROVE_EPS)[0]
        gain = next(g for g, m in uphill if m == move)
        apply(move)
        current += gain

    return Dag(nodes, state.edges())


@dataclass(frozen=True)
class EdgeFrequencies:
    """Bootstrap support per skeleton pair and per orientation."""

    undirected: dict[tuple[str, str], float]
    directed: dict[Edge, float]


def _find_cycle(nodes: tuple[str, ...], edges: set[Edge]) -> list[Edge] | None:
    """Edges of one directed cycle, or None. Deterministic scan order."""
    children: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in sorted(edges):
        children[a].append(b)
    color = {n: 0 for n in nodes}  # 0 fresh, 1 on stack, 2 done
    parent_edge: dict[str, Edge] = {}

    for root in nodes:
        if color[root]:
            continue
        stack: list[tuple[str, int]] = [(root, 0)]
        color[root] = 1
        while stack:
            node, k = stack[-1]
            if k < len(children[node]):
                stack[-1] = (node, k + 1)
                child = children[node][k]
                if color[child] == 1:
                    cycle = [(node, child)]
                    cur = node
                    while cur != child:
                        e = parent_edge[cur]
                        cycle.append(e)
                        cur = e[0]
                    cycle.reverse()
                    return cycle
                if color[child] == 0:
                    color[child] = 1
                    parent_edge[child] = (node, child)
                    stack.append((child, 0))
            else:
                color[node] = 2
                stack.pop()
    return None


def bootstrap_consensus(
    data,
    resamples: int = 200,
    threshold: float = 0.5,
    *,
    config: BDeuConfig | None = None,
    controls: SearchControls | None = None,
    seed: int = 0,
    candidate_edges: Iterable[Edge] | None = None,
    fixed_edges: Iterable[Edge] = (),
    use_directed_frequency: bool = False,
) -> tuple[Dag, EdgeFrequencies]:
    """Aggregate structures learned on row resamples into one consensus graph.

    Each resample draws n rows with replacement from a substream derived from
    ``(seed, resample index)``, so results do not depend on execution order.
    A skeleton pair is retained when its frequency (both orientations pooled)
    reaches ``threshold``; the majority orientation wins, ties going from the
    lexicographically smaller to the larger name.  ``use_directed_frequency``
    applies the threshold per orientation instead.  If the retained edges
    cycle, the lowest-frequency edge on each cycle is dropped until acyclic.
    """
    if resamples < 1:
        raise InputError("resamples must be at least 1")
    if not 0.0 < threshold <= 1.0:
        raise InputError("threshold must sit in (0, 1]")
    table = as_state_table(data)
    if table.n_rows < 1:
        raise InputError("cannot resample an empty table")
    nodes = table.columns
    fixed = {(a, b) for a, b in fixed_edges}

    counts: dict[Edge, int] = {}
    for i in range(resamples):
        rng = np.random.default_rng([seed, i])
        rows = rng.integers(0, table.n_rows, size=table.n_rows)
        learned = tabu_search(
            table.resample(rows),
            config,
            controls,
            seed,
            candidate_edges=candidate_edges,
            fixed_edges=fixed,
        )
        for e in learned.edges - fixed:
            counts[e] = counts.get(e, 0) + 1

    directed = {e: c / resamples for e, c in counts.items()}
    undirected: dict[tuple[str, str], float] = {}
    for (a, b), f in directed.items():
        p = _pair(a, b)
        undirected[p] = undirected.get(p, 0.0) + f

    retained: set[Edge] = set()
    if use_directed_frequency:
        for p in sorted(undirected):
            a, b = p
            fa, fb = directed.get((a, b), 0.0), directed.get((b, a), 0.0)
            if max(fa, fb) >= threshold:
                retained.add((a, b) if fa >= fb else (b, a))
    else:
        for p in sorted(undirected):
            if undirected[p] < threshold:
                continue
            a, b = p
            fa, fb = directed.get((a, b), 0.0), directed.get((b, a), 0.0)
            retained.add((a, b) if fa >= fb else (b, a))

    # Cycle repair on the retained set (fixed edges participate in cycles too
    # but are never dropped).
    def freq_of(edge: Edge) -> float:
        return undirected.get(_pair(*edge), 0.0)

    while True:
        cycle = _find_cycle(nodes, retained | fixed)
        if cycle is None:
            break
        droppable = [e for e in cycle if e in retained]
        if not droppable:
            raise InputError("fixed edges contain a cycle")
        victim = min(droppable, key=lambda e: (freq_of(e), e))
        retained.discard(victim)

    consensus = Dag(nodes, retained | fixed)
    return consensus, EdgeFrequencies(undirected=undirected, directed=directed)
