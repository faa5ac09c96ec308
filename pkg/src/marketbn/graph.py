"""Directed acyclic graphs, partially directed graphs, and equivalence classes."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from .errors import InputError

Edge = tuple[str, str]


def _pair(a: str, b: str) -> tuple[str, str]:
    """Canonical unordered pair."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph over an ordered tuple of named nodes.

    Node order is part of the identity: it fixes iteration order everywhere
    downstream (CPT parent order, elimination tie-breaks, report rows).
    """

    nodes: tuple[str, ...]
    edges: frozenset[Edge]

    def __init__(self, nodes: Iterable[str], edges: Iterable[Edge] = ()):
        object.__setattr__(self, "nodes", tuple(nodes))
        object.__setattr__(self, "edges", frozenset((a, b) for a, b in edges))
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise InputError("duplicate node names")
        for a, b in self.edges:
            if a == b:
                raise InputError(f"self-loop on {a!r}")
            if a not in known or b not in known:
                raise InputError(f"edge ({a!r}, {b!r}) references an unknown node")
        if self.topological_order() is None:
            raise InputError("edges contain a cycle")

    def parents(self, node: str) -> tuple[str, ...]:
        """Parents of ``node`` in node order."""
        self._check(node)
        return tuple(a for a in self.nodes if (a, node) in self.edges)

    def children(self, node: str) -> tuple[str, ...]:
        self._check(node)
        return tuple(b for b in self.nodes if (node, b) in self.edges)

    def in_degree(self, node: str) -> int:
        return len(self.parents(node))

    def topological_order(self) -> tuple[str, ...] | None:
        """Kahn order seeded by node order, or None if the edges cycle."""
        indeg = {n: 0 for n in self.nodes}
        for _, b in self.edges:
            indeg[b] += 1
        ready = [n for n in self.nodes if indeg[n] == 0]
        order: list[str] = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for b in self.nodes:
                if (n, b) in self.edges:
                    indeg[b] -= 1
                    if indeg[b] == 0:
                        ready.append(b)
        if len(order) != len(self.nodes):
            return None
        return tuple(order)

    def ancestral_set(self, targets: Iterable[str]) -> set[str]:
        """Targets plus all their ancestors."""
        out = set(targets)
        for t in out:
            self._check(t)
        stack = list(out)
        while stack:
            n = stack.pop()
            for a, b in self.edges:
                if b == n and a not in out:
                    out.add(a)
                    stack.append(a)
        return out

    def _check(self, node: str) -> None:
        if node not in set(self.nodes):
            raise InputError(f"unknown node {node!r}")


@dataclass(frozen=True)
class Pdag:
    """Partially directed graph: the output shape of the equivalence class."""

    nodes: tuple[str, ...]
    directed: frozenset[Edge]
    undirected: frozenset[tuple[str, str]]

    def __init__(
        self,
        nodes: Iterable[str],
        directed: Iterable[Edge] = (),
        undirected: Iterable[tuple[str, str]] = (),
    ):
        object.__setattr__(self, "nodes", tuple(nodes))
        object.__setattr__(self, "directed", frozenset((a, b) for a, b in directed))
        object.__setattr__(
            self, "undirected", frozenset(_pair(a, b) for a, b in undirected)
        )
        known = set(self.nodes)
        for a, b in list(self.directed) + list(self.undirected):
            if a == b:
                raise InputError(f"self-loop on {a!r}")
            if a not in known or b not in known:
                raise InputError(f"edge ({a!r}, {b!r}) references an unknown node")
        for a, b in self.directed:
            if _pair(a, b) in self.undirected:
                raise InputError(f"edge {a!r}-{b!r} is both directed and undirected")


def cpdag(dag: Dag) -> Pdag:
    """Completed partially directed graph of ``dag``'s equivalence class.

    Skeleton plus collider orientations, closed under the standard orientation
    rules. Directed edges are exactly those shared by every graph that encodes
    the same independence structure; the rest of the skeleton stays undirected.
    """
    adj: dict[str, set[str]] = {n: set() for n in dag.nodes}
    for a, b in dag.edges:
        adj[a].add(b)
        adj[b].add(a)

    directed: set[Edge] = set()
    for z in dag.nodes:
        for x, y in combinations(dag.parents(z), 2):
            if y not in adj[x]:
                directed.add((x, z))
                directed.add((y, z))
    undirected: set[tuple[str, str]] = {
        _pair(a, b) for a, b in dag.edges if (a, b) not in directed
    }

    def orient(a: str, b: str) -> bool:
        p = _pair(a, b)
        if p not in undirected:
            return False
        undirected.discard(p)
        directed.add((a, b))
        return True

    changed = True
    while changed:
        changed = False
        # Rule 1: a -> b - c with a, c non-adjacent orients b -> c.
        for a, b in list(directed):
            for c in sorted(adj[b]):
                if c != a and c not in adj[a] and _pair(b, c) in undirected:
                    changed |= orient(b, c)
        # Rule 2: a -> b -> c with a - c orients a -> c.
        for x, y in [(p, q) for p in dag.nodes for q in dag.nodes if p != q]:
            if _pair(x, y) not in undirected:
                continue
            for m in sorted(adj[x] & adj[y]):
                if (x, m) in directed and (m, y) in directed:
                    changed |= orient(x, y)
                    break
        # Rule 3: a - b with two non-adjacent c, d, both a - c, a - d,
        # c -> b and d -> b, orients a -> b.
        for a in dag.nodes:
            for b in sorted(adj[a]):
                if _pair(a, b) not in undirected:
                    continue
                linked = [
                    c
                    for c in sorted(adj[a])
                    if c != b and _pair(a, c) in undirected and (c, b) in directed
                ]
                for c, d in combinations(linked, 2):
                    if d not in adj[c]:
                        changed |= orient(a, b)
                        break

    # Orientations derived by the rules must agree with the input graph.
    assert all(e in dag.edges for e in directed)
    return Pdag(dag.nodes, directed, undirected)
