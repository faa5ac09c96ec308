"""Network container, maximum-likelihood parameter fitting, JSON round trip."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import InputError
from .graph import Dag
from .scoring import as_state_table, count_families

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Cpt:
    """Conditional probability table of one node.

    Rows are indexed by parent configuration in row-major order over the
    ordered parent list (last parent varies fastest); columns follow the
    node's state order.
    """

    node: str
    states: tuple[str, ...]
    parents: tuple[str, ...]
    parent_states: tuple[tuple[str, ...], ...]
    table: np.ndarray  # (configs, states) float

    def __post_init__(self):
        table = np.ascontiguousarray(self.table, dtype=float)
        object.__setattr__(self, "table", table)
        q = 1
        for ps in self.parent_states:
            q *= len(ps)
        if table.shape != (q, len(self.states)):
            raise InputError(
                f"CPT for {self.node!r} must be ({q}, {len(self.states)}), "
                f"got {table.shape}"
            )
        if (table < 0).any():
            raise InputError(f"CPT for {self.node!r} has negative entries")
        bad = np.abs(table.sum(axis=1) - 1.0) > ROW_SUM_TOL
        if bad.any():
            raise InputError(
                f"CPT rows for {self.node!r} do not sum to one "
                f"(first bad config {int(np.argmax(bad))})"
            )

    @property
    def n_configs(self) -> int:
        return self.table.shape[0]

    def row_index(self, assignment: Mapping[str, str]) -> int:
        """Row of the parent configuration named in ``assignment``."""
        idx = 0
        for p, ps in zip(self.parents, self.parent_states):
            try:
                code = ps.index(assignment[p])
            except KeyError:
                raise InputError(f"assignment misses parent {p!r}") from None
            except ValueError:
                raise InputError(
                    f"{assignment[p]!r} is not a state of {p!r}"
                ) from None
            idx = idx * len(ps) + code
        return idx

    def config_states(self, row: int) -> tuple[str, ...]:
        """Parent state names of configuration ``row`` (inverse of row_index)."""
        out = []
        for ps in reversed(self.parent_states):
            row, code = divmod(row, len(ps))
            out.append(ps[code])
        return tuple(reversed(out))


@dataclass(frozen=True, eq=False)
class BayesianNetwork:
    """Directed graphical model with one CPT per node."""

    dag: Dag
    cpts: dict[str, Cpt]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if set(self.cpts) != set(self.dag.nodes):
            raise InputError("CPTs must cover exactly the graph's nodes")
        for n in self.dag.nodes:
            cpt = self.cpts[n]
            if cpt.node != n:
                raise InputError(f"CPT under key {n!r} describes {cpt.node!r}")
            if cpt.parents != self.dag.parents(n):
                raise InputError(
                    f"CPT parents for {n!r} disagree with the graph: "
                    f"{cpt.parents} vs {self.dag.parents(n)}"
                )

    def states(self, node: str) -> tuple[str, ...]:
        return self.cpt(node).states

    def parents(self, node: str) -> tuple[str, ...]:
        return self.dag.parents(node)

    def cpt(self, node: str) -> Cpt:
        try:
            return self.cpts[node]
        except KeyError:
            raise InputError(f"unknown node {node!r}") from None

    def replace_cpt(self, node: str, table: np.ndarray) -> "BayesianNetwork":
        """Copy of the network with one CPT's table swapped out."""
        old = self.cpt(node)
        cpts = dict(self.cpts)
        cpts[node] = Cpt(old.node, old.states, old.parents, old.parent_states, table)
        return BayesianNetwork(self.dag, cpts, self.metadata)


def fit_mle(dag: Dag, data, metadata: dict | None = None) -> BayesianNetwork:
    """Maximum-likelihood CPTs: cell count over configuration total.

    A parent configuration that never occurs gets a uniform row.
    """
    table = as_state_table(data)
    cpts: dict[str, Cpt] = {}
    for node in dag.nodes:
        parents = dag.parents(node)
        fc = count_families(table, node, parents)
        counts = fc.counts.astype(float)
        totals = fc.marginals.astype(float)
        r = counts.shape[1]
        rows = np.empty_like(counts)
        seen = totals > 0
        rows[seen] = counts[seen] / totals[seen, None]
        rows[~seen] = 1.0 / r
        cpts[node] = Cpt(node, fc.states, parents, fc.parent_states, rows)
    return BayesianNetwork(dag, cpts, dict(metadata or {}))


def network_to_dict(net: BayesianNetwork) -> dict:
    """JSON-ready form: nodes with states, sorted edge list, CPT rows, metadata."""
    return {
        "nodes": [
            {"name": n, "states": list(net.states(n))} for n in net.dag.nodes
        ],
        "edges": [list(e) for e in sorted(net.dag.edges)],
        "cpts": {
            n: {
                "parents": list(net.cpt(n).parents),
                "rows": net.cpt(n).table.tolist(),
            }
            for n in net.dag.nodes
        },
        "metadata": dict(net.metadata),
    }


def network_from_dict(payload: Mapping) -> BayesianNetwork:
    """Inverse of :func:`network_to_dict`, with full validation."""
    try:
        node_entries = list(payload["nodes"])
        edges = [tuple(e) for e in payload["edges"]]
        cpt_entries = dict(payload["cpts"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"model payload misses required key: {exc}") from None
    names = [e["name"] for e in node_entries]
    states = {e["name"]: tuple(e["states"]) for e in node_entries}
    dag = Dag(names, edges)
    cpts: dict[str, Cpt] = {}
    for n in names:
        if n not in cpt_entries:
            raise InputError(f"model payload lacks a CPT for {n!r}")
        entry = cpt_entries[n]
        parents = tuple(entry["parents"])
        if parents != dag.parents(n):
            raise InputError(
                f"CPT parents for {n!r} disagree with the edge list"
            )
        cpts[n] = Cpt(
            node=n,
            states=states[n],
            parents=parents,
            parent_states=tuple(states[p] for p in parents),
            table=np.asarray(entry["rows"], dtype=float),
        )
    return BayesianNetwork(dag, cpts, dict(payload.get("metadata", {})))


def save_network(net: BayesianNetwork, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(network_to_dict(net), indent=2, sort_keys=True) + "\n"
    )


def load_network(path: str | Path) -> BayesianNetwork:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read model file {path}: {exc}") from None
    return network_from_dict(payload)
