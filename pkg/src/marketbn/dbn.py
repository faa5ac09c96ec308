"""Two-time-slice transition layer and next-day shock queries."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .discretize import DiscretePanel
from .errors import InputError
from .graph import Dag
from .inference import PosteriorReport, posterior
from .model import BayesianNetwork, Cpt, network_from_dict, network_to_dict
from .scoring import BDeuConfig, count_families
from .search import EdgeFrequencies, SearchControls, bootstrap_consensus, tabu_search

NEXT = "@T+1"


def next_name(node: str) -> str:
    return node + NEXT


def base_name(node: str) -> str:
    return node[: -len(NEXT)] if node.endswith(NEXT) else node


def build_lagged_panel(panel: DiscretePanel) -> DiscretePanel:
    """Pair each day's states with the following day's.

    Row t holds every column at day t plus a suffixed copy at day t+1, so a
    panel of n days becomes n-1 paired rows dated by the earlier day.
    """
    if panel.n_rows < 2:
        raise InputError("need at least two rows to build day pairs")
    columns: dict[str, np.ndarray] = {}
    thresholds: dict[str, tuple[float, float]] = {}
    for name in panel.names:
        codes = panel.columns[name]
        columns[name] = codes[:-1]
        columns[next_name(name)] = codes[1:]
        thresholds[name] = panel.thresholds[name]
        thresholds[next_name(name)] = panel.thresholds[name]
    return DiscretePanel(panel.dates[:-1], columns, thresholds, panel.states)


@dataclass(frozen=True, eq=False)
class TwoSliceNetwork:
    """Static network for one day plus a learned layer into the next day.

    ``transition_parents`` and ``transition_cpts`` are keyed by the suffixed
    next-day name; parent lists contain current-day names only.
    """

    static_net: BayesianNetwork
    transition_parents: dict[str, tuple[str, ...]]
    transition_cpts: dict[str, Cpt]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = {next_name(n) for n in self.static_net.dag.nodes}
        if set(self.transition_parents) != expected:
            raise InputError("transition layer must cover every next-day node")
        if set(self.transition_cpts) != expected:
            raise InputError("transition CPTs must cover every next-day node")
        base = set(self.static_net.dag.nodes)
        for child, parents in self.transition_parents.items():
            if not set(parents) <= base:
                raise InputError(
                    f"transition parents of {child!r} must be current-day nodes"
                )
            if self.transition_cpts[child].parents != tuple(parents):
                raise InputError(f"CPT parents for {child!r} disagree")

    @property
    def transition_edges(self) -> frozenset[tuple[str, str]]:
        return frozenset(
            (p, child)
            for child, parents in self.transition_parents.items()
            for p in parents
        )


def _mle_rows(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    rows = np.empty(counts.shape, dtype=float)
    seen = totals > 0
    rows[seen] = counts[seen] / totals[seen, None]
    rows[~seen] = 1.0 / counts.shape[1]
    return rows


def learn_transitions(
    panel: DiscretePanel,
    static_net: BayesianNetwork,
    *,
    resamples: int = 200,
    threshold: float = 0.5,
    config: BDeuConfig | None = None,
    controls: SearchControls | None = None,
    seed: int = 0,
    single_run: bool = False,
) -> TwoSliceNetwork:
    """Learn which current-day nodes drive each next-day node.

    The search runs on the paired panel with every current-day edge fixed to
    the static structure and candidates limited to current-day -> next-day
    arcs, so the static slice cannot change. Transition tables are then fit
    by maximum likelihood on the paired rows. ``single_run`` skips the
    bootstrap and keeps one search's result.
    """
    nodes = static_net.dag.nodes
    if set(panel.names) != set(nodes):
        raise InputError("panel columns must match the static network's nodes")
    for n in nodes:
        if tuple(panel.states) != static_net.states(n):
            raise InputError(f"panel states disagree with node {n!r}")

    lagged = build_lagged_panel(panel)
    table = lagged.as_table()
    fixed = tuple(sorted(static_net.dag.edges))
    candidates = set(fixed)
    candidates.update((u, next_name(v)) for u in nodes for v in nodes)

    frequencies: EdgeFrequencies | None = None
    if single_run:
        dag = tabu_search(
            table,
            config,
            controls,
            candidate_edges=candidates,
            fixed_edges=fixed,
        )
    else:
        dag, frequencies = bootstrap_consensus(
            table,
            resamples,
            threshold,
            config=config,
            controls=controls,
            seed=seed,
            candidate_edges=candidates,
            fixed_edges=fixed,
        )

    # structural fixity: the current-day slice comes through untouched
    static_part = frozenset(
        e for e in dag.edges if not e[1].endswith(NEXT)
    )
    if static_part != static_net.dag.edges:
        raise AssertionError("current-day structure changed during learning")

    transition_parents: dict[str, tuple[str, ...]] = {}
    transition_cpts: dict[str, Cpt] = {}
    for node in nodes:
        child = next_name(node)
        parents = dag.parents(child)
        fc = count_families(table, child, parents)
        rows = _mle_rows(fc.counts.astype(float), fc.marginals.astype(float))
        transition_parents[child] = parents
        transition_cpts[child] = Cpt(
            node=child,
            states=fc.states,
            parents=parents,
            parent_states=fc.parent_states,
            table=rows,
        )

    metadata = {
        "seed": seed,
        "resamples": 0 if single_run else resamples,
        "threshold": threshold,
        "ess": (config or BDeuConfig()).equivalent_sample_size,
    }
    if frequencies is not None:
        metadata["transition_frequencies"] = {
            f"{a}->{b}": frequencies.directed.get((a, b), 0.0)
            for a, b in sorted(
                e for e in dag.edges if e[1].endswith(NEXT)
            )
        }
    return TwoSliceNetwork(
        static_net=static_net,
        transition_parents=transition_parents,
        transition_cpts=transition_cpts,
        metadata=metadata,
    )


def unroll(tsn: TwoSliceNetwork) -> BayesianNetwork:
    """Flatten both slices into one network for exact inference."""
    static = tsn.static_net
    nodes = list(static.dag.nodes) + [next_name(n) for n in static.dag.nodes]
    edges = set(static.dag.edges) | set(tsn.transition_edges)
    dag = Dag(nodes, edges)
    cpts = dict(static.cpts)
    cpts.update(tsn.transition_cpts)
    return BayesianNetwork(dag=dag, cpts=cpts, metadata=dict(tsn.metadata))


def temporal_query(
    tsn: TwoSliceNetwork,
    evidence: Mapping[str, str],
    target: str,
) -> tuple[PosteriorReport, PosteriorReport]:
    """Target distribution today and tomorrow given evidence set today.

    The today report is computed on the static network alone, so it is
    identical to a plain posterior query; the tomorrow report runs on the
    unrolled two-slice network.
    """
    base_nodes = set(tsn.static_net.dag.nodes)
    if target not in base_nodes:
        raise InputError(f"unknown target {target!r}")
    for node in evidence:
        if node not in base_nodes:
            raise InputError(f"evidence names unknown node {node!r}")
    at_t = posterior(tsn.static_net, target, evidence)
    at_t1 = posterior(unroll(tsn), next_name(target), evidence)
    return at_t, at_t1


def two_slice_to_dict(tsn: TwoSliceNetwork) -> dict:
    """Static model schema plus a ``transitions`` block."""
    payload = network_to_dict(tsn.static_net)
    payload["metadata"] = dict(tsn.metadata)
    payload["transitions"] = {
        base_name(child): {
            "parents_at_T": list(parents),
            "rows": tsn.transition_cpts[child].table.tolist(),
        }
        for child, parents in tsn.transition_parents.items()
    }
    return payload


def two_slice_from_dict(payload: Mapping) -> TwoSliceNetwork:
    body = dict(payload)
    try:
        transitions = dict(body.pop("transitions"))
    except KeyError:
        raise InputError("payload lacks a transitions block") from None
    static = network_from_dict(body)
    transition_parents: dict[str, tuple[str, ...]] = {}
    transition_cpts: dict[str, Cpt] = {}
    for node in static.dag.nodes:
        if node not in transitions:
            raise InputError(f"transitions block lacks node {node!r}")
        entry = transitions[node]
        parents = tuple(entry["parents_at_T"])
        child = next_name(node)
        transition_parents[child] = parents
        transition_cpts[child] = Cpt(
            node=child,
            states=static.states(node),
            parents=parents,
            parent_states=tuple(static.states(p) for p in parents),
            table=np.asarray(entry["rows"], dtype=float),
        )
    return TwoSliceNetwork(
        static_net=static,
        transition_parents=transition_parents,
        transition_cpts=transition_cpts,
        metadata=dict(body.get("metadata", {})),
    )


def save_two_slice(tsn: TwoSliceNetwork, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(two_slice_to_dict(tsn), indent=2, sort_keys=True) + "\n"
    )


def load_two_slice(path: str | Path) -> TwoSliceNetwork:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read model file {path}: {exc}") from None
    return two_slice_from_dict(payload)
