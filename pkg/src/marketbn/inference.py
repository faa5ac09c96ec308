"""Exact inference: variable elimination, most probable explanations, sweeps."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError, ZeroProbabilityEvidenceError
from .model import BayesianNetwork
from .scoring import CANONICAL_STATES

log = logging.getLogger(__name__)

PROB_ATOL = 1e-9


class Factor:
    """Dense table over a tuple of named variables."""

    __slots__ = ("vars", "values")

    def __init__(self, variables: tuple[str, ...], values: np.ndarray):
        self.vars = variables
        self.values = np.asarray(values, dtype=float)
        if self.values.ndim != len(variables):
            raise ValueError("factor rank does not match its variable list")

    def _aligned(self, variables: tuple[str, ...]) -> np.ndarray:
        """View of the values broadcastable over ``variables``."""
        have = {v: i for i, v in enumerate(self.vars)}
        order = [have[v] for v in variables if v in have]
        arr = self.values.transpose(order) if order else self.values
        shape = []
        k = 0
        for v in variables:
            if v in have:
                shape.append(arr.shape[k])
                k += 1
            else:
                shape.append(1)
        return arr.reshape(shape)

    def combine(self, other: "Factor", op: Callable) -> "Factor":
        variables = self.vars + tuple(v for v in other.vars if v not in self.vars)
        return Factor(variables, op(self._aligned(variables), other._aligned(variables)))

    def marginalize(self, variable: str, reducer: Callable) -> "Factor":
        axis = self.vars.index(variable)
        rest = self.vars[:axis] + self.vars[axis + 1 :]
        return Factor(rest, reducer(self.values, axis=axis))

    def reduce(self, variable: str, index: int) -> "Factor":
        axis = self.vars.index(variable)
        rest = self.vars[:axis] + self.vars[axis + 1 :]
        return Factor(rest, np.take(self.values, index, axis=axis))


def _cpt_factor(net: BayesianNetwork, node: str, *, logspace: bool = False) -> Factor:
    cpt = net.cpt(node)
    shape = tuple(len(ps) for ps in cpt.parent_states) + (len(cpt.states),)
    values = cpt.table.reshape(shape)
    if logspace:
        with np.errstate(divide="ignore"):
            values = np.log(values)
    return Factor(cpt.parents + (node,), values)


def _reduce_by_evidence(
    factor: Factor, net: BayesianNetwork, evidence: Mapping[str, str]
) -> Factor:
    for var in [v for v in factor.vars if v in evidence]:
        factor = factor.reduce(var, net.states(var).index(evidence[var]))
    return factor


def _elimination_order(scopes: Iterable[set[str]], elim: set[str]) -> list[str]:
    """Greedy min-fill order over the interaction graph; names break ties."""
    neighbors: dict[str, set[str]] = {}
    for scope in scopes:
        for v in scope:
            neighbors.setdefault(v, set()).update(scope - {v})
    order: list[str] = []
    remaining = set(elim)
    while remaining:
        best = None
        best_fill = None
        for v in sorted(remaining):
            around = [u for u in neighbors.get(v, ()) if u != v]
            fill = sum(
                1
                for i, x in enumerate(around)
                for y in around[i + 1 :]
                if y not in neighbors.get(x, ())
            )
            if best_fill is None or fill < best_fill:
                best, best_fill = v, fill
        around = list(neighbors.pop(best, set()))
        for x in around:
            neighbors[x].discard(best)
        for i, x in enumerate(around):
            for y in around[i + 1 :]:
                neighbors[x].add(y)
                neighbors[y].add(x)
        order.append(best)
        remaining.discard(best)
    return order


def _eliminate(
    factors: list[Factor],
    order: Sequence[str],
    combine: Callable,
    reducer: Callable,
) -> list[Factor]:
    live = list(factors)
    for var in order:
        bucket = [f for f in live if var in f.vars]
        if not bucket:
            continue
        live = [f for f in live if var not in f.vars]
        merged = reduce(lambda a, b: a.combine(b, combine), bucket)
        live.append(merged.marginalize(var, reducer))
    return live


def _validate_evidence(net: BayesianNetwork, evidence: Mapping[str, str]) -> None:
    for node, state in evidence.items():
        if node not in set(net.dag.nodes):
            raise InputError(f"unknown evidence node {node!r}")
        if state not in net.states(node):
            raise InputError(f"{state!r} is not a state of {node!r}")


@dataclass(frozen=True, eq=False)
class PosteriorReport:
    """Distribution of one target under fixed evidence."""

    target: str
    states: tuple[str, ...]
    distribution: np.ndarray
    evidence: dict[str, str]

    def __post_init__(self):
        dist = np.asarray(self.distribution, dtype=float)
        object.__setattr__(self, "distribution", dist)
        if dist.shape != (len(self.states),):
            raise InputError("distribution length does not match states")
        if (dist < -PROB_ATOL).any() or abs(dist.sum() - 1.0) > PROB_ATOL:
            raise InputError("distribution is not a probability vector")

    def probability(self, state: str) -> float:
        try:
            return float(self.distribution[self.states.index(state)])
        except ValueError:
            raise InputError(f"{state!r} is not a state of {self.target!r}") from None


@dataclass(frozen=True)
class MpeResult:
    """Most probable joint completion of the non-evidence nodes."""

    assignment: dict[str, str]
    log_probability: float


def posterior(
    net: BayesianNetwork,
    target: str,
    evidence: Mapping[str, str] | None = None,
    *,
    order: Sequence[str] | None = None,
) -> PosteriorReport:
    """Exact conditional distribution of ``target`` given ``evidence``.

    Only the ancestral closure of target and evidence enters the computation;
    downstream nodes cannot influence the result.  An explicit elimination
    ``order`` (over exactly the eliminable variables) overrides min-fill.
    """
    evidence = dict(evidence or {})
    if target not in set(net.dag.nodes):
        raise InputError(f"unknown target {target!r}")
    if target in evidence:
        raise InputError("target cannot carry evidence")
    _validate_evidence(net, evidence)

    keep = net.dag.ancestral_set({target, *evidence})
    factors = [
        _reduce_by_evidence(_cpt_factor(net, n), net, evidence)
        for n in net.dag.nodes
        if n in keep
    ]
    elim = keep - {target} - evidence.keys()
    if order is not None:
        if set(order) != elim or len(order) != len(elim):
            raise InputError("elimination order must cover exactly the free variables")
        elim_order = list(order)
    else:
        elim_order = _elimination_order([set(f.vars) for f in factors], elim)

    remaining = _eliminate(factors, elim_order, np.multiply, np.sum)
    result = reduce(lambda a, b: a.combine(b, np.multiply), remaining)
    values = result._aligned((target,)).reshape(-1)
    z = values.sum()
    if z <= 0.0:
        raise ZeroProbabilityEvidenceError(
            f"evidence {evidence} has probability zero under the model"
        )
    return PosteriorReport(target, net.states(target), values / z, evidence)


def joint_distribution(
    net: BayesianNetwork,
    variables: Sequence[str],
    evidence: Mapping[str, str] | None = None,
) -> np.ndarray:
    """Exact joint over ``variables`` (axes in that order) given evidence."""
    evidence = dict(evidence or {})
    variables = tuple(variables)
    if len(set(variables)) != len(variables):
        raise InputError("joint variables must be distinct")
    for v in variables:
        if v not in set(net.dag.nodes):
            raise InputError(f"unknown node {v!r}")
        if v in evidence:
            raise InputError(f"{v!r} cannot be both queried and observed")
    _validate_evidence(net, evidence)

    keep = net.dag.ancestral_set({*variables, *evidence})
    factors = [
        _reduce_by_evidence(_cpt_factor(net, n), net, evidence)
        for n in net.dag.nodes
        if n in keep
    ]
    elim = keep - set(variables) - evidence.keys()
    order = _elimination_order([set(f.vars) for f in factors], elim)
    remaining = _eliminate(factors, order, np.multiply, np.sum)
    result = reduce(lambda a, b: a.combine(b, np.multiply), remaining)
    values = result._aligned(variables)
    values = np.broadcast_to(
        values, tuple(len(net.states(v)) for v in variables)
    ).copy()
    z = values.sum()
    if z <= 0.0:
        raise ZeroProbabilityEvidenceError(
            f"evidence {evidence} has probability zero under the model"
        )
    return values / z


def _max_log_value(net: BayesianNetwork, fixed: Mapping[str, str]) -> float:
    """Max over free variables of the joint log probability, ``fixed`` clamped."""
    factors = [
        _reduce_by_evidence(_cpt_factor(net, n, logspace=True), net, fixed)
        for n in net.dag.nodes
    ]
    elim = set(net.dag.nodes) - fixed.keys()
    order = _elimination_order([set(f.vars) for f in factors], elim)
    with np.errstate(invalid="ignore"):
        remaining = _eliminate(factors, order, np.add, np.max)
    total = 0.0
    for f in remaining:
        total += float(f.values.reshape(-1)[0]) if f.values.size else 0.0
    return total


def _assignment_log_probability(
    net: BayesianNetwork, assignment: Mapping[str, str]
) -> float:
    """Joint log probability of a complete assignment: sum of CPT entries."""
    total = 0.0
    for node in net.dag.nodes:
        cpt = net.cpt(node)
        row = cpt.row_index(assignment)
        p = cpt.table[row, cpt.states.index(assignment[node])]
        if p <= 0.0:
            return float("-inf")
        total += float(np.log(p))
    return total


def mpe(
    net: BayesianNetwork, evidence: Mapping[str, str] | None = None
) -> MpeResult:
    """Most probable completion of the non-evidence nodes.

    Ties are broken toward earlier states, then earlier nodes, by clamping
    nodes one at a time in declared order and keeping the first state whose
    clamped optimum still attains the global optimum.
    """
    evidence = dict(evidence or {})
    _validate_evidence(net, evidence)
    best = _max_log_value(net, evidence)
    if best == float("-inf"):
        raise ZeroProbabilityEvidenceError(
            f"evidence {evidence} has probability zero under the model"
        )
    tol = 1e-9 * (1.0 + abs(best))
    fixed = dict(evidence)
    assignment: dict[str, str] = {}
    for node in net.dag.nodes:
        if node in fixed:
            continue
        chosen = None
        fallback = (float("-inf"), "")
        for state in net.states(node):
            fixed[node] = state
            value = _max_log_value(net, fixed)
            if value >= best - tol:
                chosen = state
                break
            if value > fallback[0]:
                fallback = (value, state)
        if chosen is None:  # guards accumulated rounding; keeps the best seen
            chosen = fallback[1]
            fixed[node] = chosen
        assignment[node] = chosen
    return MpeResult(assignment, _assignment_log_probability(net, fixed))


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance between two distributions on the same states."""
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


@dataclass(frozen=True, eq=False)
class SweepEntry:
    """One single-evidence row of an evidence sweep."""

    node: str
    state: str
    report: PosteriorReport
    tvd: float


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Baseline posterior plus per-evidence rows sorted by influence."""

    baseline: PosteriorReport
    entries: list[SweepEntry]


def evidence_sweep(
    net: BayesianNetwork,
    target: str,
    *,
    include_neutral: bool = False,
    sweep_states: Sequence[str] | None = None,
) -> SweepResult:
    """Posterior of ``target`` under each single-node evidence assignment.

    Ternary Low/Neutral/High nodes sweep High and Low (Neutral only when
    ``include_neutral``); other nodes sweep every state.  Rows are sorted by
    total variation distance from the no-evidence baseline, descending.
    Evidence states with probability zero are skipped with a log message.
    """
    baseline = posterior(net, target)
    entries: list[SweepEntry] = []
    for node in net.dag.nodes:
        if node == target:
            continue
        if sweep_states is not None:
            states: Sequence[str] = [
                s for s in net.states(node) if s in set(sweep_states)
            ]
        elif set(net.states(node)) == set(CANONICAL_STATES):
            states = ["High", "Low"] if not include_neutral else ["High", "Neutral", "Low"]
        else:
            states = list(net.states(node))
        for state in states:
            try:
                report = posterior(net, target, {node: state})
            except ZeroProbabilityEvidenceError:
                log.debug("sweep skips %s=%s: zero-probability evidence", node, state)
                continue
            entries.append(
                SweepEntry(
                    node=node,
                    state=state,
                    report=report,
                    tvd=total_variation(report.distribution, baseline.distribution),
                )
            )
    entries.sort(key=lambda e: (-e.tvd, e.node, e.state))
    return SweepResult(baseline, entries)
