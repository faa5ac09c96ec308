"""Influence metrics: mutual information, variance shares, arc diameters, tornado."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import InputError
from .graph import Edge
from .inference import joint_distribution, posterior
from .model import BayesianNetwork


def mutual_information(net: BayesianNetwork, target: str, other: str) -> float:
    """Mutual information (natural log) of two nodes under the exact joint."""
    if target == other:
        raise InputError("mutual information needs two distinct nodes")
    joint = joint_distribution(net, (target, other))
    pt = joint.sum(axis=1, keepdims=True)
    po = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    ratio = joint[mask] / (pt * po)[mask]
    mi = float((joint[mask] * np.log(ratio)).sum())
    return max(mi, 0.0)


def sobol_index(net: BayesianNetwork, target: str, source: str) -> float:
    """First-order variance share of ``source`` on ``target``.

    The target is embedded as one indicator per state; explained and total
    variance are summed across indicators before dividing.
    """
    if target == source:
        raise InputError("a variance share needs two distinct nodes")
    joint = joint_distribution(net, (source, target))  # (source, target)
    p_source = joint.sum(axis=1)
    p_target = joint.sum(axis=0)
    denom = float((p_target * (1.0 - p_target)).sum())
    if denom <= 0.0:
        raise InputError(f"target {target!r} has zero variance")
    num = 0.0
    for i in range(joint.shape[0]):
        if p_source[i] <= 0.0:
            continue
        cond = joint[i] / p_source[i]
        num += float(p_source[i] * ((cond - p_target) ** 2).sum())
    return min(max(num / denom, 0.0), 1.0)


def arc_diameter(net: BayesianNetwork, edge: Edge, *, whole_row: bool = False) -> float:
    """Largest total variation between child rows that differ in the parent.

    For each configuration of the co-parents, every pair of parent states is
    compared; ``whole_row`` instead compares all row pairs regardless of
    which parent changed.
    """
    parent, child = edge
    if (parent, child) not in net.dag.edges:
        raise InputError(f"({parent!r}, {child!r}) is not an edge of the graph")
    cpt = net.cpt(child)
    table = cpt.table
    if whole_row:
        best = 0.0
        for i, j in combinations(range(table.shape[0]), 2):
            best = max(best, 0.5 * float(np.abs(table[i] - table[j]).sum()))
        return best
    axis = cpt.parents.index(parent)
    cards = tuple(len(ps) for ps in cpt.parent_states)
    r = len(cpt.states)
    cube = table.reshape(cards + (r,))
    moved = np.moveaxis(cube, axis, 0)  # (parent states, co-parent configs..., r)
    flat = moved.reshape(cards[axis], -1, r)
    best = 0.0
    for i, j in combinations(range(cards[axis]), 2):
        best = max(best, 0.5 * float(np.abs(flat[i] - flat[j]).sum(axis=-1).max()))
    return best


@dataclass(frozen=True)
class TornadoEntry:
    """Sensitivity of one output probability to one CPT entry."""

    node: str
    parent_config: tuple[str, ...]
    state: str
    baseline_output: float
    sensitivity_value: float
    direction: int
    one_sided: bool


def _covary_row(row: np.ndarray, index: int, value: float) -> np.ndarray:
    """Set one entry and rescale the rest proportionally (equal split when
    the rest of the row has zero mass)."""
    out = np.empty_like(row)
    rest = 1.0 - row[index]
    if rest > 0.0:
        out[:] = row * ((1.0 - value) / rest)
    else:
        out[:] = (1.0 - value) / (len(row) - 1)
    out[index] = value
    return out


def tornado(
    net: BayesianNetwork,
    target: str,
    target_state: str,
    top_k: int,
    *,
    delta: float = 0.05,
) -> list[TornadoEntry]:
    """Rank CPT entries by the central-difference slope of one output.

    Each entry is nudged to ``theta +/- delta`` (step shrunk symmetrically at
    the simplex boundary) with proportional covariation of its row, and the
    marginal probability of ``target_state`` is recomputed exactly. Entries
    at a degenerate value (0 or 1) fall back to a one-sided difference and
    are flagged. Returns the ``top_k`` largest absolute slopes.
    """
    if top_k < 1:
        raise InputError("top_k must be at least 1")
    if not 0.0 < delta < 1.0:
        raise InputError("delta must sit strictly between 0 and 1")
    if target_state not in net.states(target):
        raise InputError(f"{target_state!r} is not a state of {target!r}")
    baseline = posterior(net, target).probability(target_state)
    relevant = net.dag.ancestral_set({target})

    def output_with(node: str, row: int, col: int, value: float) -> float:
        cpt = net.cpt(node)
        table = cpt.table.copy()
        table[row] = _covary_row(table[row], col, value)
        return posterior(net.replace_cpt(node, table), target).probability(
            target_state
        )

    entries: list[tuple[tuple, TornadoEntry]] = []
    for node in net.dag.nodes:
        cpt = net.cpt(node)
        for row in range(cpt.n_configs):
            config = cpt.config_states(row)
            for col, state in enumerate(cpt.states):
                if node not in relevant:
                    # Off the target's ancestral closure the marginal cannot move.
                    value, one_sided = 0.0, False
                else:
                    theta = float(cpt.table[row, col])
                    step = min(delta, theta, 1.0 - theta)
                    if step > 0.0:
                        hi = output_with(node, row, col, theta + step)
                        lo = output_with(node, row, col, theta - step)
                        value, one_sided = (hi - lo) / (2.0 * step), False
                    elif theta == 0.0:
                        hi = output_with(node, row, col, min(delta, 1.0))
                        value, one_sided = (hi - baseline) / min(delta, 1.0), True
                    else:  # theta == 1.0
                        lo = output_with(node, row, col, 1.0 - min(delta, 1.0))
                        value, one_sided = (baseline - lo) / min(delta, 1.0), True
                entry = TornadoEntry(
                    node=node,
                    parent_config=config,
                    state=state,
                    baseline_output=baseline,
                    sensitivity_value=float(value),
                    direction=int(np.sign(value)),
                    one_sided=one_sided,
                )
                entries.append(((-abs(value), node, row, col), entry))
    entries.sort(key=lambda pair: pair[0])
    return [e for _, e in entries[:top_k]]


@dataclass(frozen=True, eq=False)
class SensitivityReport:
    """All per-node and per-edge influence metrics for one target."""

    target: str
    mutual_information: dict[str, float]
    sobol: dict[str, float]
    diameter: dict[Edge, float]
    ranks: dict[str, dict]


def _competition_ranks(values: dict) -> dict:
    """Descending competition ranks; ties share the smaller rank."""
    ranked = {}
    vals = list(values.values())
    for key, v in values.items():
        ranked[key] = 1 + sum(1 for w in vals if w > v)
    return ranked


def sensitivity_report(net: BayesianNetwork, target: str) -> SensitivityReport:
    """Mutual information and variance share per node, diameter per edge."""
    if target not in set(net.dag.nodes):
        raise InputError(f"unknown target {target!r}")
    others = [n for n in net.dag.nodes if n != target]
    mi = {n: mutual_information(net, target, n) for n in others}
    sob = {n: sobol_index(net, target, n) for n in others}
    dia = {e: arc_diameter(net, e) for e in sorted(net.dag.edges)}
    ranks = {
        "mutual_information": _competition_ranks(mi),
        "sobol": _competition_ranks(sob),
        "diameter": _competition_ranks(dia),
    }
    return SensitivityReport(target, mi, sob, dia, ranks)
