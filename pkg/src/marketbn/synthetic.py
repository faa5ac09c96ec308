"""Synthetic data generators for demonstrations and end-to-end checks."""

from __future__ import annotations

import datetime as _dt
from typing import IO, Sequence

import numpy as np

from .errors import InputError
from .graph import Dag
from .model import BayesianNetwork, Cpt
from .scoring import CANONICAL_STATES, StateTable


def simulate_garch(
    n: int,
    *,
    omega: float = 0.1,
    alphas: Sequence[float] = (0.1,),
    betas: Sequence[float] = (0.8,),
    ar: Sequence[float] = (),
    intercept: float = 0.0,
    seed: int = 0,
    burn: int = 500,
) -> np.ndarray:
    """Simulate an AR mean with GARCH innovations.

    Returns ``n`` observations after discarding ``burn`` warm-up draws.
    """
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    ar = np.asarray(ar, dtype=float)
    if omega <= 0 or (alphas < 0).any() or (betas < 0).any():
        raise InputError("variance parameters out of range")
    if alphas.sum() + betas.sum() >= 1.0:
        raise InputError("persistence must stay below one")
    rng = np.random.default_rng(seed)
    p, q, lag = alphas.size, betas.size, ar.size
    total = n + burn
    vbar = omega / (1.0 - alphas.sum() - betas.sum())
    eps2 = np.full(p, vbar)
    s2_hist = np.full(q, vbar)
    y_hist = np.zeros(lag)
    eps_out = np.empty(total)
    y_out = np.empty(total)
    z = rng.standard_normal(total)
    for t in range(total):
        s2 = omega
        if p:
            s2 += float(alphas @ eps2)
        if q:
            s2 += float(betas @ s2_hist)
        e = z[t] * np.sqrt(s2)
        y = intercept + (float(ar @ y_hist) if lag else 0.0) + e
        if p:
            eps2 = np.roll(eps2, 1)
            eps2[0] = e * e
        if q:
            s2_hist = np.roll(s2_hist, 1)
            s2_hist[0] = s2
        if lag:
            y_hist = np.roll(y_hist, 1)
            y_hist[0] = y
        eps_out[t] = e
        y_out[t] = y
    return y_out[burn:]


def random_network(
    n_nodes: int,
    *,
    seed: int = 0,
    max_parents: int = 3,
    states: Sequence[str] = CANONICAL_STATES,
    edge_prob: float = 0.4,
    concentration: float = 1.0,
) -> BayesianNetwork:
    """Draw a random DAG over ``V0..Vk`` with Dirichlet CPT rows."""
    if n_nodes < 1:
        raise InputError("need at least one node")
    rng = np.random.default_rng(seed)
    nodes = tuple(f"V{i}" for i in range(n_nodes))
    edges = set()
    # edges only point from lower to higher index, so the graph is acyclic
    for j in range(1, n_nodes):
        candidates = list(range(j))
        rng.shuffle(candidates)
        picked = [i for i in candidates if rng.random() < edge_prob][:max_parents]
        edges.update((nodes[i], nodes[j]) for i in picked)
    dag = Dag(nodes, frozenset(edges))
    r = len(states)
    cpts = {}
    for node in nodes:
        parents = dag.parents(node)
        q = r ** len(parents)
        table = rng.dirichlet([concentration] * r, size=q)
        cpts[node] = Cpt(
            node=node,
            states=tuple(states),
            parents=parents,
            parent_states=tuple(tuple(states) for _ in parents),
            table=table,
        )
    return BayesianNetwork(dag=dag, cpts=cpts, metadata={"seed": seed})


def sample_network(
    net: BayesianNetwork, n: int, *, seed: int = 0
) -> StateTable:
    """Ancestral sampling from a discrete network into a state table."""
    if n < 1:
        raise InputError("need at least one sample")
    order = net.dag.topological_order()
    assert order is not None
    rng = np.random.default_rng(seed)
    codes = {node: np.empty(n, dtype=np.int64) for node in net.dag.nodes}
    for node in order:
        cpt = net.cpt(node)
        if not cpt.parents:
            probs = np.tile(cpt.table[0], (n, 1))
        else:
            idx = np.zeros(n, dtype=np.int64)
            for p, ps in zip(cpt.parents, cpt.parent_states):
                idx = idx * len(ps) + codes[p]
            probs = cpt.table[idx]
        u = rng.random((n, 1))
        codes[node] = (probs.cumsum(axis=1) < u).sum(axis=1).astype(np.int64)
    columns = {
        node: np.asarray([net.states(node)[c] for c in codes[node]], dtype=object)
        for node in net.dag.nodes
    }
    return StateTable.from_columns(
        columns, states={node: net.states(node) for node in net.dag.nodes}
    )


def write_price_csv(
    out: IO[str] | str,
    columns: dict[str, np.ndarray],
    *,
    start: str = "2015-01-01",
    initial_price: float = 100.0,
) -> None:
    """Write a dated price CSV whose log returns equal ``columns``.

    Dates are consecutive weekdays starting at ``start``.
    """
    names = list(columns)
    if not names:
        raise InputError("no columns to write")
    n = len(next(iter(columns.values())))
    for name, values in columns.items():
        if len(values) != n:
            raise InputError(f"column {name!r} has a different length")
    day = _dt.date.fromisoformat(start)
    dates = []
    while len(dates) < n + 1:
        if day.weekday() < 5:
            dates.append(day.isoformat())
        day += _dt.timedelta(days=1)
    prices = {
        name: initial_price * np.exp(np.concatenate([[0.0], np.cumsum(values)]))
        for name, values in columns.items()
    }
    lines = ["date," + ",".join(names)]
    for i, d in enumerate(dates):
        row = ",".join(f"{prices[name][i]:.10f}" for name in names)
        lines.append(f"{d},{row}")
    text = "\n".join(lines) + "\n"
    if isinstance(out, str):
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
