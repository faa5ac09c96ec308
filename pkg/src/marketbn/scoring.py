"""Categorical data encoding, family counting, and Dirichlet-uniform scoring."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import InputError
from .graph import Dag

CANONICAL_STATES = ("Low", "Neutral", "High")


@dataclass(frozen=True)
class BDeuConfig:
    """Scoring configuration; the prior weight is spread uniformly over cells."""

    equivalent_sample_size: float = 10.0

    def __post_init__(self):
        if not self.equivalent_sample_size > 0:
            raise InputError("equivalent_sample_size must be positive")


class StateTable:
    """Integer-encoded categorical dataset with declared state spaces.

    Cardinalities come from the declared state lists, never from the values
    actually observed, so resamples that miss a state keep the same shape.
    """

    __slots__ = ("columns", "states", "codes", "_col_index", "_config_cache")

    def __init__(
        self,
        columns: Sequence[str],
        states: Mapping[str, Sequence[str]],
        codes: np.ndarray,
    ):
        self.columns = tuple(columns)
        self.states = {c: tuple(states[c]) for c in self.columns}
        codes = np.ascontiguousarray(codes, dtype=np.int16)
        if codes.ndim != 2 or codes.shape[1] != len(self.columns):
            raise InputError("codes must be (n_rows, n_columns)")
        for j, c in enumerate(self.columns):
            card = len(self.states[c])
            if card < 2:
                raise InputError(f"column {c!r} needs at least two states")
            col = codes[:, j]
            if col.size and (col.min() < 0 or col.max() >= card):
                raise InputError(f"column {c!r} has codes outside its state space")
        self.codes = codes
        self._col_index = {c: i for i, c in enumerate(self.columns)}
        self._config_cache: dict[tuple[str, ...], tuple[np.ndarray, int]] = {}

    @classmethod
    def from_columns(
        cls,
        values: Mapping[str, Sequence[str]],
        states: Mapping[str, Sequence[str]] | None = None,
    ) -> "StateTable":
        """Encode label columns. Unlisted state spaces default to the canonical
        Low/Neutral/High when the labels fit it, else to sorted unique labels."""
        names = tuple(values)
        declared: dict[str, tuple[str, ...]] = {}
        for c in names:
            if states is not None and c in states:
                declared[c] = tuple(states[c])
            else:
                uniq = set(values[c])
                if uniq <= set(CANONICAL_STATES):
                    declared[c] = CANONICAL_STATES
                else:
                    declared[c] = tuple(sorted(uniq))
        n = len(next(iter(values.values()))) if names else 0
        codes = np.empty((n, len(names)), dtype=np.int16)
        for j, c in enumerate(names):
            lookup = {s: i for i, s in enumerate(declared[c])}
            if len(values[c]) != n:
                raise InputError(f"column {c!r} has a different length")
            try:
                codes[:, j] = [lookup[v] for v in values[c]]
            except KeyError as exc:
                raise InputError(
                    f"column {c!r} contains a label outside its state space: {exc}"
                ) from None
        return cls(names, declared, codes)

    @property
    def n_rows(self) -> int:
        return self.codes.shape[0]

    def card(self, name: str) -> int:
        return len(self.states[name])

    def column_codes(self, name: str) -> np.ndarray:
        try:
            return self.codes[:, self._col_index[name]]
        except KeyError:
            raise InputError(f"unknown column {name!r}") from None

    def resample(self, rows: np.ndarray) -> "StateTable":
        """New table with the given row indices (bootstrap draw)."""
        return StateTable(self.columns, self.states, self.codes[np.asarray(rows)])

    def config_index(self, parents: tuple[str, ...]) -> tuple[np.ndarray, int]:
        """Row-major parent-configuration index per row; last parent fastest."""
        if parents in self._config_cache:
            return self._config_cache[parents]
        idx = np.zeros(self.n_rows, dtype=np.int64)
        q = 1
        for p in parents:
            idx = idx * self.card(p) + self.column_codes(p)
            q *= self.card(p)
        self._config_cache[parents] = (idx, q)
        return idx, q


def as_state_table(data) -> StateTable:
    """Accept a StateTable or anything exposing ``as_table()``."""
    if isinstance(data, StateTable):
        return data
    if hasattr(data, "as_table"):
        return data.as_table()
    raise InputError(f"cannot interpret {type(data).__name__} as categorical data")


@dataclass(frozen=True)
class FamilyCounts:
    """Contingency counts of one node against its parent configurations."""

    node: str
    parents: tuple[str, ...]
    states: tuple[str, ...]
    parent_states: tuple[tuple[str, ...], ...]
    counts: np.ndarray    # (configs, states) int64
    marginals: np.ndarray  # (configs,) row sums

    def __post_init__(self):
        if self.counts.shape != (len(self.marginals), len(self.states)):
            raise InputError("counts shape does not match states/marginals")
        if (self.counts < 0).any():
            raise InputError("negative counts")


def count_families(data, node: str, parents: Iterable[str] = ()) -> FamilyCounts:
    """Count node states per parent configuration (row-major config order)."""
    table = as_state_table(data)
    parents = tuple(parents)
    for name in (node, *parents):
        if name not in table.states:
            raise InputError(f"unknown column {name!r}")
    if node in parents:
        raise InputError(f"{node!r} cannot be its own parent")
    idx, q = table.config_index(parents)
    r = table.card(node)
    flat = np.bincount(idx * r + table.column_codes(node), minlength=q * r)
    counts = flat.reshape(q, r).astype(np.int64)
    return FamilyCounts(
        node=node,
        parents=parents,
        states=table.states[node],
        parent_states=tuple(table.states[p] for p in parents),
        counts=counts,
        marginals=counts.sum(axis=1),
    )


def bdeu_family_score(counts: FamilyCounts, config: BDeuConfig | None = None) -> float:
    """Log marginal likelihood of one family under the uniform Dirichlet prior.

    With q parent configurations, r child states and equivalent sample size
    N', each configuration carries prior weight N'/q and each cell N'/(r*q).
    A family with zero observations scores exactly 0.
    """
    config = config or BDeuConfig()
    q, r = counts.counts.shape
    ess = config.equivalent_sample_size
    a_row = ess / q
    a_cell = ess / (q * r)
    score = q * gammaln(a_row) - gammaln(counts.marginals + a_row).sum()
    score += gammaln(counts.counts + a_cell).sum() - q * r * gammaln(a_cell)
    return float(score)


def bdeu_score(dag: Dag, data, config: BDeuConfig | None = None) -> float:
    """Network score: sum of family scores plus a uniform (zero) structure prior."""
    table = as_state_table(data)
    config = config or BDeuConfig()
    missing = [n for n in dag.nodes if n not in table.states]
    if missing:
        raise InputError(f"data lacks columns for nodes {missing}")
    return sum(
        bdeu_family_score(count_families(table, n, dag.parents(n)), config)
        for n in dag.nodes
    )


class FamilyScoreCache:
    """Memo for family scores on one dataset; shared by the search loop."""

    def __init__(self, table: StateTable, config: BDeuConfig):
        self.table = table
        self.config = config
        self._scores: dict[tuple[str, frozenset[str]], float] = {}

    def family(self, node: str, parents: frozenset[str]) -> float:
        key = (node, parents)
        got = self._scores.get(key)
        if got is None:
            ordered = tuple(c for c in self.table.columns if c in parents)
            got = bdeu_family_score(
                count_families(self.table, node, ordered), self.config
            )
            self._scores[key] = got
        return got
