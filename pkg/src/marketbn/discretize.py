"""Tertile binning of continuous panels into Low/Neutral/High state series."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import InputError
from .panel import TimePanel
from .scoring import CANONICAL_STATES, StateTable

STATES = CANONICAL_STATES


@dataclass(frozen=True, eq=False)
class DiscretePanel:
    """Date-indexed panel of ternary state codes with the cut points used."""

    dates: tuple[date, ...]
    columns: dict[str, np.ndarray]  # int8 codes into `states`
    thresholds: dict[str, tuple[float, float]]
    states: tuple[str, ...] = STATES

    def __post_init__(self):
        n = len(self.dates)
        cols = {}
        for name, codes in self.columns.items():
            arr = np.asarray(codes, dtype=np.int8)
            if arr.shape != (n,):
                raise InputError(f"column {name!r} length mismatch")
            if arr.size and (arr.min() < 0 or arr.max() >= len(self.states)):
                raise InputError(f"column {name!r} has out-of-range state codes")
            cols[name] = arr
        object.__setattr__(self, "columns", cols)
        if set(self.thresholds) != set(self.columns):
            raise InputError("thresholds must cover exactly the panel columns")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.dates)

    def state_series(self, name: str) -> list[str]:
        try:
            codes = self.columns[name]
        except KeyError:
            raise InputError(f"unknown column {name!r}") from None
        return [self.states[c] for c in codes]

    def as_table(self) -> StateTable:
        codes = np.column_stack([self.columns[n] for n in self.names])
        return StateTable(self.names, {n: self.states for n in self.names}, codes)

    def to_dict(self) -> dict:
        return {
            "dates": [d.isoformat() for d in self.dates],
            "states": list(self.states),
            "columns": {n: self.state_series(n) for n in self.names},
            "thresholds": {n: list(self.thresholds[n]) for n in self.names},
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "DiscretePanel":
        try:
            states = tuple(payload["states"])
            dates = tuple(date.fromisoformat(d) for d in payload["dates"])
            columns = dict(payload["columns"])
            thresholds = {
                n: (float(lo), float(hi))
                for n, (lo, hi) in payload["thresholds"].items()
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad panel payload: {exc}") from None
        lookup = {s: i for i, s in enumerate(states)}
        cols = {}
        for name, labels in columns.items():
            try:
                cols[name] = np.asarray([lookup[s] for s in labels], dtype=np.int8)
            except KeyError as exc:
                raise InputError(
                    f"column {name!r} holds a label outside the state list: {exc}"
                ) from None
        return cls(dates, cols, thresholds, states)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        )

    @classmethod
    def load(cls, path: str | Path) -> "DiscretePanel":
        try:
            payload = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read panel file {path}: {exc}") from None
        return cls.from_dict(payload)


def discretize(panel: TimePanel) -> DiscretePanel:
    """Bin each series into empirical tertiles.

    Cut points are the 1/3 and 2/3 quantiles (linear interpolation), chosen
    so each state's count lands within one observation of n/3 on distinct
    data. A value exactly equal to a cut point goes to the lower bin, which
    also makes the binning invariant under strictly increasing transforms.
    """
    if panel.kind not in ("log_returns", "residuals"):
        raise InputError(
            f"discretization expects returns or residuals, got {panel.kind!r}"
        )
    columns: dict[str, np.ndarray] = {}
    thresholds: dict[str, tuple[float, float]] = {}
    for name, values in panel.columns.items():
        if np.all(values == values[0]):
            raise InputError(
                f"column {name!r} is constant; tertile cut points are undefined"
            )
        lo = float(np.quantile(values, 1.0 / 3.0))
        hi = float(np.quantile(values, 2.0 / 3.0))
        codes = np.where(values <= lo, 0, np.where(values <= hi, 1, 2))
        columns[name] = codes.astype(np.int8)
        thresholds[name] = (lo, hi)
    return DiscretePanel(panel.dates, columns, thresholds)
