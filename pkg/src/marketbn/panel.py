"""Daily panel loading, imputation, and log-return transformation."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import InputError

PANEL_KINDS = ("prices", "log_returns", "residuals")


@dataclass(frozen=True, eq=False)
class TimePanel:
    """Rectangular panel of daily series sharing one date index."""

    dates: tuple[date, ...]
    columns: dict[str, np.ndarray]
    kind: str

    def __post_init__(self):
        if self.kind not in PANEL_KINDS:
            raise InputError(f"unknown panel kind {self.kind!r}")
        n = len(self.dates)
        for i in range(1, n):
            if self.dates[i] <= self.dates[i - 1]:
                raise InputError(f"dates are not strictly increasing at row {i + 1}")
        cols = {}
        for name, values in self.columns.items():
            arr = np.asarray(values, dtype=float)
            if arr.shape != (n,):
                raise InputError(
                    f"column {name!r} has length {arr.shape}, expected {n}"
                )
            if not np.isfinite(arr).all():
                raise InputError(f"column {name!r} contains non-finite values")
            cols[name] = arr
        object.__setattr__(self, "columns", cols)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.dates)


def forward_fill(values: Sequence[float | None]) -> list[float | None]:
    """Carry the last seen value forward; leading gaps stay None."""
    out: list[float | None] = []
    last: float | None = None
    for v in values:
        if v is not None:
            last = v
        out.append(last)
    return out


def _open_text(source) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, "r", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data)
    raise InputError(f"cannot read CSV from {type(source).__name__}")


def load_panel(source, columns: Iterable[str] | None = None) -> TimePanel:
    """Read a date-indexed CSV of daily prices.

    The first column holds ISO dates; the rest are numeric or empty. Empty
    cells are forward-filled, and rows before the latest first observation
    across the kept columns are dropped so the panel comes out rectangular.
    Errors name the offending row and column.
    """
    with _open_text(source) as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError("CSV has no header row") from None
        if len(header) < 2:
            raise InputError("CSV needs a date column plus at least one series")
        names = [h.strip() for h in header[1:]]
        if len(set(names)) != len(names):
            raise InputError("duplicate column names in header")
        if columns is not None:
            wanted = list(columns)
            missing = [c for c in wanted if c not in names]
            if missing:
                raise InputError(f"requested columns not in CSV: {missing}")
        else:
            wanted = names
        keep_idx = [names.index(c) for c in wanted]

        dates: list[date] = []
        raw: list[list[float | None]] = [[] for _ in wanted]
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(
                    f"row {row_no}: expected {len(header)} cells, got {len(row)}"
                )
            try:
                d = date.fromisoformat(row[0].strip())
            except ValueError:
                raise InputError(
                    f"row {row_no}: cannot parse date {row[0]!r}"
                ) from None
            if dates and d <= dates[-1]:
                kind = "duplicate" if d == dates[-1] else "non-monotone"
                raise InputError(f"row {row_no}: {kind} date {d.isoformat()}")
            dates.append(d)
            for k, idx in enumerate(keep_idx):
                cell = row[1 + idx].strip()
                if not cell:
                    raw[k].append(None)
                    continue
                try:
                    raw[k].append(float(cell))
                except ValueError:
                    raise InputError(
                        f"row {row_no}, column {wanted[k]!r}: "
                        f"cannot parse value {cell!r}"
                    ) from None

    if not dates:
        raise InputError("CSV has no data rows")
    filled = [forward_fill(series) for series in raw]
    start = 0
    for k, series in enumerate(filled):
        first = next((i for i, v in enumerate(series) if v is not None), None)
        if first is None:
            raise InputError(f"column {wanted[k]!r} has no observations")
        start = max(start, first)
    if len(dates) - start < 2:
        raise InputError("fewer than two rows remain after alignment")
    cols = {
        name: np.asarray(series[start:], dtype=float)
        for name, series in zip(wanted, filled)
    }
    return TimePanel(tuple(dates[start:]), cols, "prices")


def to_log_returns(panel: TimePanel) -> TimePanel:
    """Log price relatives day over day; output is one row shorter."""
    if panel.kind != "prices":
        raise InputError(f"log returns need a price panel, got {panel.kind!r}")
    cols = {}
    for name, values in panel.columns.items():
        bad = np.nonzero(values <= 0.0)[0]
        if bad.size:
            i = int(bad[0])
            raise InputError(
                f"column {name!r} has a non-positive price on "
                f"{panel.dates[i].isoformat()}"
            )
        cols[name] = np.diff(np.log(values))
    return TimePanel(panel.dates[1:], cols, "log_returns")
