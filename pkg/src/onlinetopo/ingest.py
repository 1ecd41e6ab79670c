"""CSV ingestion: resample irregular series onto a common grid and normalize.

Two layouts are accepted:

* long: columns ``timestamp, series, value`` (one observation per row);
* wide: a timestamp column plus one column per series, blanks allowed.

Timestamps may be numbers (seconds) or anything ``pandas.to_datetime``
parses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .model import TimeSeriesMatrix

__all__ = [
    "IngestError",
    "NonMonotoneTimestampsError",
    "EmptySpanError",
    "ZeroVarianceError",
    "IngestedSeries",
    "resample_and_normalize",
    "ingest_csv",
]


class IngestError(ValueError):
    """Base class for ingestion failures."""


class NonMonotoneTimestampsError(IngestError):
    pass


class EmptySpanError(IngestError):
    pass


class ZeroVarianceError(IngestError):
    pass


@dataclass
class IngestedSeries:
    series: TimeSeriesMatrix
    names: list
    sampling_interval: float
    grid: np.ndarray  # seconds, same origin as the input timestamps
    mean: np.ndarray
    std: np.ndarray
    source: dict = field(default_factory=dict)


def _to_seconds(col: pd.Series) -> np.ndarray:
    if pd.api.types.is_numeric_dtype(col):
        return col.to_numpy(dtype=float)
    ts = pd.to_datetime(col)
    return (ts - pd.Timestamp(0, tz=ts.dt.tz)).dt.total_seconds().to_numpy()


def resample_and_normalize(observations: dict, sampling_interval: float,
                           normalize: bool = True):
    """Resample ``{name: (times, values)}`` onto one uniform grid.

    The grid starts at the latest series start and stops at or before the
    earliest series end, so nothing is extrapolated. Returns
    (names, grid, matrix, mean, std); std uses ddof=1.
    """
    if sampling_interval <= 0:
        raise ValueError("sampling_interval must be positive")
    names = list(observations)
    if not names:
        raise IngestError("no series selected")
    for name in names:
        t, _ = observations[name]
        if len(t) < 2:
            raise IngestError(f"series {name!r} has fewer than 2 samples")
        if np.any(np.diff(t) <= 0):
            raise NonMonotoneTimestampsError(f"timestamps of {name!r} are not strictly increasing")
    start = max(observations[k][0][0] for k in names)
    stop = min(observations[k][0][-1] for k in names)
    if stop <= start:
        raise EmptySpanError(f"series time spans do not overlap ({start} >= {stop})")
    count = int(np.floor((stop - start) / sampling_interval * (1 + 1e-12))) + 1
    grid = start + sampling_interval * np.arange(count)
    grid = grid[grid <= stop]
    cols = [np.interp(grid, *observations[k]) for k in names]
    y = np.column_stack(cols)
    mean = y.mean(axis=0)
    std = y.std(axis=0, ddof=1) if y.shape[0] > 1 else np.zeros(y.shape[1])
    if normalize:
        flat = [n for n, s in zip(names, std) if not s > 0]
        if flat:
            raise ZeroVarianceError(f"cannot normalize constant series: {flat}")
        y = (y - mean) / std
    return names, grid, y, mean, std


def ingest_csv(path, sampling_interval: float, columns=None, timestamp_col: str = "timestamp",
               normalize: bool = True) -> IngestedSeries:
    """Read, resample (linear interpolation) and normalize a CSV file."""
    path = Path(path)
    df = pd.read_csv(path)
    if timestamp_col not in df.columns:
        raise IngestError(f"{path}: missing timestamp column {timestamp_col!r}")
    t_all = _to_seconds(df[timestamp_col])
    obs = {}
    if {"series", "value"} <= set(df.columns):
        names = columns or list(dict.fromkeys(df["series"].astype(str)))
        keys = df["series"].astype(str).to_numpy()
        for name in names:
            sel = keys == str(name)
            if not sel.any():
                raise IngestError(f"{path}: no rows for series {name!r}")
            obs[str(name)] = (t_all[sel], df["value"].to_numpy(dtype=float)[sel])
        layout = "long"
    else:
        names = columns or [c for c in df.columns if c != timestamp_col]
        for name in names:
            if name not in df.columns:
                raise IngestError(f"{path}: no column {name!r}")
            v = pd.to_numeric(df[name], errors="coerce").to_numpy(dtype=float)
            keep = np.isfinite(v)
            obs[str(name)] = (t_all[keep], v[keep])
        layout = "wide"
    names, grid, y, mean, std = resample_and_normalize(obs, sampling_interval, normalize)
    meta = {"path": str(path), "layout": layout, "sampling_interval": sampling_interval,
            "names": names}
    return IngestedSeries(TimeSeriesMatrix(y, meta=meta), names, float(sampling_interval),
                          grid, mean, std, meta)
