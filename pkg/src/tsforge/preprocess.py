"""Series repair: interval aggregation, symmetric k-NN imputation,
monotonic normalization, and IQR outlier repair.

The intended composition order is aggregate -> impute -> normalize ->
repair outliers.  Every operation is pure: inputs are never mutated and
results depend only on the arguments.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Callable, ClassVar

import numpy as np

from .core import (
    DateInterval,
    EmptyInputError,
    InsufficientDataError,
    NoDataError,
    Transformer,
    TSFrame,
)

__all__ = [
    "AggregatorConfig",
    "ImputerConfig",
    "OutlierConfig",
    "SeriesKind",
    "aggregate",
    "impute_knn",
    "detect_series_kind",
    "normalize_monotonic",
    "remove_outliers",
    "Aggregator",
    "KnnImputer",
    "MonotonicNormalizer",
    "OutlierCleaner",
]


@dataclass(frozen=True)
class AggregatorConfig:
    interval: DateInterval = DateInterval("hour", 1)
    aggfn: Callable[[np.ndarray], float] = np.median


@dataclass(frozen=True)
class ImputerConfig:
    interval: DateInterval = DateInterval("hour", 1)
    k: int = 1
    max_passes: int = 10
    aggfn: Callable[[np.ndarray], float] = np.median

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")


@dataclass(frozen=True)
class OutlierConfig:
    interval: DateInterval = DateInterval("hour", 1)
    fence_multiplier: float = 1.5

    def __post_init__(self):
        if self.fence_multiplier <= 0:
            raise ValueError("fence_multiplier must be > 0")


class SeriesKind(enum.Enum):
    PLAIN = "plain"
    STRICTLY_MONOTONIC = "strictly-monotonic"
    DAILY_MONOTONIC = "daily-monotonic"


def aggregate(ts: TSFrame, cfg: AggregatorConfig = AggregatorConfig()) -> TSFrame:
    """Bucket a series onto its interval grid and complete the date range.

    Each timestamp is floored to the enclosing interval boundary; the
    non-missing values of a bucket are reduced with ``cfg.aggfn`` (median
    by default).  The result covers every boundary from the first to the
    last observed bucket, so grid slots with no source rows come out as
    missing rows, and timestamps are strictly increasing with constant
    spacing.
    """
    if len(ts) == 0:
        raise EmptyInputError("cannot aggregate an empty series")
    step = cfg.interval.seconds
    secs = ts.timestamps.astype(np.int64)
    floored = secs // step * step
    start = int(floored[0])
    grid = np.arange(start, int(floored[-1]) + step, step, dtype=np.int64)
    out = np.full(grid.size, np.nan, dtype=np.float64)
    bucket = (floored - start) // step
    cuts = np.flatnonzero(np.diff(bucket)) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts, [bucket.size]))
    for s, e in zip(starts, ends):
        vals = ts.values[s:e]
        vals = vals[~np.isnan(vals)]
        if vals.size:
            out[bucket[s]] = float(cfg.aggfn(vals))
    return TSFrame(grid.astype("datetime64[s]"), out)


def impute_knn(ts: TSFrame, cfg: ImputerConfig = ImputerConfig()) -> TSFrame:
    """Fill missing values from up to ``k`` non-missing neighbors per side.

    One pass scans the missing indices in increasing order against a
    snapshot taken at the start of the pass: the candidate set for index
    ``i`` is the non-missing snapshot values at ``i-k .. i-1`` and
    ``i+1 .. i+k``, reduced with ``cfg.aggfn`` when nonempty.  Passes
    repeat on the updated series until nothing is missing or
    ``cfg.max_passes`` is reached; leftovers are flagged in the result's
    ``meta`` rather than raised.
    """
    values = ts.values.copy()
    if values.size and np.isnan(values).all():
        raise NoDataError("series has no non-missing values to impute from")
    k = cfg.k
    meta = dict(ts.meta)
    meta.pop("impute_unconverged", None)
    for _ in range(cfg.max_passes):
        missing = np.flatnonzero(np.isnan(values))
        if missing.size == 0:
            break
        snapshot = values.copy()
        for i in missing:
            lo = max(0, i - k)
            neighbors = np.concatenate((snapshot[lo:i], snapshot[i + 1 : i + 1 + k]))
            neighbors = neighbors[~np.isnan(neighbors)]
            if neighbors.size:
                values[i] = float(cfg.aggfn(neighbors))
    remaining = int(np.isnan(values).sum())
    if remaining:
        meta["impute_unconverged"] = remaining
    return ts.with_values(values, meta)


def detect_series_kind(ts: TSFrame, nonneg_threshold: float = 0.90) -> SeriesKind:
    """Classify a repaired series as plain, strictly-, or daily-monotonic.

    Strictly monotonic: at least ``nonneg_threshold`` of the first
    differences are non-negative, the last value exceeds the first, and
    no difference across a calendar-day boundary is negative.  Daily
    monotonic: the within-day differences clear the same threshold, the
    median per-day rise (last minus first value of the day) is positive,
    and the series failed the strict test.  Everything else is plain.
    """
    present = ~np.isnan(ts.values)
    if int(present.sum()) < 3:
        raise InsufficientDataError("need at least 3 non-missing points to classify")
    v = ts.values[present]
    days = ts.timestamps[present].astype("datetime64[D]")
    diffs = np.diff(v)
    crosses_day = days[1:] != days[:-1]
    nonneg = diffs >= 0
    if (
        nonneg.mean() >= nonneg_threshold
        and v[-1] > v[0]
        and not (~nonneg & crosses_day).any()
    ):
        return SeriesKind.STRICTLY_MONOTONIC
    within = ~crosses_day
    if within.any():
        day_starts = np.concatenate(([0], np.flatnonzero(crosses_day) + 1))
        day_ends = np.concatenate((np.flatnonzero(crosses_day), [v.size - 1]))
        day_rises = v[day_ends] - v[day_starts]
        if nonneg[within].mean() >= nonneg_threshold and np.median(day_rises) > 0:
            return SeriesKind.DAILY_MONOTONIC
    return SeriesKind.PLAIN


def normalize_monotonic(ts: TSFrame, kind: SeriesKind | None = None) -> TSFrame:
    """Difference monotonic series so levels become rates.

    Plain series pass through unchanged.  Strictly monotonic series are
    replaced by their first difference with a missing first slot; daily
    monotonic series are differenced within each calendar day, leaving
    each day's first slot missing.  Negative differences survive: they
    are exactly the glitches the outlier step repairs.
    """
    if kind is None:
        kind = detect_series_kind(ts)
    if kind is SeriesKind.PLAIN:
        return ts.copy()
    v = ts.values
    out = np.full(v.size, np.nan, dtype=np.float64)
    if kind is SeriesKind.STRICTLY_MONOTONIC:
        out[1:] = v[1:] - v[:-1]
    else:
        days = ts.timestamps.astype("datetime64[D]")
        same_day = days[1:] == days[:-1]
        idx = np.flatnonzero(same_day) + 1
        out[idx] = v[idx] - v[idx - 1]
    return ts.with_values(out)


def remove_outliers(ts: TSFrame, cfg: OutlierConfig = OutlierConfig()) -> TSFrame:
    """Replace values outside the Tukey fences by k=1 neighbor imputation.

    Fences are ``[Q1 - m*IQR, Q3 + m*IQR]`` with quartiles computed by
    linear interpolation of order statistics over the non-missing values.
    Flagged positions are marked missing and refilled with
    :func:`impute_knn`; every unflagged position (missing ones included)
    is returned bit-for-bit unchanged.
    """
    v = ts.values
    present = ~np.isnan(v)
    if int(present.sum()) < 4:
        raise InsufficientDataError("need at least 4 non-missing values for quartiles")
    q1, q3 = np.quantile(v[present], [0.25, 0.75])
    iqr = q3 - q1
    lo = q1 - cfg.fence_multiplier * iqr
    hi = q3 + cfg.fence_multiplier * iqr
    flagged = present.copy()
    flagged[present] = (v[present] < lo) | (v[present] > hi)
    if not flagged.any():
        return ts.copy()
    work = v.copy()
    work[flagged] = np.nan
    refilled = impute_knn(
        ts.with_values(work), ImputerConfig(interval=cfg.interval, k=1)
    )
    out = v.copy()
    out[flagged] = refilled.values[flagged]
    return ts.with_values(out)


# ---------------------------------------------------------------------------
# Pipeline filters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Aggregator(Transformer):
    stateless: ClassVar[bool] = True
    interval: DateInterval = DateInterval("hour", 1)
    aggfn: Callable[[np.ndarray], float] = np.median
    state: Any = None

    def _transform(self, data: TSFrame) -> TSFrame:
        return aggregate(data, AggregatorConfig(self.interval, self.aggfn))


@dataclass(frozen=True)
class KnnImputer(Transformer):
    stateless: ClassVar[bool] = True
    interval: DateInterval = DateInterval("hour", 1)
    k: int = 1
    max_passes: int = 10
    aggfn: Callable[[np.ndarray], float] = np.median
    state: Any = None

    def _transform(self, data: TSFrame) -> TSFrame:
        return impute_knn(
            data, ImputerConfig(self.interval, self.k, self.max_passes, self.aggfn)
        )


@dataclass(frozen=True)
class MonotonicNormalizer(Transformer):
    stateless: ClassVar[bool] = True
    nonneg_threshold: float = 0.90
    state: Any = None

    def _transform(self, data: TSFrame) -> TSFrame:
        kind = detect_series_kind(data, self.nonneg_threshold)
        return normalize_monotonic(data, kind)


@dataclass(frozen=True)
class OutlierCleaner(Transformer):
    stateless: ClassVar[bool] = True
    interval: DateInterval = DateInterval("hour", 1)
    fence_multiplier: float = 1.5
    state: Any = None

    def _transform(self, data: TSFrame) -> TSFrame:
        return remove_outliers(data, OutlierConfig(self.interval, self.fence_multiplier))
