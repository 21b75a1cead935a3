"""Feature extraction: series statistics (including stats over the
lengths of contiguous missing blocks), sliding-window matrices, calendar
features, and the fitted tabular conditioners (one-hot encoding,
column-median imputation, standardization)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, ClassVar

import numpy as np

from .core import (
    FeatureTable,
    InsufficientDataError,
    NoDataError,
    SchemaError,
    Transformer,
    TSFrame,
)

__all__ = [
    "StatVector",
    "WindowConfig",
    "VALUE_STAT_NAMES",
    "BLOCK_STAT_NAMES",
    "missing_blocks",
    "statify",
    "matrify",
    "dateify",
    "StatFeatures",
    "SlidingWindow",
    "DateFeatures",
    "OneHotEncoder",
    "ColumnImputer",
    "StandardScaler",
]

VALUE_STAT_NAMES = (
    "count",
    "mean",
    "std",
    "min",
    "q25",
    "median",
    "q75",
    "max",
    "skewness",
    "kurtosis",
    "ac1",
)

BLOCK_STAT_NAMES = ("bcount", "bmean", "bmin", "bq25", "bmedian", "bq75", "bmax")


@dataclass(frozen=True)
class StatVector:
    """Fixed summary of a series: 11 value stats over the non-missing
    values plus 7 block stats over the lengths of contiguous missing
    runs.  With an empty block set, ``bcount`` is 0 and the remaining
    block stats are NaN (the stats of an empty set).  When
    ``processmissing`` is false the block stats are omitted from the
    serialized record entirely."""

    count: float
    mean: float
    std: float
    min: float
    q25: float
    median: float
    q75: float
    max: float
    skewness: float
    kurtosis: float
    ac1: float
    bcount: float = np.nan
    bmean: float = np.nan
    bmin: float = np.nan
    bq25: float = np.nan
    bmedian: float = np.nan
    bq75: float = np.nan
    bmax: float = np.nan
    processmissing: bool = True

    def names(self) -> tuple[str, ...]:
        return VALUE_STAT_NAMES + (BLOCK_STAT_NAMES if self.processmissing else ())

    def to_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in self.names()}

    def to_row(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in self.names()], dtype=np.float64)


@dataclass(frozen=True)
class WindowConfig:
    size: int = 7
    stride: int = 1
    ahead: int = 1

    def __post_init__(self):
        if self.size < 1 or self.stride < 1 or self.ahead < 1:
            raise ValueError("size, stride, and ahead must all be >= 1")


def missing_blocks(ts: TSFrame) -> np.ndarray:
    """Lengths of the maximal runs of missing values, in order."""
    miss = np.isnan(ts.values)
    if not miss.any():
        return np.array([], dtype=np.int64)
    padded = np.concatenate(([False], miss, [False]))
    edges = np.diff(padded.astype(np.int8))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return (ends - starts).astype(np.int64)


def _skewness(v: np.ndarray) -> float:
    # biased moment estimator; NaN on zero variance
    m = v.mean()
    m2 = ((v - m) ** 2).mean()
    if m2 == 0:
        return float("nan")
    m3 = ((v - m) ** 3).mean()
    return float(m3 / m2**1.5)


def _excess_kurtosis(v: np.ndarray) -> float:
    m = v.mean()
    m2 = ((v - m) ** 2).mean()
    if m2 == 0:
        return float("nan")
    m4 = ((v - m) ** 4).mean()
    return float(m4 / m2**2 - 3.0)


def _lag1_autocorrelation(v: np.ndarray) -> float:
    if v.size < 3:
        return float("nan")
    a, b = v[:-1], v[1:]
    sa, sb = a.std(), b.std()
    if sa == 0 or sb == 0:
        return float("nan")
    return float(((a - a.mean()) * (b - b.mean())).mean() / (sa * sb))


def statify(
    ts: TSFrame, processmissing: bool = True, block_lengths: np.ndarray | None = None
) -> StatVector:
    """Summarize a series as a :class:`StatVector`.

    Value stats are computed over the non-missing subsequence (sample
    standard deviation; type-7 interpolated quantiles; biased moment
    skewness and excess kurtosis, NaN at zero variance; lag-1 Pearson
    autocorrelation).  Block stats summarize ``block_lengths``, which
    defaults to :func:`missing_blocks` of the input itself; pass the
    block lengths of an earlier processing stage to keep the missing
    signal of a series that has since been imputed.
    """
    v = ts.values[~np.isnan(ts.values)]
    if v.size < 2:
        raise InsufficientDataError("need at least 2 non-missing values for stats")
    q25, q50, q75 = np.quantile(v, [0.25, 0.5, 0.75])
    stats = {
        "count": float(v.size),
        "mean": float(v.mean()),
        "std": float(v.std(ddof=1)),
        "min": float(v.min()),
        "q25": float(q25),
        "median": float(q50),
        "q75": float(q75),
        "max": float(v.max()),
        "skewness": _skewness(v),
        "kurtosis": _excess_kurtosis(v),
        "ac1": _lag1_autocorrelation(v),
    }
    if processmissing:
        blocks = (
            missing_blocks(ts)
            if block_lengths is None
            else np.asarray(block_lengths, dtype=np.float64)
        )
        if blocks.size:
            bq25, bq50, bq75 = np.quantile(blocks, [0.25, 0.5, 0.75])
            stats.update(
                bcount=float(blocks.size),
                bmean=float(np.mean(blocks)),
                bmin=float(np.min(blocks)),
                bq25=float(bq25),
                bmedian=float(bq50),
                bq75=float(bq75),
                bmax=float(np.max(blocks)),
            )
        else:
            stats["bcount"] = 0.0
    return StatVector(**stats, processmissing=processmissing)


def matrify(ts: TSFrame, cfg: WindowConfig = WindowConfig()) -> FeatureTable:
    """Slide a window over the values to build a prediction matrix.

    Row ``j`` (0-based) starts at offset ``j*stride`` and holds the next
    ``size`` values as columns ``v1..vsize``; its target (final column)
    is the value ``ahead`` steps after the window's last element.  The
    row count is ``(n - size - ahead)//stride + 1``.
    """
    v = ts.values
    n = v.size
    if n < cfg.size + cfg.ahead:
        raise InsufficientDataError(
            f"need at least size+ahead={cfg.size + cfg.ahead} values, got {n}"
        )
    n_rows = (n - cfg.size - cfg.ahead) // cfg.stride + 1
    offsets = np.arange(n_rows) * cfg.stride
    windows = v[offsets[:, None] + np.arange(cfg.size)[None, :]]
    targets = v[offsets + cfg.size + cfg.ahead - 1]
    names = [f"v{i + 1}" for i in range(cfg.size)] + ["target"]
    cols = [windows[:, i] for i in range(cfg.size)] + [targets]
    return FeatureTable(names, cols)


_DATE_FEATURE_NAMES = (
    "year",
    "month",
    "day",
    "hour",
    "minute",
    "dayofweek",
    "dayofyear",
    "weekofyear",
)


def dateify(ts: TSFrame) -> FeatureTable:
    """Calendar components per row (dayofweek: Monday=1..Sunday=7;
    weekofyear: ISO week number)."""
    rows = np.empty((len(ts), len(_DATE_FEATURE_NAMES)), dtype=np.float64)
    for i, t64 in enumerate(ts.timestamps):
        t = t64.item()
        rows[i] = (
            t.year,
            t.month,
            t.day,
            t.hour,
            t.minute,
            t.isoweekday(),
            t.timetuple().tm_yday,
            t.isocalendar()[1],
        )
    return FeatureTable(
        list(_DATE_FEATURE_NAMES), [rows[:, j] for j in range(rows.shape[1])]
    )


# ---------------------------------------------------------------------------
# Series filters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StatFeatures(Transformer):
    """Filter form of :func:`statify`: emits a one-row FeatureTable."""

    stateless: ClassVar[bool] = True
    processmissing: bool = True
    state: Any = None

    def _transform(self, data: TSFrame) -> FeatureTable:
        sv = statify(data, self.processmissing)
        row = sv.to_row()
        return FeatureTable(list(sv.names()), [row[j : j + 1] for j in range(row.size)])


@dataclass(frozen=True)
class SlidingWindow(Transformer):
    stateless: ClassVar[bool] = True
    size: int = 7
    stride: int = 1
    ahead: int = 1
    state: Any = None

    def _transform(self, data: TSFrame) -> FeatureTable:
        return matrify(data, WindowConfig(self.size, self.stride, self.ahead))


@dataclass(frozen=True)
class DateFeatures(Transformer):
    stateless: ClassVar[bool] = True
    state: Any = None

    def _transform(self, data: TSFrame) -> FeatureTable:
        return dateify(data)


# ---------------------------------------------------------------------------
# Tabular conditioners
# ---------------------------------------------------------------------------


def _coerce_table(data) -> tuple[FeatureTable, bool]:
    """Accept a FeatureTable or a bare 1-D/2-D array; report which."""
    if isinstance(data, FeatureTable):
        return data, False
    arr = np.asarray(data, dtype=np.float64)
    return FeatureTable.from_matrix(arr), True


def _check_names(fitted_names: list[str], table: FeatureTable, who: str) -> None:
    if list(table.feature_names) != list(fitted_names):
        raise SchemaError(
            f"{who}: columns {table.feature_names} differ from fit-time {fitted_names}"
        )


def _rebuild(table: FeatureTable, names: list[str], cols: list[np.ndarray]) -> FeatureTable:
    if table.has_labels:
        names = names + [table.names[-1]]
        cols = cols + [table.columns[-1].copy()]
    return FeatureTable(names, cols, has_labels=table.has_labels)


@dataclass(frozen=True)
class OneHotEncoder(Transformer):
    """Expand each categorical column into one 0/1 column per fit-time
    category (named ``col=category``); a category unseen at fit time
    encodes as all zeros.  Numeric columns pass through unchanged."""

    state: Any = None

    def _fit(self, data, labels):
        table, _ = _coerce_table(data)
        categories = {}
        for name, col in zip(table.feature_names, table.feature_columns()):
            if col.dtype == object:
                categories[name] = sorted({str(x) for x in col})
        return {"names": list(table.feature_names), "categories": categories}

    def _transform(self, data):
        table, was_array = _coerce_table(data)
        _check_names(self.state["names"], table, "OneHotEncoder")
        names: list[str] = []
        cols: list[np.ndarray] = []
        for name, col in zip(table.feature_names, table.feature_columns()):
            cats = self.state["categories"].get(name)
            if cats is None:
                names.append(name)
                cols.append(col.copy())
            else:
                text = np.array([str(x) for x in col], dtype=object)
                for cat in cats:
                    names.append(f"{name}={cat}")
                    cols.append((text == cat).astype(np.float64))
        out = _rebuild(table, names, cols)
        return out.to_matrix() if was_array else out


@dataclass(frozen=True)
class ColumnImputer(Transformer):
    """Replace missing numeric entries by the fit-time column median."""

    state: Any = None

    def _fit(self, data, labels):
        table, _ = _coerce_table(data)
        medians = {}
        for name, col in zip(table.feature_names, table.feature_columns()):
            if col.dtype == object:
                continue
            present = col[~np.isnan(col)]
            if present.size == 0:
                raise NoDataError(f"column {name!r} is entirely missing at fit time")
            medians[name] = float(np.median(present))
        return {"names": list(table.feature_names), "medians": medians}

    def _transform(self, data):
        table, was_array = _coerce_table(data)
        _check_names(self.state["names"], table, "ColumnImputer")
        cols = []
        for name, col in zip(table.feature_names, table.feature_columns()):
            if col.dtype == object:
                cols.append(col.copy())
            else:
                filled = col.copy()
                filled[np.isnan(filled)] = self.state["medians"][name]
                cols.append(filled)
        out = _rebuild(table, list(table.feature_names), cols)
        return out.to_matrix() if was_array else out


@dataclass(frozen=True)
class StandardScaler(Transformer):
    """Standardize numeric columns to (x - mean) / std using the
    fit-time mean and sample std; a constant column maps to all zeros."""

    state: Any = None

    def _fit(self, data, labels):
        table, _ = _coerce_table(data)
        mean = {}
        std = {}
        for name, col in zip(table.feature_names, table.feature_columns()):
            if col.dtype == object:
                continue
            mean[name] = float(col.mean())
            std[name] = float(col.std(ddof=1)) if col.size > 1 else 0.0
        return {"names": list(table.feature_names), "mean": mean, "std": std}

    def _transform(self, data):
        table, was_array = _coerce_table(data)
        _check_names(self.state["names"], table, "StandardScaler")
        cols = []
        for name, col in zip(table.feature_names, table.feature_columns()):
            if col.dtype == object:
                cols.append(col.copy())
            else:
                s = self.state["std"][name]
                if s == 0:
                    cols.append(np.zeros_like(col))
                else:
                    cols.append((col - self.state["mean"][name]) / s)
        out = _rebuild(table, list(table.feature_names), cols)
        return out.to_matrix() if was_array else out
