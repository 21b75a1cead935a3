"""Shared data model and the fit/transform abstraction.

Everything that flows through a pipeline is either a :class:`TSFrame`
(an ordered timestamp/value series) or a :class:`FeatureTable` (named
columns, optionally with a trailing label column).  Processing units are
:class:`Transformer` subclasses of two kinds: *filters* reshape data and
may be stateless, *learners* map feature rows to labels and must be
trained first.  Fitting never mutates: ``fit`` returns a new fitted
copy, so fitted objects can be shared freely across worker threads.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, ClassVar, Iterable, Sequence

import numpy as np

__all__ = [
    "TSError",
    "EmptyInputError",
    "NoDataError",
    "InsufficientDataError",
    "MissingLabelsError",
    "NotFittedError",
    "SchemaError",
    "DegenerateLabelsError",
    "ParseError",
    "FormatError",
    "UnlabeledFileError",
    "UnsortedSeriesError",
    "PipelineStageError",
    "DateInterval",
    "TSFrame",
    "FeatureTable",
    "Transformer",
    "Identity",
    "Pipeline",
    "mix_seed",
]


class TSError(Exception):
    """Base class for all domain errors raised by this package."""


class EmptyInputError(TSError):
    """An operation received an input with no rows."""


class NoDataError(TSError):
    """No usable data remained after filtering (e.g. all values missing)."""


class InsufficientDataError(TSError):
    """Too few data points for the requested statistic or split."""


class MissingLabelsError(TSError):
    """A learner was fitted or scored without labels."""


class NotFittedError(TSError):
    """transform was called on an unfitted, stateful transformer."""


class SchemaError(TSError):
    """Column schema at transform time differs from the fit-time schema."""


class DegenerateLabelsError(TSError):
    """Training labels contain fewer than two distinct classes."""


class ParseError(TSError):
    """A text field could not be parsed; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class FormatError(TSError):
    """A persisted artifact has a bad magic, version, or structure."""


class UnlabeledFileError(TSError):
    """A filename yields an empty label after stripping digits/extension."""


class UnsortedSeriesError(TSError):
    """Series timestamps are not non-decreasing."""


class PipelineStageError(TSError):
    """Wraps an error raised inside a pipeline stage with its index."""

    def __init__(self, stage_index: int, stage: Any, cause: Exception):
        super().__init__(f"stage {stage_index} ({type(stage).__name__}): {cause}")
        self.stage_index = stage_index


# ---------------------------------------------------------------------------
# Seed mixing
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def mix_seed(seed: int, index: int) -> int:
    """Derive a stream seed from (seed, index) via the splitmix64 finalizer.

    All randomness in the package flows from explicit config seeds through
    this mixer; no global RNG state is ever consulted.
    """
    z = (seed + 0x9E3779B97F4A7C15 * (index + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


# ---------------------------------------------------------------------------
# Time primitives
# ---------------------------------------------------------------------------

_INTERVAL_SECONDS = {"minute": 60, "hour": 3600, "day": 86400}
_INTERVAL_RE = re.compile(r"^(\d+)\s*(m|h|d)$")
_INTERVAL_UNIT = {"m": "minute", "h": "hour", "d": "day"}


@dataclass(frozen=True)
class DateInterval:
    """A positive whole number of minutes, hours, or days."""

    unit: str = "hour"
    count: int = 1

    def __post_init__(self):
        if self.unit not in _INTERVAL_SECONDS:
            raise ValueError(f"unknown interval unit {self.unit!r}")
        if self.count < 1:
            raise ValueError("interval count must be >= 1")

    @property
    def seconds(self) -> int:
        return _INTERVAL_SECONDS[self.unit] * self.count

    def to_timedelta64(self) -> np.timedelta64:
        return np.timedelta64(self.seconds, "s")

    @classmethod
    def parse(cls, spec: str) -> "DateInterval":
        """Parse compact specs like ``"1h"``, ``"30m"``, ``"1d"``."""
        m = _INTERVAL_RE.match(spec.strip())
        if m is None:
            raise ValueError(f"bad interval spec {spec!r} (expected e.g. 1h, 30m, 1d)")
        return cls(_INTERVAL_UNIT[m.group(2)], int(m.group(1)))

    def __str__(self) -> str:
        return f"{self.count}{self.unit[0] if self.unit != 'day' else 'd'}"


# ---------------------------------------------------------------------------
# Series container
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class TSFrame:
    """An ordered two-column series: timestamps plus optional real values.

    Timestamps are naive local time at second resolution and must be
    non-decreasing.  Missing values are NaN; NaN is the only missing
    marker and never a legal observation.  ``meta`` carries advisory
    annotations (e.g. imputation warnings) and is ignored by equality.
    """

    timestamps: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        vals = np.asarray(self.values, dtype=np.float64)
        if ts.ndim != 1 or vals.ndim != 1 or ts.shape != vals.shape:
            raise ValueError("timestamps and values must be 1-D and equally long")
        if ts.size > 1 and (np.diff(ts) < np.timedelta64(0, "s")).any():
            raise UnsortedSeriesError("timestamps must be non-decreasing")
        self.timestamps = ts
        self.values = vals

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[datetime, float | None]]) -> "TSFrame":
        rows = list(rows)
        ts = np.array([r[0] for r in rows], dtype="datetime64[s]")
        vals = np.array(
            [np.nan if r[1] is None else float(r[1]) for r in rows], dtype=np.float64
        )
        return cls(ts, vals)

    def rows(self) -> list[tuple[datetime, float | None]]:
        out = []
        for t, v in zip(self.timestamps, self.values):
            out.append((t.item(), None if np.isnan(v) else float(v)))
        return out

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TSFrame):
            return NotImplemented
        return np.array_equal(self.timestamps, other.timestamps) and np.array_equal(
            self.values, other.values, equal_nan=True
        )

    @property
    def n_missing(self) -> int:
        return int(np.isnan(self.values).sum())

    def copy(self) -> "TSFrame":
        return TSFrame(self.timestamps.copy(), self.values.copy(), dict(self.meta))

    def with_values(self, values: np.ndarray, meta: dict | None = None) -> "TSFrame":
        return TSFrame(self.timestamps.copy(), values, dict(self.meta if meta is None else meta))


# ---------------------------------------------------------------------------
# Tabular container
# ---------------------------------------------------------------------------


def _as_column(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError("columns must be 1-D")
    if arr.dtype == object or arr.dtype.kind in "USb":
        return arr.astype(object)
    return arr.astype(np.float64)


@dataclass(eq=False)
class FeatureTable:
    """Named, equal-length columns; numeric columns are float64 and
    categorical ones are object arrays of strings.  When ``has_labels``
    is set, the last column is the (categorical) label column."""

    names: list[str]
    columns: list[np.ndarray]
    has_labels: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.names = [str(n) for n in self.names]
        if len(self.names) != len(self.columns):
            raise ValueError("one name per column required")
        if len(set(self.names)) != len(self.names):
            raise ValueError("column names must be unique")
        self.columns = [_as_column(c) for c in self.columns]
        lengths = {c.size for c in self.columns}
        if len(lengths) > 1:
            raise ValueError("all columns must have equal length")
        if self.has_labels and not self.columns:
            raise ValueError("has_labels requires at least one column")

    @property
    def n_rows(self) -> int:
        return int(self.columns[0].size) if self.columns else 0

    def __len__(self) -> int:
        return self.n_rows

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureTable):
            return NotImplemented
        if self.names != other.names or self.has_labels != other.has_labels:
            return False
        for a, b in zip(self.columns, other.columns):
            if a.dtype == object or b.dtype == object:
                if a.dtype != b.dtype or not (a == b).all():
                    return False
            elif not np.array_equal(a, b, equal_nan=True):
                return False
        return True

    # -- feature/label views ------------------------------------------------

    @property
    def feature_names(self) -> list[str]:
        return self.names[:-1] if self.has_labels else list(self.names)

    def feature_columns(self) -> list[np.ndarray]:
        return self.columns[:-1] if self.has_labels else list(self.columns)

    def labels(self) -> np.ndarray:
        if not self.has_labels:
            raise MissingLabelsError("table has no label column")
        return self.columns[-1]

    def features_only(self) -> "FeatureTable":
        if not self.has_labels:
            return self
        return FeatureTable(self.names[:-1], [c.copy() for c in self.columns[:-1]])

    def to_matrix(self) -> np.ndarray:
        """Feature columns as a dense float matrix (categoricals are an error)."""
        cols = self.feature_columns()
        if not cols:
            return np.empty((self.n_rows, 0), dtype=np.float64)
        for name, col in zip(self.feature_names, cols):
            if col.dtype == object:
                raise SchemaError(f"column {name!r} is categorical, not numeric")
        return np.column_stack(cols).astype(np.float64)

    @classmethod
    def from_matrix(
        cls,
        matrix: np.ndarray,
        names: Sequence[str] | None = None,
        labels: Sequence | None = None,
        label_name: str = "label",
    ) -> "FeatureTable":
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix.reshape(-1, 1)
        if names is None:
            names = [f"c{i}" for i in range(matrix.shape[1])]
        cols = [matrix[:, i] for i in range(matrix.shape[1])]
        names = list(names)
        if labels is not None:
            names.append(label_name)
            cols.append(np.asarray(labels, dtype=object))
        return cls(names, cols, has_labels=labels is not None)

    def take(self, indices) -> "FeatureTable":
        """Row subset in the given index order."""
        idx = np.asarray(indices, dtype=np.intp)
        return FeatureTable(
            list(self.names), [c[idx] for c in self.columns], self.has_labels
        )

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[self.names.index(name)]
        except ValueError:
            raise SchemaError(f"no column named {name!r}") from None

    # -- CSV round-trip (header always written; label column last) ----------

    def to_csv(self) -> str:
        lines = [",".join(self.names)]
        for i in range(self.n_rows):
            fields = []
            for col in self.columns:
                v = col[i]
                if col.dtype == object:
                    fields.append(str(v))
                elif np.isnan(v):
                    fields.append("")
                else:
                    fields.append(repr(float(v)))
            lines.append(",".join(fields))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, has_labels: bool = False) -> "FeatureTable":
        lines = [ln for ln in text.replace("\r\n", "\n").split("\n") if ln != ""]
        if not lines:
            raise EmptyInputError("empty feature CSV")
        names = lines[0].split(",")
        raw = [ln.split(",") for ln in lines[1:]]
        for i, row in enumerate(raw):
            if len(row) != len(names):
                raise ParseError(f"expected {len(names)} fields, got {len(row)}", line=i + 2)
        cols: list[np.ndarray] = []
        for j, name in enumerate(names):
            fields = [row[j] for row in raw]
            force_text = has_labels and j == len(names) - 1
            if not force_text:
                try:
                    cols.append(
                        np.array(
                            [np.nan if f == "" else float(f) for f in fields],
                            dtype=np.float64,
                        )
                    )
                    continue
                except ValueError:
                    pass
            cols.append(np.array(fields, dtype=object))
        return cls(names, cols, has_labels=has_labels)


# ---------------------------------------------------------------------------
# Transformers
# ---------------------------------------------------------------------------


class Transformer:
    """Uniform fit/transform unit.

    ``kind`` is ``"filter"`` or ``"learner"``.  Stateless filters (class
    attribute ``stateless``) may transform without fitting.  ``fit``
    validates the contract, delegates to ``_fit`` for the fitted payload,
    and returns a new instance; the receiver is never modified.
    """

    kind: ClassVar[str] = "filter"
    stateless: ClassVar[bool] = False

    state: Any

    @property
    def is_fitted(self) -> bool:
        return self.stateless or self.state is not None

    def fit(self, data=None, labels=None) -> "Transformer":
        if self.kind == "learner" and labels is None:
            raise MissingLabelsError(f"{type(self).__name__} requires labels to fit")
        if data is not None and not self.stateless and len(data) == 0:
            raise EmptyInputError(f"{type(self).__name__} cannot fit on empty input")
        state = self._fit(data, labels)
        return dataclasses.replace(self, state=state)

    def transform(self, data=None):
        if not self.is_fitted:
            raise NotFittedError(f"{type(self).__name__} is not fitted")
        return self._transform(data)

    def fit_transform(self, data=None, labels=None):
        fitted = self.fit(data, labels)
        return fitted, fitted.transform(data)

    # subclass hooks
    def _fit(self, data, labels) -> Any:
        return {}

    def _transform(self, data):
        raise NotImplementedError


@dataclass(frozen=True)
class Identity(Transformer):
    """Pass-through filter; useful as a pipeline placeholder."""

    stateless: ClassVar[bool] = True
    state: Any = None

    def _transform(self, data):
        return data


@dataclass(frozen=True)
class Pipeline:
    """Left-to-right composition of transformers.

    Filters may appear anywhere; a learner may appear only as the final
    stage.  Fitting feeds each stage's transformed output into the next
    and returns a new pipeline of fitted stages; labels are handed only
    to a final learner.  Transforming a fitted pipeline whose last stage
    is a learner yields predictions, otherwise the extracted features.
    """

    stages: tuple[Transformer, ...]

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise ValueError("pipeline needs at least one stage")
        for stage in self.stages[:-1]:
            if stage.kind == "learner":
                raise ValueError("a learner may only be the final pipeline stage")

    @property
    def is_fitted(self) -> bool:
        return all(s.is_fitted for s in self.stages)

    def fit(self, data=None, labels=None) -> "Pipeline":
        fitted: list[Transformer] = []
        current = data
        last = len(self.stages) - 1
        for i, stage in enumerate(self.stages):
            try:
                if i == last and stage.kind == "learner":
                    f = stage.fit(current, labels)
                else:
                    f = stage.fit(current)
                    if i != last:
                        current = f.transform(current)
            except TSError as e:
                raise PipelineStageError(i, stage, e) from e
            fitted.append(f)
        return Pipeline(tuple(fitted))

    def transform(self, data=None):
        current = data
        for i, stage in enumerate(self.stages):
            try:
                current = stage.transform(current)
            except TSError as e:
                raise PipelineStageError(i, stage, e) from e
        return current

    def fit_transform(self, data=None, labels=None):
        fitted = self.fit(data, labels)
        return fitted, fitted.transform(data)
