"""Reading and writing the two-column ``Date,Value`` CSV format.

Date patterns are built from the tokens ``dd mm yyyy HH MM SS`` plus
literal separators, e.g. ``"dd/mm/yyyy HH:MM"``.  Rendering is always
zero-padded (4-digit year); parsing tolerates 1 or 2 digit day/month/time
fields.  A single leading header row is skipped automatically when its
first field is non-numeric text that does not parse as a date.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from datetime import datetime
from functools import lru_cache
from pathlib import Path
from typing import Any, ClassVar

import numpy as np

from .core import ParseError, TSFrame, Transformer

__all__ = ["DateFormat", "read_csv_datetime", "write_csv_datetime", "CsvDateValReader"]

_TOKEN_RE = re.compile(r"yyyy|dd|mm|HH|MM|SS")

_TOKEN_GROUP = {
    "yyyy": r"(\d{4})",
    "dd": r"(\d{1,2})",
    "mm": r"(\d{1,2})",
    "HH": r"(\d{1,2})",
    "MM": r"(\d{1,2})",
    "SS": r"(\d{1,2})",
}

_TOKEN_WIDTH = {"yyyy": 4, "dd": 2, "mm": 2, "HH": 2, "MM": 2, "SS": 2}


@lru_cache(maxsize=64)
def _compile(pattern: str):
    tokens: list[str] = []
    regex_parts: list[str] = []
    render_parts: list[tuple[bool, str]] = []  # (is_token, text)
    pos = 0
    for m in _TOKEN_RE.finditer(pattern):
        if m.start() > pos:
            lit = pattern[pos : m.start()]
            regex_parts.append(re.escape(lit))
            render_parts.append((False, lit))
        tok = m.group(0)
        tokens.append(tok)
        regex_parts.append(_TOKEN_GROUP[tok])
        render_parts.append((True, tok))
        pos = m.end()
    if pos < len(pattern):
        lit = pattern[pos:]
        regex_parts.append(re.escape(lit))
        render_parts.append((False, lit))
    for required in ("yyyy", "mm", "dd"):
        if required not in tokens:
            raise ValueError(f"date pattern {pattern!r} must contain {required}")
    if len(tokens) != len(set(tokens)):
        raise ValueError(f"date pattern {pattern!r} repeats a token")
    return re.compile("".join(regex_parts)), tuple(tokens), tuple(render_parts)


@dataclass(frozen=True)
class DateFormat:
    """A validated date pattern over ``dd mm yyyy HH MM SS`` tokens."""

    pattern: str = "dd/mm/yyyy HH:MM"

    def __post_init__(self):
        _compile(self.pattern)

    def parse(self, text: str) -> datetime:
        """Parse ``text`` exactly; raises ValueError on any mismatch."""
        regex, tokens, _ = _compile(self.pattern)
        m = regex.fullmatch(text.strip())
        if m is None:
            raise ValueError(f"{text!r} does not match pattern {self.pattern!r}")
        parts = {"yyyy": 0, "mm": 1, "dd": 1, "HH": 0, "MM": 0, "SS": 0}
        for tok, grp in zip(tokens, m.groups()):
            parts[tok] = int(grp)
        return datetime(
            parts["yyyy"], parts["mm"], parts["dd"], parts["HH"], parts["MM"], parts["SS"]
        )

    def render(self, ts: datetime) -> str:
        values = {
            "yyyy": ts.year,
            "mm": ts.month,
            "dd": ts.day,
            "HH": ts.hour,
            "MM": ts.minute,
            "SS": ts.second,
        }
        _, _, parts = _compile(self.pattern)
        out = []
        for is_token, text in parts:
            out.append(f"{values[text]:0{_TOKEN_WIDTH[text]}d}" if is_token else text)
        return "".join(out)

    @property
    def has_seconds(self) -> bool:
        return "SS" in _compile(self.pattern)[1]


def _coerce_format(fmt: "DateFormat | str") -> DateFormat:
    return fmt if isinstance(fmt, DateFormat) else DateFormat(fmt)


def _is_numeric_text(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def read_csv_datetime(path, fmt: "DateFormat | str" = DateFormat()) -> TSFrame:
    """Read a ``date,value`` CSV into a TSFrame, rows in file order.

    Empty or unparseable value fields become missing values.  A date
    field that does not match ``fmt`` raises :class:`ParseError` with
    the offending line number, except for a single header row which is
    detected (first field is non-numeric text) and skipped.
    """
    fmt = _coerce_format(fmt)
    rows: list[tuple[datetime, float]] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, record in enumerate(reader, start=1):
            if not record or (len(record) == 1 and record[0].strip() == ""):
                continue
            if len(record) != 2:
                raise ParseError(
                    f"expected 2 fields, got {len(record)}", line=lineno
                )
            date_field, value_field = record
            try:
                ts = fmt.parse(date_field)
            except ValueError as e:
                if lineno == 1 and not _is_numeric_text(date_field.strip()):
                    continue  # header row
                raise ParseError(str(e), line=lineno) from None
            value_field = value_field.strip()
            if value_field == "" or not _is_numeric_text(value_field):
                value = np.nan
            else:
                value = float(value_field)
            rows.append((ts, value))
    ts_arr = np.array([r[0] for r in rows], dtype="datetime64[s]")
    val_arr = np.array([r[1] for r in rows], dtype=np.float64)
    return TSFrame(ts_arr, val_arr)


def write_csv_datetime(frame: TSFrame, path, fmt: "DateFormat | str" = DateFormat()) -> None:
    """Write ``frame`` as a ``Date,Value`` CSV (UTF-8, LF line endings).

    Missing values become empty fields; floats are rendered with
    ``repr`` so reading the file back reproduces them exactly.
    """
    fmt = _coerce_format(fmt)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["Date", "Value"])
    for t, v in zip(frame.timestamps, frame.values):
        writer.writerow([fmt.render(t.item()), "" if np.isnan(v) else repr(float(v))])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


@dataclass(frozen=True)
class CsvDateValReader(Transformer):
    """Filter that ignores its input and emits the configured CSV file."""

    stateless: ClassVar[bool] = True
    filename: str = ""
    dateformat: str = "dd/mm/yyyy HH:MM"
    state: Any = None

    def _transform(self, data) -> TSFrame:
        return read_csv_datetime(self.filename, self.dateformat)
