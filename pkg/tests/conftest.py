import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = Path(__file__).resolve().parent / "fixtures"

sys.path.insert(0, str(ROOT / "scripts"))

from tsforge.core import TSFrame  # noqa: E402


def hourly_frame(values, start="2014-01-01T00:00") -> TSFrame:
    """TSFrame on an hourly grid; None entries become missing values."""
    start = np.datetime64(start, "s")
    ts = start + np.arange(len(values)) * np.timedelta64(3600, "s")
    vals = np.array([np.nan if v is None else float(v) for v in values])
    return TSFrame(ts, vals)


def random_hourly_frame(rng, n=None, missing_fraction=0.3, start_year=2015) -> TSFrame:
    """Random regular hourly frame with at least one present value."""
    n = int(rng.integers(5, 60)) if n is None else n
    values = rng.normal(10, 3, n)
    gaps = rng.random(n) < missing_fraction
    if gaps.all():
        gaps[int(rng.integers(0, n))] = False
    values[gaps] = np.nan
    start = np.datetime64(f"{start_year}-01-01T00:00", "s") + np.timedelta64(
        int(rng.integers(0, 10_000)) * 60, "s"
    )
    return TSFrame(start + np.arange(n) * np.timedelta64(3600, "s"), values)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
