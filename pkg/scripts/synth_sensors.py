"""Generate synthetic sensor CSV corpora for the classifier workflows.

Four archetypes with distinct statistical signatures:

* ``AirOffTemp``: daily-periodic temperature with mild noise
* ``Energy``:     strictly increasing cumulative meter
* ``Pressure``:   flat baseline with occasional large spikes
* ``RetTemp``:    level-shifting mean with small noise

Rows are hourly with randomly dropped readings (plus a few multi-hour
dropout blocks), so aggregation leaves realistic missing runs.  Usage:

    python scripts/synth_sensors.py OUTDIR [--per-class 10] [--seed 7]
"""

from __future__ import annotations

import argparse
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

ARCHETYPES = ("AirOffTemp", "Energy", "Pressure", "RetTemp")

# per-archetype probability that any single reading is dropped
_DROP_RATE = {"AirOffTemp": 0.05, "Energy": 0.02, "Pressure": 0.08, "RetTemp": 0.03}


def _values(kind: str, n: int, rng: np.random.Generator) -> np.ndarray:
    hours = np.arange(n)
    if kind == "AirOffTemp":
        amp = rng.uniform(3.0, 6.0)
        base = rng.uniform(15.0, 25.0)
        phase = rng.uniform(0, 2 * np.pi)
        return base + amp * np.sin(2 * np.pi * hours / 24.0 + phase) + rng.normal(0, 0.4, n)
    if kind == "Energy":
        start = rng.uniform(1000.0, 5000.0)
        increments = rng.gamma(2.0, rng.uniform(0.5, 2.0), n)
        return start + np.cumsum(increments)
    if kind == "Pressure":
        base = rng.uniform(95.0, 105.0)
        v = base + rng.normal(0, 1.0, n)
        n_spikes = max(2, int(0.04 * n))
        at = rng.choice(n, size=n_spikes, replace=False)
        v[at] += rng.uniform(15.0, 40.0, n_spikes) * rng.choice([-1.0, 1.0], n_spikes, p=[0.2, 0.8])
        return v
    if kind == "RetTemp":
        v = np.empty(n)
        i = 0
        while i < n:
            seg = int(rng.integers(24, 72))
            level = rng.uniform(18.0, 30.0)
            v[i : i + seg] = level + rng.normal(0, 0.3, min(seg, n - i))
            i += seg
        return v
    raise ValueError(f"unknown archetype {kind!r}")


def generate_series(kind: str, rng: np.random.Generator) -> list[tuple[datetime, float]]:
    """One irregular hourly series: random span, dropped rows, dropout blocks."""
    n = int(rng.integers(24 * 5, 24 * 9))
    start = datetime(2019, 1, 1) + timedelta(days=int(rng.integers(0, 300)))
    values = _values(kind, n, rng)
    keep = rng.random(n) >= _DROP_RATE[kind]
    for _ in range(int(rng.integers(1, 4))):  # dropout blocks of 2..6 hours
        at = int(rng.integers(0, n - 6))
        keep[at : at + int(rng.integers(2, 7))] = False
    keep[0] = keep[-1] = True
    return [
        (start + timedelta(hours=int(h)), float(values[h]))
        for h in range(n)
        if keep[h]
    ]


def write_series_csv(path: Path, rows: list[tuple[datetime, float]]) -> None:
    lines = ["Date,Value"]
    for ts, value in rows:
        lines.append(f"{ts.strftime('%d/%m/%Y %H:%M')},{value:.3f}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def make_corpus(outdir: Path, per_class: int, seed: int, start_index: int = 1) -> list[Path]:
    """Write ``per_class`` files per archetype into ``outdir``."""
    rng = np.random.default_rng(seed)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for kind in ARCHETYPES:
        for i in range(per_class):
            path = outdir / f"{kind}{start_index + i}.csv"
            write_series_csv(path, generate_series(kind, rng))
            written.append(path)
    return written


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--per-class", type=int, default=10)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--start-index", type=int, default=1)
    args = ap.parse_args()
    files = make_corpus(args.outdir, args.per_class, args.seed, args.start_index)
    print(f"wrote {len(files)} files to {args.outdir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
