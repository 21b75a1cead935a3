"""Regenerate the committed test fixtures under tests/fixtures/.

Everything is seeded, so reruns are byte-identical:

    python scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import sys
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))
from synth_sensors import make_corpus, write_series_csv  # noqa: E402

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"


def hourly(start: datetime, values, skip=()) -> list[tuple[datetime, float]]:
    return [
        (start + timedelta(hours=i), float(v))
        for i, v in enumerate(values)
        if i not in skip
    ]


def gaps_csv() -> None:
    rng = np.random.default_rng(11)
    values = 20 + 2 * np.sin(np.arange(72) / 5.0) + rng.normal(0, 0.3, 72)
    # two dropout blocks: hours 10-12 and 40-44
    skip = set(range(10, 13)) | set(range(40, 45))
    write_series_csv(FIXTURES / "gaps.csv", hourly(datetime(2014, 1, 1), values, skip))


def monotonic_csv() -> None:
    rng = np.random.default_rng(12)
    increments = rng.gamma(2.0, 1.5, 96)
    meter = 1000 + np.cumsum(increments)
    meter[50] += 400.0  # transient read glitch, repaired by the outlier step
    write_series_csv(FIXTURES / "monotonic.csv", hourly(datetime(2014, 3, 1), meter))


def dailymono_csv() -> None:
    rng = np.random.default_rng(13)
    rows = []
    start = datetime(2014, 5, 1)
    for day in range(5):
        counts = np.cumsum(rng.integers(0, 30, size=24)).astype(float)
        rows.extend(
            (start + timedelta(days=day, hours=h), float(counts[h])) for h in range(24)
        )
    write_series_csv(FIXTURES / "dailymono.csv", rows)


def sensor_dirs() -> None:
    make_corpus(FIXTURES / "sensors" / "training", per_class=3, seed=41)
    make_corpus(FIXTURES / "sensors" / "testing", per_class=2, seed=42, start_index=50)


def bench_inputs() -> None:
    # four noisy clusters as a ready-made labeled feature table
    rng = np.random.default_rng(21)
    centers = [(0.0, 0.0), (4.0, 0.0), (0.0, 4.0), (4.0, 4.0)]
    labels = ["north", "east", "south", "west"]
    lines = ["f1,f2,label"]
    for center, label in zip(centers, labels):
        pts = rng.normal(center, 1.3, size=(40, 2))
        lines.extend(f"{p[0]:.4f},{p[1]:.4f},{label}" for p in pts)
    (FIXTURES / "bench_features.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    registry = {
        "forest": {"type": "forest", "num_trees": 40, "seed": 1},
        "tree": {"type": "tree"},
        "pruned_tree": {"type": "tree", "prune_purity": 0.7},
        "adaboost": {"type": "adaboost", "num_iterations": 20},
        "vote": {
            "type": "vote",
            "members": [
                {"type": "forest", "num_trees": 15, "seed": 2},
                {"type": "tree"},
                {"type": "adaboost", "num_iterations": 10},
            ],
        },
    }
    (FIXTURES / "registry.json").write_text(
        json.dumps(registry, indent=2) + "\n", encoding="utf-8"
    )


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    gaps_csv()
    monotonic_csv()
    dailymono_csv()
    sensor_dirs()
    bench_inputs()
    print(f"fixtures written under {FIXTURES}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
