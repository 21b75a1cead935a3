"""Command-line front end.

Subcommands: ``stats`` (data-quality record as JSON), ``clean``
(aggregate/impute/normalize/outlier repair to a new CSV), ``plot``
(static SVG line chart with gaps drawn as breaks), ``tsc-train`` /
``tsc-classify`` (directory-driven sensor-type classifier), and
``bench`` (seeded model comparison from a JSON learner registry).

Exit codes: 0 on success, 1 for domain errors (bad data), 2 for usage,
missing-file, and empty-input errors.  Output bytes are deterministic
for fixed inputs, flags, and seeds.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, ClassVar

import numpy as np

from .bench import TrialPlan, load_registry, run_benchmark
from .core import (
    DateInterval,
    EmptyInputError,
    FeatureTable,
    TSError,
    Transformer,
    TSFrame,
)
from .features import statify
from .ingest import DateFormat, read_csv_datetime, write_csv_datetime
from .preprocess import (
    AggregatorConfig,
    ImputerConfig,
    OutlierConfig,
    aggregate,
    impute_knn,
    normalize_monotonic,
    remove_outliers,
)
from . import tsclassifier

__all__ = ["main", "render_svg", "Plotter"]


# ---------------------------------------------------------------------------
# SVG line chart
# ---------------------------------------------------------------------------


def render_svg(frame: TSFrame, width: int = 800, height: int = 300) -> str:
    """Fixed-viewport line chart; runs of missing values break the line.

    Contiguous present runs of length >= 2 become ``<polyline>`` elements
    and isolated points become ``<circle>`` markers, so the number of
    segments exposes the gap structure.  Output is deterministic text.
    """
    if len(frame) == 0:
        raise EmptyInputError("nothing to plot")
    margin = 30
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    v = frame.values
    present = ~np.isnan(v)
    n = v.size
    xs = (
        np.full(n, margin + plot_w / 2.0)
        if n == 1
        else margin + plot_w * np.arange(n) / (n - 1)
    )
    if present.any():
        vmin, vmax = float(v[present].min()), float(v[present].max())
    else:
        vmin, vmax = 0.0, 1.0
    span = vmax - vmin
    if span == 0:
        vmin, span = vmin - 1.0, 2.0
    ys = margin + plot_h * (1.0 - (v - vmin) / span)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin}" y="{margin}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#cccccc"/>',
    ]
    run: list[int] = []
    runs: list[list[int]] = []
    for i in range(n):
        if present[i]:
            run.append(i)
        elif run:
            runs.append(run)
            run = []
    if run:
        runs.append(run)
    for run in runs:
        if len(run) == 1:
            i = run[0]
            parts.append(
                f'<circle cx="{xs[i]:.2f}" cy="{ys[i]:.2f}" r="2" fill="#1f77b4"/>'
            )
        else:
            pts = " ".join(f"{xs[i]:.2f},{ys[i]:.2f}" for i in run)
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>'
            )
    first = frame.timestamps[0].item().strftime("%Y-%m-%d %H:%M")
    last = frame.timestamps[-1].item().strftime("%Y-%m-%d %H:%M")
    parts.append(
        f'<text x="{margin}" y="{height - 8}" font-size="10" fill="#555555">{first}</text>'
    )
    parts.append(
        f'<text x="{width - margin}" y="{height - 8}" font-size="10" fill="#555555" '
        f'text-anchor="end">{last}</text>'
    )
    parts.append(f'<text x="4" y="{margin - 4}" font-size="10" fill="#555555">{vmax:g}</text>')
    parts.append(
        f'<text x="4" y="{height - margin}" font-size="10" fill="#555555">{vmin:g}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@dataclass(frozen=True)
class Plotter(Transformer):
    """Filter that writes an SVG chart of the passing series and hands
    the series on unchanged."""

    stateless: ClassVar[bool] = True
    filename: str = "plot.svg"
    width: int = 800
    height: int = 300
    state: Any = None

    def _transform(self, data: TSFrame) -> TSFrame:
        Path(self.filename).write_text(
            render_svg(data, self.width, self.height), encoding="utf-8"
        )
        return data


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _json_value(x: float) -> float | None:
    return None if isinstance(x, float) and math.isnan(x) else x


def cmd_stats(args) -> int:
    frame = read_csv_datetime(args.input, args.dateformat)
    series = aggregate(frame, AggregatorConfig(interval=args.interval))
    if args.impute:
        series = impute_knn(
            series, ImputerConfig(interval=args.interval, k=args.k, max_passes=args.passes)
        )
    sv = statify(series, processmissing=args.processmissing)
    record: dict[str, Any] = {name: _json_value(val) for name, val in sv.to_dict().items()}
    if args.processmissing:
        record["empty_block_set"] = sv.bcount == 0
    if "impute_unconverged" in series.meta:
        record["impute_unconverged"] = int(series.meta["impute_unconverged"])
    print(json.dumps(record))
    return 0


def cmd_clean(args) -> int:
    frame = read_csv_datetime(args.input, args.dateformat)
    series = aggregate(frame, AggregatorConfig(interval=args.interval))
    if args.impute:
        series = impute_knn(
            series, ImputerConfig(interval=args.interval, k=args.k, max_passes=args.passes)
        )
        if "impute_unconverged" in series.meta:
            print(
                f"warning: {series.meta['impute_unconverged']} values still missing "
                f"after {args.passes} passes",
                file=sys.stderr,
            )
    if args.monotonic:
        series = normalize_monotonic(series)
    if args.outliers:
        series = remove_outliers(
            series, OutlierConfig(interval=args.interval, fence_multiplier=args.fence)
        )
    write_csv_datetime(series, args.out, args.dateformat)
    return 0


def cmd_plot(args) -> int:
    frame = read_csv_datetime(args.input, args.dateformat)
    if args.interval is not None:
        frame = aggregate(frame, AggregatorConfig(interval=args.interval))
    Path(args.out).write_text(render_svg(frame, args.width, args.height), encoding="utf-8")
    return 0


def _classifier_config(args, trdir: str = "", tstdir: str = "") -> tsclassifier.ClassifierConfig:
    return tsclassifier.ClassifierConfig(
        trdirectory=trdir,
        tstdirectory=tstdir,
        modeldirectory=args.modeldir,
        num_trees=getattr(args, "num_trees", 75),
        dateformat=args.dateformat.pattern,
        interval=args.interval,
        k=args.k,
        max_passes=args.passes,
        seed=getattr(args, "seed", 0),
    )


def cmd_tsc_train(args) -> int:
    cfg = _classifier_config(args, trdir=args.traindir)
    artifact = tsclassifier.train(cfg, parallel=args.parallel)
    print(
        f"trained {artifact.config['num_trees']} trees on labels "
        f"{','.join(artifact.labels)} -> {Path(args.modeldir) / tsclassifier.MODEL_FILENAME}"
    )
    return 0


def cmd_tsc_classify(args) -> int:
    artifact = tsclassifier.load_model(Path(args.modeldir) / tsclassifier.MODEL_FILENAME)
    cfg = _classifier_config(args, tstdir=args.testdir)
    predictions = tsclassifier.classify(cfg, artifact)
    csv_text = predictions.to_csv()
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    if all(row[1] is not None for row in predictions.rows):
        print(f"testing accuracy: {tsclassifier.testing_accuracy(predictions):.4f}")
    return 0


def cmd_bench(args) -> int:
    data = FeatureTable.from_csv(
        Path(args.data).read_text(encoding="utf-8"), has_labels=True
    )
    registry = load_registry(json.loads(Path(args.registry).read_text(encoding="utf-8")))
    plan = TrialPlan(
        trials=args.trials,
        test_fraction=args.test_fraction,
        base_seed=args.seed,
        seed_rule=args.seed_rule,
    )
    report = run_benchmark(
        registry, data, plan, metric=args.metric, parallel=args.parallel
    )
    text = report.to_table() if args.table else report.to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for trial, model, message in report.errors:
        print(f"warning: trial {trial} {model}: {message}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_series_flags(p: argparse.ArgumentParser, interval_required: bool = True) -> None:
    p.add_argument(
        "--dateformat",
        type=DateFormat,
        default=DateFormat(),
        help="date pattern, e.g. 'dd/mm/yyyy HH:MM'",
    )
    default = DateInterval("hour", 1) if interval_required else None
    p.add_argument(
        "--interval",
        type=DateInterval.parse,
        default=default,
        help="aggregation interval, e.g. 1h, 30m, 1d",
    )
    p.add_argument("--k", type=int, default=1, help="imputation neighbors per side")
    p.add_argument("--passes", type=int, default=10, help="imputation pass limit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsforge",
        description="Time-series repair, statistics, classification, and model benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="aggregate a CSV and print its statistics as JSON")
    p.add_argument("input")
    _add_series_flags(p)
    p.add_argument("--impute", action="store_true", help="impute gaps before statifying")
    p.add_argument(
        "--processmissing", action="store_true", help="include missing-block stats"
    )
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("clean", help="repair a series and write it back out")
    p.add_argument("input")
    _add_series_flags(p)
    p.add_argument("--impute", action="store_true", help="fill gaps by k-NN imputation")
    p.add_argument(
        "--monotonic", action="store_true", help="difference monotonic series"
    )
    p.add_argument("--outliers", action="store_true", help="repair IQR-fence outliers")
    p.add_argument("--fence", type=float, default=1.5, help="IQR fence multiplier")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("plot", help="render a series as a static SVG chart")
    p.add_argument("input")
    _add_series_flags(p, interval_required=False)
    p.add_argument("--width", type=int, default=800)
    p.add_argument("--height", type=int, default=300)
    p.add_argument("--out", required=True, help="output SVG path")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("tsc-train", help="train the sensor-type classifier on a directory")
    p.add_argument("traindir")
    p.add_argument("modeldir")
    _add_series_flags(p)
    p.add_argument("--num-trees", dest="num_trees", type=int, default=75)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--parallel", action="store_true")
    p.set_defaults(func=cmd_tsc_train)

    p = sub.add_parser("tsc-classify", help="classify every CSV in a directory")
    p.add_argument("testdir")
    p.add_argument("modeldir")
    _add_series_flags(p)
    p.add_argument("--out", default=None, help="predictions CSV path (default stdout)")
    p.set_defaults(func=cmd_tsc_classify)

    p = sub.add_parser("bench", help="compare learners from a JSON registry")
    p.add_argument("data", help="feature CSV with the label column last")
    p.add_argument("registry", help="JSON file of learner specs")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--test-fraction", dest="test_fraction", type=float, default=0.20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--seed-rule", dest="seed_rule", choices=("times3", "mix"), default="times3"
    )
    p.add_argument("--metric", choices=("accuracy", "mean_fscore"), default="accuracy")
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--table", action="store_true", help="aligned text instead of CSV")
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EmptyInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except TSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
