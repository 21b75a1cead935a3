"""Seeded holdout evaluation and the parallel model-comparison harness.

Each trial draws one train/test split from its own trial seed; every
model is then fitted through the standard conditioning pipeline
(one-hot -> impute -> scale -> learner) on the same split and scored on
the held-out rows.  Cells are independent, so the parallel run is a
plain worker-pool map whose aggregated report is identical to the
sequential one: results are collected per cell and reduced only after
all cells finish, never accumulated under a lock.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    EmptyInputError,
    FeatureTable,
    InsufficientDataError,
    MissingLabelsError,
    Pipeline,
    Transformer,
    mix_seed,
)
from .features import ColumnImputer, OneHotEncoder, StandardScaler
from .learners import (
    AdaBoost,
    BestOfEnsemble,
    BoostConfig,
    DecisionTree,
    ForestConfig,
    RandomForest,
    StackingEnsemble,
    TreeConfig,
    VotingEnsemble,
)

__all__ = [
    "TrialPlan",
    "ReportRow",
    "BenchmarkReport",
    "holdout",
    "score",
    "run_benchmark",
    "build_learner",
    "load_registry",
]

METRICS = ("accuracy", "mean_fscore")


@dataclass(frozen=True)
class TrialPlan:
    """How many trials to run and how each trial derives its split seed.

    ``seed_rule="times3"`` gives trial ``i`` (1-based) the seed ``3*i``;
    ``"mix"`` derives it from ``base_seed`` through the splitmix mixer.
    """

    trials: int = 5
    test_fraction: float = 0.20
    base_seed: int = 0
    seed_rule: str = "times3"

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")
        if self.seed_rule not in ("times3", "mix"):
            raise ValueError(f"unknown seed rule {self.seed_rule!r}")

    def trial_seed(self, trial: int) -> int:
        if self.seed_rule == "times3":
            return 3 * trial
        return mix_seed(self.base_seed, trial)


def holdout(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint, covering (train, test) index arrays.

    The test side gets ``round(n * fraction)`` indices drawn uniformly
    without replacement from the seeded generator; both sides must end
    up nonempty.
    """
    if n < 2:
        raise InsufficientDataError(f"cannot split {n} rows")
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    n_test = int(round(n * fraction))
    if n_test < 1 or n_test >= n:
        raise InsufficientDataError(
            f"test fraction {fraction} leaves an empty side for n={n}"
        )
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def score(metric: str, actual, predicted) -> float:
    """``accuracy`` or ``mean_fscore`` of predicted against actual labels.

    The mean F-score is the unweighted mean over classes present in
    ``actual`` of F1 = 2PR/(P+R), taking F1 = 0 for a class whose
    precision and recall are both zero.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    a = np.asarray(list(actual), dtype=object)
    p = np.asarray(list(predicted), dtype=object)
    if a.size != p.size:
        raise ValueError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size == 0:
        raise EmptyInputError("cannot score empty label vectors")
    if metric == "accuracy":
        return float(np.mean(a == p))
    f1s = []
    for cls in sorted(set(a)):
        tp = int(np.sum((a == cls) & (p == cls)))
        fp = int(np.sum((a != cls) & (p == cls)))
        fn = int(np.sum((a == cls) & (p != cls)))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(
            0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        )
    return float(np.mean(f1s))


@dataclass(frozen=True)
class ReportRow:
    model: str
    mean: float
    std: float
    n: int


@dataclass(frozen=True)
class BenchmarkReport:
    """Per-model score summary, sorted by mean descending."""

    rows: tuple[ReportRow, ...]
    errors: tuple[tuple[int, str, str], ...] = ()  # (trial, model, message)

    def to_csv(self) -> str:
        lines = ["model,mean,std,n"]
        for r in self.rows:
            lines.append(f"{r.model},{_fmt(r.mean)},{_fmt(r.std)},{r.n}")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        width = max([len("model")] + [len(r.model) for r in self.rows])
        lines = [f"{'model':<{width}}  {'mean':>8}  {'std':>8}  {'n':>4}"]
        for r in self.rows:
            lines.append(
                f"{r.model:<{width}}  {r.mean:>8.4f}  {r.std:>8.4f}  {r.n:>4d}"
            )
        return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else repr(float(x))


def _conditioning_pipeline(learner: Transformer) -> Pipeline:
    return Pipeline((OneHotEncoder(), ColumnImputer(), StandardScaler(), learner))


def run_benchmark(
    learners: dict[str, Transformer],
    data: FeatureTable,
    plan: TrialPlan = TrialPlan(),
    metric: str = "accuracy",
    parallel: bool = False,
    max_workers: int | None = None,
) -> BenchmarkReport:
    """Evaluate every learner over every seeded trial split.

    A failing (trial, model) cell is recorded under ``errors`` and
    excluded from that model's count; a model that fails every trial
    still appears in the report with ``n=0``.  The report is a pure
    function of (learners, data, plan, metric): running with
    ``parallel=True`` only changes the schedule, never the result.
    """
    if not learners:
        raise EmptyInputError("no learners registered")
    if not data.has_labels:
        raise MissingLabelsError("benchmark data needs a label column")
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    y = data.labels()
    features = data.features_only()
    splits = {
        trial: holdout(data.n_rows, plan.test_fraction, plan.trial_seed(trial))
        for trial in range(1, plan.trials + 1)
    }
    names = list(learners)
    cells = [(trial, name) for trial in range(1, plan.trials + 1) for name in names]

    def run_cell(cell: tuple[int, str]) -> float:
        trial, name = cell
        train_idx, test_idx = splits[trial]
        fitted = _conditioning_pipeline(learners[name]).fit(
            features.take(train_idx), y[train_idx]
        )
        predictions = fitted.transform(features.take(test_idx))
        return score(metric, y[test_idx], predictions)

    outcomes: dict[tuple[int, str], float | Exception] = {}
    if parallel:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {cell: pool.submit(run_cell, cell) for cell in cells}
        for cell, fut in futures.items():
            try:
                outcomes[cell] = fut.result()
            except Exception as e:  # a cell failure must not sink the run
                outcomes[cell] = e
    else:
        for cell in cells:
            try:
                outcomes[cell] = run_cell(cell)
            except Exception as e:
                outcomes[cell] = e

    errors = []
    rows = []
    for name in names:
        scores = []
        for trial in range(1, plan.trials + 1):
            outcome = outcomes[(trial, name)]
            if isinstance(outcome, Exception):
                errors.append((trial, name, str(outcome)))
            else:
                scores.append(outcome)
        n = len(scores)
        if n == 0:
            rows.append(ReportRow(name, float("nan"), float("nan"), 0))
        else:
            mean = float(np.mean(scores))
            std = float(np.std(scores, ddof=1)) if n > 1 else 0.0
            rows.append(ReportRow(name, mean, std, n))
    rows.sort(key=lambda r: (math.isnan(r.mean), -(r.mean if not math.isnan(r.mean) else 0.0), r.model))
    return BenchmarkReport(tuple(rows), tuple(errors))


# ---------------------------------------------------------------------------
# Learner registry specs (the CLI's JSON format)
# ---------------------------------------------------------------------------

_LEARNER_KEYS = {
    "tree": ("max_depth", "min_samples_leaf", "prune_purity"),
    "forest": ("num_trees", "feature_subset", "bootstrap", "seed"),
    "adaboost": ("num_iterations", "seed"),
    "vote": ("seed",),
    "stack": ("stack_holdout", "seed"),
    "best": ("best_folds", "seed"),
}


def build_learner(spec: dict) -> Transformer:
    """Instantiate an untrained learner template from a registry spec.

    A spec is ``{"type": ..., <config keys>}``; ensemble types take a
    ``"members"`` list of nested specs.
    """
    if "type" not in spec:
        raise ValueError(f"learner spec {spec!r} lacks a 'type'")
    kind = spec["type"]
    if kind not in _LEARNER_KEYS:
        raise ValueError(f"unknown learner type {kind!r}")
    opts = {k: spec[k] for k in _LEARNER_KEYS[kind] if k in spec}
    extra = set(spec) - set(_LEARNER_KEYS[kind]) - {"type", "members"}
    if extra:
        raise ValueError(f"unknown keys {sorted(extra)} for learner type {kind!r}")
    if kind == "tree":
        return DecisionTree(config=TreeConfig(**opts))
    if kind == "forest":
        return RandomForest(config=ForestConfig(**opts))
    if kind == "adaboost":
        return AdaBoost(config=BoostConfig(**opts))
    members = tuple(build_learner(m) for m in spec.get("members", []))
    if not members:
        raise ValueError(f"ensemble type {kind!r} needs a nonempty 'members' list")
    if kind == "vote":
        return VotingEnsemble(members=members, **opts)
    if kind == "stack":
        return StackingEnsemble(members=members, **opts)
    return BestOfEnsemble(members=members, **opts)


def load_registry(doc: dict) -> dict[str, Transformer]:
    """Registry JSON: a mapping of model name to learner spec (optionally
    nested under a top-level ``"models"`` key)."""
    models = doc.get("models", doc)
    if not isinstance(models, dict) or not models:
        raise ValueError("registry must map model names to learner specs")
    return {str(name): build_learner(spec) for name, spec in models.items()}
