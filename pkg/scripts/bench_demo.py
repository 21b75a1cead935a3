"""End-to-end demo: synthesize a sensor corpus, extract statistic
features per file, and race the native learners over seeded holdout
trials.

    python scripts/bench_demo.py [--per-class 25] [--trials 5] [--parallel]
"""

from __future__ import annotations

import argparse
import sys
import tempfile
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from synth_sensors import make_corpus  # noqa: E402

from tsforge.bench import TrialPlan, run_benchmark  # noqa: E402
from tsforge.learners import (  # noqa: E402
    AdaBoost,
    BoostConfig,
    DecisionTree,
    ForestConfig,
    RandomForest,
    StackingEnsemble,
    TreeConfig,
    VotingEnsemble,
)
from tsforge.tsclassifier import ClassifierConfig, extract_features_from_directory  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--per-class", type=int, default=25)
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--metric", choices=("accuracy", "mean_fscore"), default="accuracy")
    ap.add_argument("--parallel", action="store_true")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        print(f"generating {4 * args.per_class} series ...")
        make_corpus(Path(tmp), per_class=args.per_class, seed=args.seed)
        print("extracting statistic features ...")
        data = extract_features_from_directory(Path(tmp), ClassifierConfig())

    registry = {
        "forest": RandomForest(ForestConfig(num_trees=75, seed=args.seed)),
        "tree": DecisionTree(),
        "pruned_tree": DecisionTree(TreeConfig(prune_purity=0.5)),
        "adaboost": AdaBoost(BoostConfig(num_iterations=20)),
        "vote": VotingEnsemble(
            members=(
                RandomForest(ForestConfig(num_trees=25, seed=args.seed + 1)),
                DecisionTree(),
                AdaBoost(BoostConfig(num_iterations=10)),
            )
        ),
        "stack": StackingEnsemble(
            members=(
                RandomForest(ForestConfig(num_trees=25, seed=args.seed + 2)),
                DecisionTree(),
            ),
            seed=args.seed,
        ),
    }
    plan = TrialPlan(trials=args.trials, base_seed=args.seed, seed_rule="mix")
    print(f"running {len(registry)} learners x {plan.trials} trials ...")
    start = time.perf_counter()
    report = run_benchmark(registry, data, plan, metric=args.metric, parallel=args.parallel)
    print(f"done in {time.perf_counter() - start:.1f}s\n")
    print(report.to_table())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
