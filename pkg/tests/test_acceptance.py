"""Acceptance suite: one test per release criterion, each printing a
PASS line (run with ``pytest tests/test_acceptance.py -v -s``).

Expected values come from independent oracles defined in this module
(brute-force neighbor scans, manual quantile fences, a confusion-matrix
scorer), never from the code paths under test.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from tsforge.cli import main as cli_main
from tsforge.core import FeatureTable, FormatError, TSFrame
from tsforge.bench import TrialPlan, run_benchmark, score
from tsforge.features import (
    BLOCK_STAT_NAMES,
    WindowConfig,
    matrify,
    statify,
)
from tsforge.learners import (
    AdaBoost,
    BoostConfig,
    DecisionTree,
    ForestConfig,
    RandomForest,
    TreeConfig,
    VotingEnsemble,
)
from tsforge.preprocess import (
    ImputerConfig,
    SeriesKind,
    aggregate,
    detect_series_kind,
    impute_knn,
    normalize_monotonic,
    remove_outliers,
)
from tsforge.tsclassifier import (
    FEATURE_SCHEMA,
    ClassifierConfig,
    ModelArtifact,
    classify,
    load_model,
    save_model,
    testing_accuracy as accuracy_of,
    train,
)

from conftest import FIXTURES, hourly_frame
from synth_sensors import make_corpus


def note(criterion: int, message: str) -> None:
    print(f"[criterion {criterion:02d}] PASS - {message}")


def random_raw_series(rng, n_min=50, n_max=500) -> TSFrame:
    """Irregular raw series: minute-level timestamps, missing values, gaps."""
    n = int(rng.integers(n_min, n_max + 1))
    start = np.datetime64("2018-01-01T00:00", "s") + np.timedelta64(
        int(rng.integers(0, 500_000)) * 60, "s"
    )
    steps = rng.integers(10, 150, size=n)  # minutes between raw readings
    ts = start + np.cumsum(steps).astype("timedelta64[m]").astype("timedelta64[s]")
    values = rng.normal(50, 12, n)
    missing = rng.random(n) < rng.uniform(0.0, 0.6)
    if missing.all():
        missing[int(rng.integers(0, n))] = False
    values[missing] = np.nan
    return TSFrame(ts, values)


def test_c01_imputation_completeness():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    for _ in range(200):
        raw = random_raw_series(rng)
        series = aggregate(raw)
        filled = impute_knn(series, ImputerConfig(max_passes=len(series)))
        assert filled.n_missing == 0
        sv = statify(filled)
        assert sv.bcount == 0
        for name in BLOCK_STAT_NAMES[1:]:
            assert math.isnan(getattr(sv, name))
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    note(1, f"200 series aggregated and imputed to completeness in {elapsed:.1f}s")


def single_pass_knn_oracle(values: np.ndarray) -> np.ndarray:
    """Per missing index, look one snapshot slot left and right, take the
    median of whatever is present (their midpoint when both are)."""
    snapshot = values.copy()
    out = values.copy()
    for i in range(len(values)):
        if not np.isnan(snapshot[i]):
            continue
        neighbors = []
        if i - 1 >= 0 and not np.isnan(snapshot[i - 1]):
            neighbors.append(snapshot[i - 1])
        if i + 1 < len(values) and not np.isnan(snapshot[i + 1]):
            neighbors.append(snapshot[i + 1])
        if len(neighbors) == 1:
            out[i] = neighbors[0]
        elif len(neighbors) == 2:
            out[i] = (neighbors[0] + neighbors[1]) / 2.0
    return out


def test_c02_single_pass_imputation_matches_oracle():
    rng = np.random.default_rng(102)
    for _ in range(100):
        raw = random_raw_series(rng, n_min=10, n_max=200)
        series = aggregate(raw)
        got = impute_knn(series, ImputerConfig(k=1, max_passes=1))
        expected = single_pass_knn_oracle(series.values)
        assert np.array_equal(got.values, expected, equal_nan=True)
    note(2, "single-pass k=1 imputation equals the brute-force neighbor oracle")


def test_c03_monotonic_round_trip():
    rng = np.random.default_rng(103)
    for _ in range(100):
        n = int(rng.integers(10, 400))
        values = float(rng.uniform(0, 1000)) + np.cumsum(rng.uniform(0.01, 5.0, n))
        frame = hourly_frame(values)
        assert detect_series_kind(frame) is SeriesKind.STRICTLY_MONOTONIC
        out = normalize_monotonic(frame)
        rebuilt = values[0] + np.cumsum(out.values[1:])
        assert np.abs(rebuilt - values[1:]).max() < 1e-9
    note(3, "100 strictly-monotonic series reconstructed from differences within 1e-9")


def manual_fences(values: np.ndarray, multiplier: float = 1.5):
    """Independent fence oracle via hand-rolled interpolated quartiles."""
    v = np.sort(values)
    n = v.size

    def quantile(q):
        h = (n - 1) * q
        lo = int(math.floor(h))
        hi = min(lo + 1, n - 1)
        return v[lo] + (h - lo) * (v[hi] - v[lo])

    q1, q3 = quantile(0.25), quantile(0.75)
    return q1 - multiplier * (q3 - q1), q3 + multiplier * (q3 - q1)


def test_c04_outlier_repair():
    spike = hourly_frame([1.0, 1.0, 1.0, 1.0, 100.0, 1.0, 1.0, 1.0, 1.0])
    repaired = remove_outliers(spike)
    assert repaired.values[4] == 1.0
    others = np.arange(9) != 4
    assert np.array_equal(repaired.values[others], spike.values[others])

    rng = np.random.default_rng(104)
    certified = 0
    while certified < 100:
        values = rng.uniform(0, 1, int(rng.integers(8, 80)))
        lo, hi = manual_fences(values)
        if not ((values >= lo) & (values <= hi)).all():
            continue
        certified += 1
        frame = hourly_frame(values)
        assert remove_outliers(frame) == frame
    note(4, "spike repaired to 1.0 bitwise-cleanly; 100 certified-clean series unchanged")


def test_c05_matrifier_exhaustive_audit():
    checked = 0
    for n in range(1, 31):
        values = np.arange(1.0, n + 1.0)
        frame = hourly_frame(values)
        for size in range(1, 6):
            for stride in range(1, 4):
                for ahead in range(1, 4):
                    if n < size + ahead:
                        continue
                    table = matrify(frame, WindowConfig(size, stride, ahead))
                    expected_rows = (n - size - ahead) // stride + 1
                    assert table.n_rows == expected_rows
                    for j in range(expected_rows):
                        offset = j * stride
                        for c in range(size):
                            assert table.columns[c][j] == values[offset + c]
                        assert table.columns[size][j] == values[offset + size + ahead - 1]
                    checked += 1
    note(5, f"window matrix audited over {checked} (n,size,stride,ahead) combinations")


def confusion_matrix_fscore(actual, predicted) -> float:
    classes = sorted(set(actual) | set(predicted))
    matrix = {a: {p: 0 for p in classes} for a in classes}
    for a, p in zip(actual, predicted):
        matrix[a][p] += 1
    f1s = []
    for cls in classes:
        if sum(matrix[cls].values()) == 0:
            continue
        tp = matrix[cls][cls]
        fp = sum(matrix[o][cls] for o in classes if o != cls)
        fn = sum(matrix[cls][o] for o in classes if o != cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(
            0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        )
    return sum(f1s) / len(f1s)


def test_c06_mean_fscore_matches_oracle():
    rng = np.random.default_rng(106)
    labels = list("abcdefg")
    for _ in range(1000):
        k = int(rng.integers(2, 8))
        n = int(rng.integers(1, 80))
        actual = [labels[i] for i in rng.integers(0, k, n)]
        predicted = [labels[i] for i in rng.integers(0, k, n)]
        assert score("mean_fscore", actual, predicted) == confusion_matrix_fscore(
            actual, predicted
        )
    note(6, "mean F-score equals the confusion-matrix oracle on 1000 label pairs")


def test_c07_synthetic_sensor_classifier(tmp_path):
    start = time.perf_counter()
    passing = 0
    accuracies = []
    for seed in range(10):
        root = tmp_path / f"seed{seed}"
        make_corpus(root / "train", per_class=10, seed=9000 + seed)
        make_corpus(root / "test", per_class=5, seed=9500 + seed, start_index=50)
        cfg = ClassifierConfig(
            trdirectory=str(root / "train"),
            tstdirectory=str(root / "test"),
            modeldirectory=str(root / "model"),
            num_trees=75,
            seed=seed,
        )
        accuracy = accuracy_of(classify(cfg, train(cfg)))
        accuracies.append(accuracy)
        passing += accuracy >= 0.80
    elapsed = time.perf_counter() - start
    assert passing >= 9, f"accuracies: {accuracies}"
    assert elapsed < 60.0
    note(
        7,
        f"classifier reached >=0.80 accuracy in {passing}/10 seeds "
        f"(min {min(accuracies):.2f}) in {elapsed:.1f}s",
    )


@pytest.fixture(scope="module")
def sensor_stat_table(tmp_path_factory) -> FeatureTable:
    root = tmp_path_factory.mktemp("bench_corpus")
    make_corpus(root, per_class=25, seed=7)
    return extract_stats(root)


def extract_stats(root) -> FeatureTable:
    from tsforge.tsclassifier import extract_features_from_directory

    return extract_features_from_directory(root, ClassifierConfig())


def test_c08_benchmark_determinism_and_forest_dominance(sensor_stat_table):
    data = sensor_stat_table
    forest_wins = 0
    for rep in range(10):
        registry = {
            "forest": RandomForest(ForestConfig(num_trees=50, seed=rep)),
            "pruned_tree": DecisionTree(TreeConfig(prune_purity=0.5)),
            "adaboost": AdaBoost(BoostConfig(num_iterations=15)),
            "vote": VotingEnsemble(
                members=(
                    DecisionTree(),
                    AdaBoost(BoostConfig(num_iterations=10)),
                    RandomForest(ForestConfig(num_trees=10, seed=rep + 50)),
                )
            ),
        }
        plan = TrialPlan(trials=5, base_seed=rep, seed_rule="mix")
        report = run_benchmark(registry, data, plan)
        means = [r.mean for r in report.rows]
        assert means == sorted(means, reverse=True)
        assert all(r.n == 5 for r in report.rows)
        if rep < 2:  # schedule independence spot-checked with a live pool
            parallel = run_benchmark(registry, data, plan, parallel=True, max_workers=4)
            assert parallel == report
        order = [r.model for r in report.rows]
        forest_wins += order.index("forest") < order.index("pruned_tree")
    assert forest_wins >= 8
    note(
        8,
        f"parallel == sequential reports; forest outranked the pruned tree "
        f"in {forest_wins}/10 repetitions",
    )


def test_c09_model_persistence(tmp_path):
    rng = np.random.default_rng(109)
    X = rng.normal(size=(150, len(FEATURE_SCHEMA)))
    y = np.array([lab for lab in "abc" for _ in range(50)], dtype=object)
    forest = RandomForest(ForestConfig(num_trees=15, seed=4)).fit(X, y)
    artifact = ModelArtifact(
        schema=FEATURE_SCHEMA,
        labels=("a", "b", "c"),
        forest=forest,
        config={"num_trees": 15},
        created="2024-06-01T00:00:00Z",
    )
    path = tmp_path / "model.tsml"
    save_model(artifact, path)
    probe = rng.normal(size=(100, len(FEATURE_SCHEMA)))
    before = artifact.forest.transform(probe)
    after = load_model(path).forest.transform(probe)
    assert (before == after).all()

    corrupted = bytearray(path.read_bytes())
    corrupted[3] ^= 0x55
    bad_path = tmp_path / "corrupt.tsml"
    bad_path.write_bytes(bytes(corrupted))
    with pytest.raises(FormatError):
        load_model(bad_path)
    note(9, "save/load reproduces 100 predictions exactly; bad magic raises cleanly")


def _run_twice(capsys, tmp_path, name, build_args, include_stdout=True):
    """Run a CLI invocation twice; assert exit 0 and byte-identical output.

    ``include_stdout=False`` for commands whose stdout echoes the output
    path (which necessarily differs between the two runs); their product
    files are still compared byte for byte.
    """
    blobs = []
    for attempt in ("x", "y"):
        outdir = tmp_path / f"{name}_{attempt}"
        outdir.mkdir()
        argv, outputs = build_args(outdir)
        code = cli_main(argv)
        captured = capsys.readouterr()
        assert code == 0, f"{name}: exit {code}, stderr: {captured.err}"
        blob = captured.out.encode() if include_stdout else b""
        for produced in outputs:
            blob += Path(produced).read_bytes()
        blobs.append(blob)
    assert blobs[0] == blobs[1], f"{name}: outputs differ between runs"


def test_c10_cli_end_to_end(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    gaps = str(FIXTURES / "gaps.csv")
    training = str(FIXTURES / "sensors" / "training")
    testing = str(FIXTURES / "sensors" / "testing")

    _run_twice(
        capsys, tmp_path, "stats", lambda out: (["stats", gaps, "--processmissing"], [])
    )
    _run_twice(
        capsys,
        tmp_path,
        "clean",
        lambda out: (
            ["clean", gaps, "--impute", "--outliers", "--out", str(out / "clean.csv")],
            [out / "clean.csv"],
        ),
    )
    _run_twice(
        capsys,
        tmp_path,
        "plot",
        lambda out: (
            ["plot", gaps, "--interval", "1h", "--out", str(out / "plot.svg")],
            [out / "plot.svg"],
        ),
    )
    _run_twice(
        capsys,
        tmp_path,
        "train",
        lambda out: (
            ["tsc-train", training, str(out / "model"), "--num-trees", "20", "--seed", "11"],
            [out / "model" / "model.tsml", out / "model" / "features.csv"],
        ),
        include_stdout=False,
    )
    model_dir = tmp_path / "train_x" / "model"
    _run_twice(
        capsys,
        tmp_path,
        "classify",
        lambda out: (
            [
                "tsc-classify",
                testing,
                str(model_dir),
                "--out",
                str(out / "predictions.csv"),
            ],
            [out / "predictions.csv"],
        ),
    )
    _run_twice(
        capsys,
        tmp_path,
        "bench",
        lambda out: (
            [
                "bench",
                str(FIXTURES / "bench_features.csv"),
                str(FIXTURES / "registry.json"),
                "--trials",
                "2",
                "--seed",
                "3",
                "--seed-rule",
                "mix",
                "--out",
                str(out / "report.csv"),
            ],
            [out / "report.csv"],
        ),
    )
    note(10, "stats/clean/plot/tsc-train/tsc-classify/bench all exit 0, byte-stable")
