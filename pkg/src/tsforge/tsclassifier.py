"""Directory-driven sensor-type classification.

Every CSV in a training directory becomes one feature row: the series
is aggregated, its missing-block lengths are recorded, the gaps are
imputed, and the statistic vector is computed (value stats from the
imputed series, block stats from the pre-imputation gaps, so the
missing-data signature survives repair).  Labels come from filenames
with the trailing digits and extension stripped.  A random forest
trained on these rows is persisted as a self-describing artifact.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np

from .core import (
    DateInterval,
    DegenerateLabelsError,
    EmptyInputError,
    FeatureTable,
    FormatError,
    MissingLabelsError,
    NoDataError,
    SchemaError,
    TSError,
    UnlabeledFileError,
)
from .features import BLOCK_STAT_NAMES, VALUE_STAT_NAMES, missing_blocks, statify
from .ingest import read_csv_datetime
from .learners import ForestConfig, RandomForest
from .preprocess import AggregatorConfig, ImputerConfig, aggregate, impute_knn

__all__ = [
    "ClassifierConfig",
    "ModelArtifact",
    "PredictionTable",
    "FEATURE_SCHEMA",
    "label_from_filename",
    "extract_features_from_directory",
    "train",
    "classify",
    "testing_accuracy",
    "save_model",
    "load_model",
]

FEATURE_SCHEMA: tuple[str, ...] = VALUE_STAT_NAMES + BLOCK_STAT_NAMES

MODEL_MAGIC = b"TSMLMDL1"
MODEL_FILENAME = "model.tsml"
FEATURES_FILENAME = "features.csv"
REPORT_FILENAME = "extraction_report.txt"


@dataclass(frozen=True)
class ClassifierConfig:
    trdirectory: str = ""
    tstdirectory: str = ""
    modeldirectory: str = ""
    num_trees: int = 75
    dateformat: str = "dd/mm/yyyy HH:MM"
    interval: DateInterval = DateInterval("hour", 1)
    k: int = 1
    max_passes: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.num_trees < 1:
            raise ValueError("num_trees must be >= 1")


@dataclass(frozen=True)
class ModelArtifact:
    """A trained forest plus everything needed to validate its inputs."""

    schema: tuple[str, ...]
    labels: tuple
    forest: RandomForest
    config: dict
    created: str
    version: int = 1


@dataclass(frozen=True)
class PredictionTable:
    """Per-file predictions; ``true_label`` is None when the filename
    carries no label."""

    rows: tuple[tuple[str, str | None, str], ...]

    def __post_init__(self):
        names = [r[0] for r in self.rows]
        if len(set(names)) != len(names):
            raise ValueError("prediction filenames must be unique")

    def to_csv(self) -> str:
        lines = ["filename,true_label,predicted_label"]
        for name, true, pred in self.rows:
            lines.append(f"{name},{'' if true is None else true},{pred}")
        return "\n".join(lines) + "\n"


def label_from_filename(name: str) -> str:
    """Label = basename minus extension minus the trailing digit run."""
    if not name:
        raise UnlabeledFileError("empty filename")
    stem = Path(name).name
    if "." in stem:
        stem = stem.rsplit(".", 1)[0]
    label = stem.rstrip("0123456789")
    if not label:
        raise UnlabeledFileError(f"no label remains after stripping digits from {name!r}")
    return label


def _file_stat_row(path: Path, cfg: ClassifierConfig) -> np.ndarray:
    frame = read_csv_datetime(path, cfg.dateformat)
    agg = aggregate(frame, AggregatorConfig(interval=cfg.interval))
    blocks = missing_blocks(agg)
    imputed = impute_knn(
        agg, ImputerConfig(interval=cfg.interval, k=cfg.k, max_passes=cfg.max_passes)
    )
    sv = statify(imputed, processmissing=True, block_lengths=blocks)
    return sv.to_row()


def extract_features_from_directory(
    directory,
    cfg: ClassifierConfig,
    require_labels: bool = True,
    parallel: bool = False,
    max_workers: int | None = None,
) -> FeatureTable:
    """One statistic row per CSV file, ordered by filename.

    Files that fail to parse or summarize are skipped and listed in the
    result's ``meta["errors"]``; if every file fails, :class:`NoDataError`
    is raised.  With ``require_labels`` unset, files whose names carry no
    label get a missing true label instead of an error.
    """
    directory = Path(directory)
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".csv")
    if not files:
        raise NoDataError(f"no CSV files in {directory}")

    def one(path: Path):
        label: str | None
        try:
            label = label_from_filename(path.name)
        except UnlabeledFileError:
            if require_labels:
                raise
            label = None
        return _file_stat_row(path, cfg), label

    results: list[tuple[Path, Any, Exception | None]] = []
    if parallel:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = [pool.submit(one, p) for p in files]
            for path, fut in zip(files, futures):
                try:
                    results.append((path, fut.result(), None))
                except (TSError, OSError, ValueError) as e:
                    results.append((path, None, e))
    else:
        for path in files:
            try:
                results.append((path, one(path), None))
            except (TSError, OSError, ValueError) as e:
                results.append((path, None, e))

    rows, labels, names, errors = [], [], [], []
    for path, payload, err in results:
        if err is not None:
            errors.append((path.name, str(err)))
        else:
            rows.append(payload[0])
            labels.append(payload[1])
            names.append(path.name)
    if not rows:
        raise NoDataError(
            f"no usable CSV files in {directory}: " + "; ".join(e[1] for e in errors)
        )
    matrix = np.vstack(rows)
    table = FeatureTable.from_matrix(
        matrix, names=list(FEATURE_SCHEMA), labels=np.array(labels, dtype=object)
    )
    table.meta["filenames"] = names
    table.meta["errors"] = errors
    return table


def _now_iso() -> str:
    # SOURCE_DATE_EPOCH pins the timestamp for reproducible artifacts
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        t = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        t = datetime.now(tz=timezone.utc)
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def train(cfg: ClassifierConfig, parallel: bool = False) -> ModelArtifact:
    """Extract the training table, fit the forest, persist, return the artifact.

    Writes ``model.tsml`` and ``features.csv`` (the extracted rows with
    filename and label columns) into the model directory, plus an
    ``extraction_report.txt`` sidecar when any file was skipped.
    ``parallel`` runs per-file feature extraction on a worker pool; the
    rows stay filename-ordered either way.
    """
    table = extract_features_from_directory(cfg.trdirectory, cfg, parallel=parallel)
    labels = table.labels()
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise DegenerateLabelsError(
            f"training data has a single class {classes[0]!r}"
        )
    forest = RandomForest(
        ForestConfig(num_trees=cfg.num_trees, seed=cfg.seed)
    ).fit(table.features_only(), labels)
    artifact = ModelArtifact(
        schema=FEATURE_SCHEMA,
        labels=tuple(classes),
        forest=forest,
        config={
            "num_trees": cfg.num_trees,
            "dateformat": cfg.dateformat,
            "interval": str(cfg.interval),
            "k": cfg.k,
            "max_passes": cfg.max_passes,
            "seed": cfg.seed,
        },
        created=_now_iso(),
    )
    modeldir = Path(cfg.modeldirectory)
    modeldir.mkdir(parents=True, exist_ok=True)
    save_model(artifact, modeldir / MODEL_FILENAME)
    full = FeatureTable(
        ["filename"] + list(table.names),
        [np.array(table.meta["filenames"], dtype=object)] + list(table.columns),
        has_labels=True,
    )
    (modeldir / FEATURES_FILENAME).write_text(full.to_csv(), encoding="utf-8")
    if table.meta["errors"]:
        report = "".join(f"{name}: {msg}\n" for name, msg in table.meta["errors"])
        (modeldir / REPORT_FILENAME).write_text(report, encoding="utf-8")
    return artifact


def classify(cfg: ClassifierConfig, artifact: ModelArtifact) -> PredictionTable:
    """Predict a sensor type for every CSV in the test directory."""
    if tuple(artifact.schema) != FEATURE_SCHEMA:
        raise SchemaError(
            "artifact feature schema does not match this library's statistic set"
        )
    table = extract_features_from_directory(cfg.tstdirectory, cfg, require_labels=False)
    preds = artifact.forest.transform(table.features_only())
    truth = table.labels()
    rows = tuple(
        (name, None if truth[i] is None else str(truth[i]), str(preds[i]))
        for i, name in enumerate(table.meta["filenames"])
    )
    return PredictionTable(rows)


def testing_accuracy(predictions: PredictionTable) -> float:
    """Fraction of rows whose prediction equals the filename label."""
    if not predictions.rows:
        raise EmptyInputError("no predictions to score")
    for name, true, _ in predictions.rows:
        if true is None:
            raise MissingLabelsError(f"{name} has no true label")
    hits = sum(1 for _, true, pred in predictions.rows if true == pred)
    return hits / len(predictions.rows)


# ---------------------------------------------------------------------------
# Artifact persistence: MAGIC | 8-byte big-endian metadata length |
# metadata JSON | forest JSON
# ---------------------------------------------------------------------------


def save_model(artifact: ModelArtifact, path) -> None:
    meta = {
        "version": artifact.version,
        "schema": list(artifact.schema),
        "labels": list(artifact.labels),
        "config": artifact.config,
        "created": artifact.created,
    }
    meta_bytes = json.dumps(meta, separators=(",", ":")).encode("utf-8")
    fc = artifact.forest.config
    forest_doc = {
        "config": {
            "num_trees": fc.num_trees,
            "feature_subset": fc.feature_subset,
            "bootstrap": fc.bootstrap,
            "seed": fc.seed,
        },
        "state": {
            "classes": list(artifact.forest.state["classes"]),
            "schema": artifact.forest.state["schema"],
            "n_features": artifact.forest.state["n_features"],
            "trees": artifact.forest.state["trees"],
        },
    }
    forest_bytes = json.dumps(forest_doc, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(len(meta_bytes).to_bytes(8, "big"))
        fh.write(meta_bytes)
        fh.write(forest_bytes)


def load_model(path) -> ModelArtifact:
    blob = Path(path).read_bytes()
    if len(blob) < 16 or blob[:8] != MODEL_MAGIC:
        raise FormatError(f"{path}: bad magic, not a model artifact")
    meta_len = int.from_bytes(blob[8:16], "big")
    if 16 + meta_len > len(blob):
        raise FormatError(f"{path}: truncated metadata block")
    try:
        meta = json.loads(blob[16 : 16 + meta_len].decode("utf-8"))
        forest_doc = json.loads(blob[16 + meta_len :].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FormatError(f"{path}: corrupt artifact payload ({e})") from None
    if meta.get("version") != 1:
        raise FormatError(f"{path}: unsupported artifact version {meta.get('version')!r}")
    state = forest_doc["state"]
    forest = RandomForest(
        config=ForestConfig(
            num_trees=forest_doc["config"]["num_trees"],
            feature_subset=forest_doc["config"]["feature_subset"],
            bootstrap=forest_doc["config"]["bootstrap"],
            seed=forest_doc["config"]["seed"],
        ),
        state={
            "classes": state["classes"],
            "schema": state["schema"],
            "n_features": state["n_features"],
            "trees": state["trees"],
        },
    )
    return ModelArtifact(
        schema=tuple(meta["schema"]),
        labels=tuple(meta["labels"]),
        forest=forest,
        config=meta["config"],
        created=meta["created"],
        version=meta["version"],
    )
