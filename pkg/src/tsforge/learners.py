"""Native learners: a CART-style decision tree with purity pruning, a
seeded random forest, SAMME multiclass boosting over stumps, and the
vote/stack/best meta-ensembles.

Trees scan features in index order and thresholds in ascending order,
keeping the first best split, so training is independent of row order.
All randomness derives from explicit config seeds through
:func:`tsforge.core.mix_seed`; identical data, config, and seed always
reproduce identical models.  Class-vote ties break toward the
lexicographically smallest label.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Any, ClassVar

import numpy as np

from .core import (
    DegenerateLabelsError,
    EmptyInputError,
    FeatureTable,
    SchemaError,
    Transformer,
    mix_seed,
)
from .features import OneHotEncoder

__all__ = [
    "TreeConfig",
    "ForestConfig",
    "BoostConfig",
    "EnsembleConfig",
    "DecisionTree",
    "RandomForest",
    "AdaBoost",
    "VotingEnsemble",
    "StackingEnsemble",
    "BestOfEnsemble",
    "train_tree",
    "train_forest",
    "train_adaboost",
    "ensemble_train",
    "predict",
]


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int | None = None
    min_samples_leaf: int = 1
    prune_purity: float = 1.0

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if not 0.0 <= self.prune_purity <= 1.0:
            raise ValueError("prune_purity must lie in [0, 1]")


@dataclass(frozen=True)
class ForestConfig:
    num_trees: int = 75
    feature_subset: int | str = "sqrt"
    bootstrap: bool = True
    seed: int = 0
    tree: TreeConfig = TreeConfig()

    def __post_init__(self):
        if self.num_trees < 1:
            raise ValueError("num_trees must be >= 1")

    def candidates(self, n_features: int) -> int:
        if self.feature_subset == "sqrt":
            return max(1, int(np.sqrt(n_features)))
        m = int(self.feature_subset)
        if m < 1:
            raise ValueError("feature_subset must be >= 1 or 'sqrt'")
        return min(m, n_features)


@dataclass(frozen=True)
class BoostConfig:
    num_iterations: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.num_iterations < 1:
            raise ValueError("num_iterations must be >= 1")


@dataclass(frozen=True)
class EnsembleConfig:
    members: tuple = ()
    mode: str = "vote"  # vote | stack | best
    stack_holdout: float = 0.3
    best_folds: int = 3
    seed: int = 0

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        if self.mode not in ("vote", "stack", "best"):
            raise ValueError(f"unknown ensemble mode {self.mode!r}")
        if not 0.0 < self.stack_holdout < 1.0:
            raise ValueError("stack_holdout must lie in (0, 1)")
        if self.best_folds < 2:
            raise ValueError("best_folds must be >= 2")


# ---------------------------------------------------------------------------
# Matrix/label plumbing
# ---------------------------------------------------------------------------


def _as_matrix(data) -> tuple[np.ndarray, list[str] | None]:
    if isinstance(data, FeatureTable):
        return data.to_matrix(), list(data.feature_names)
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    return arr, None


def _check_schema(state: dict, data) -> np.ndarray:
    X, names = _as_matrix(data)
    fitted = state.get("schema")
    if fitted is not None and names is not None and names != fitted:
        raise SchemaError(f"feature columns {names} differ from fit-time {fitted}")
    if X.shape[1] != state["n_features"]:
        raise SchemaError(
            f"expected {state['n_features']} feature columns, got {X.shape[1]}"
        )
    return X


def _encode_labels(labels) -> tuple[list, np.ndarray]:
    y = list(labels)
    classes = sorted(set(y))
    index = {c: i for i, c in enumerate(classes)}
    return classes, np.array([index[v] for v in y], dtype=np.intp)


def _decode(classes: list, indices: np.ndarray) -> np.ndarray:
    out = np.empty(indices.size, dtype=object)
    for i, k in enumerate(indices):
        out[i] = classes[k]
    return out


def _take_rows(data, idx: np.ndarray):
    if isinstance(data, FeatureTable):
        return data.take(idx)
    return np.asarray(data, dtype=np.float64)[idx]


# ---------------------------------------------------------------------------
# Single tree
# ---------------------------------------------------------------------------


def _best_split_for_feature(x, yi, w, n_classes, min_leaf):
    """Best (gini, threshold) for one feature column, or None.

    Thresholds are midpoints between consecutive distinct sorted values;
    candidates leaving fewer than ``min_leaf`` rows on either side are
    skipped.  Ties resolve to the smallest threshold.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    n = xs.size
    boundary = np.flatnonzero(xs[1:] != xs[:-1])
    boundary = boundary[(boundary + 1 >= min_leaf) & (n - boundary - 1 >= min_leaf)]
    if boundary.size == 0:
        return None
    onehot = np.zeros((n, n_classes), dtype=np.float64)
    onehot[np.arange(n), yi[order]] = w[order]
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]
    left = cum[boundary]
    right = total - left
    ln = left.sum(axis=1)
    rn = right.sum(axis=1)
    valid = (ln > 0) & (rn > 0)
    if not valid.any():
        return None
    gini = np.full(boundary.size, np.inf)
    lv, rv = ln[valid], rn[valid]
    gl = 1.0 - ((left[valid] / lv[:, None]) ** 2).sum(axis=1)
    gr = 1.0 - ((right[valid] / rv[:, None]) ** 2).sum(axis=1)
    gini[valid] = (lv * gl + rv * gr) / (lv + rv)
    j = int(np.argmin(gini))
    threshold = (xs[boundary[j]] + xs[boundary[j] + 1]) / 2.0
    return float(gini[j]), float(threshold)


def _grow_tree(X, yi, w, idx, depth, cfg, n_classes, rng, n_candidates):
    counts = np.bincount(yi[idx], weights=w[idx], minlength=n_classes)
    majority = int(np.argmax(counts))
    purity = float(counts[majority] / counts.sum())
    leaf = {"leaf": True, "label": majority}
    if purity == 1.0 or idx.size < 2 * cfg.min_samples_leaf:
        return leaf
    if cfg.max_depth is not None and depth >= cfg.max_depth:
        return leaf
    n_features = X.shape[1]
    if n_candidates is not None and n_candidates < n_features:
        features = np.sort(rng.choice(n_features, size=n_candidates, replace=False))
    else:
        features = np.arange(n_features)
    best = None
    for f in features:
        found = _best_split_for_feature(
            X[idx, f], yi[idx], w[idx], n_classes, cfg.min_samples_leaf
        )
        if found is not None and (best is None or found[0] < best[0]):
            best = (found[0], int(f), found[1])
    if best is None:
        return leaf
    _, feature, threshold = best
    mask = X[idx, feature] <= threshold
    left = _grow_tree(X, yi, w, idx[mask], depth + 1, cfg, n_classes, rng, n_candidates)
    right = _grow_tree(X, yi, w, idx[~mask], depth + 1, cfg, n_classes, rng, n_candidates)
    if left["leaf"] and right["leaf"] and purity >= cfg.prune_purity:
        return leaf
    return {
        "leaf": False,
        "feature": int(feature),
        "threshold": float(threshold),
        "left": left,
        "right": right,
    }


def _fit_tree(X, yi, w, cfg: TreeConfig, n_classes, rng=None, n_candidates=None):
    if X.shape[0] == 0:
        raise EmptyInputError("cannot train a tree on zero rows")
    return _grow_tree(
        X, yi, w, np.arange(X.shape[0]), 0, cfg, n_classes, rng, n_candidates
    )


def _tree_predict(node: dict, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0], dtype=np.intp)
    for i, row in enumerate(X):
        cur = node
        while not cur["leaf"]:
            cur = cur["left"] if row[cur["feature"]] <= cur["threshold"] else cur["right"]
        out[i] = cur["label"]
    return out


@dataclass(frozen=True)
class DecisionTree(Transformer):
    """CART-style classification tree with Gini splits and purity pruning.

    After growing, any internal node whose children are both leaves and
    whose own majority fraction reaches ``prune_purity`` collapses into
    a leaf; at the default of 1.0 nothing collapses, at 0.0 the tree
    reduces to a majority-class stump.
    """

    kind: ClassVar[str] = "learner"
    config: TreeConfig = TreeConfig()
    state: Any = None

    def _fit(self, data, labels):
        X, names = _as_matrix(data)
        classes, yi = _encode_labels(labels)
        root = _fit_tree(X, yi, np.ones(X.shape[0]), self.config, len(classes))
        return {
            "classes": classes,
            "tree": root,
            "schema": names,
            "n_features": X.shape[1],
        }

    def _transform(self, data):
        X = _check_schema(self.state, data)
        return _decode(self.state["classes"], _tree_predict(self.state["tree"], X))


# ---------------------------------------------------------------------------
# Random forest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomForest(Transformer):
    """Bootstrap ensemble of Gini trees with random feature candidates.

    Tree ``t`` draws its RNG from ``mix_seed(seed, t)``, so the model is
    a pure function of (data, config) regardless of training order or
    thread scheduling.  Prediction is the plurality vote over trees.
    """

    kind: ClassVar[str] = "learner"
    config: ForestConfig = ForestConfig()
    state: Any = None

    def _fit(self, data, labels):
        X, names = _as_matrix(data)
        classes, yi = _encode_labels(labels)
        cfg = self.config
        n = X.shape[0]
        n_candidates = cfg.candidates(X.shape[1]) if X.shape[1] else None
        trees = []
        for t in range(cfg.num_trees):
            rng = np.random.default_rng(mix_seed(cfg.seed, t))
            idx = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
            sub = None if n_candidates == X.shape[1] else n_candidates
            trees.append(
                _grow_tree(X, yi, np.ones(n), idx, 0, cfg.tree, len(classes), rng, sub)
            )
        return {
            "classes": classes,
            "trees": trees,
            "schema": names,
            "n_features": X.shape[1],
        }

    def _transform(self, data):
        X = _check_schema(self.state, data)
        classes = self.state["classes"]
        votes = np.zeros((X.shape[0], len(classes)), dtype=np.int64)
        for tree in self.state["trees"]:
            pred = _tree_predict(tree, X)
            votes[np.arange(X.shape[0]), pred] += 1
        return _decode(classes, np.argmax(votes, axis=1))


# ---------------------------------------------------------------------------
# SAMME boosting over stumps
# ---------------------------------------------------------------------------

_BOOST_EPS = 1e-12


@dataclass(frozen=True)
class AdaBoost(Transformer):
    """SAMME multiclass boosting over depth-1 trees.

    Stage weights are ``ln((1-err)/err) + ln(K-1)``; boosting stops
    early once a stump is perfect (retained with the epsilon-clamped
    weight) or no better than random (discarded).  Prediction is the
    argmax of summed stage weights per class.
    """

    kind: ClassVar[str] = "learner"
    config: BoostConfig = BoostConfig()
    state: Any = None

    def _fit(self, data, labels):
        X, names = _as_matrix(data)
        classes, yi = _encode_labels(labels)
        k = len(classes)
        if k < 2:
            raise DegenerateLabelsError("boosting needs at least 2 classes")
        n = X.shape[0]
        w = np.full(n, 1.0 / n)
        stump_cfg = TreeConfig(max_depth=1)
        stages = []
        for _ in range(self.config.num_iterations):
            stump = _fit_tree(X, yi, w, stump_cfg, k)
            pred = _tree_predict(stump, X)
            err = float(w[pred != yi].sum())
            if err == 0.0:
                alpha = float(np.log((1 - _BOOST_EPS) / _BOOST_EPS) + np.log(k - 1))
                stages.append({"alpha": alpha, "tree": stump})
                break
            if err >= 1.0 - 1.0 / k:
                break
            alpha = float(np.log((1 - err) / err) + np.log(k - 1))
            stages.append({"alpha": alpha, "tree": stump})
            w = w * np.exp(alpha * (pred != yi))
            w = w / w.sum()
        majority = int(np.argmax(np.bincount(yi, minlength=k)))
        return {
            "classes": classes,
            "stages": stages,
            "majority": majority,
            "schema": names,
            "n_features": X.shape[1],
        }

    def _transform(self, data):
        X = _check_schema(self.state, data)
        classes = self.state["classes"]
        if not self.state["stages"]:
            return _decode(
                classes, np.full(X.shape[0], self.state["majority"], dtype=np.intp)
            )
        scores = np.zeros((X.shape[0], len(classes)))
        for stage in self.state["stages"]:
            pred = _tree_predict(stage["tree"], X)
            scores[np.arange(X.shape[0]), pred] += stage["alpha"]
        return _decode(classes, np.argmax(scores, axis=1))


# ---------------------------------------------------------------------------
# Meta-ensembles
# ---------------------------------------------------------------------------


def _mode_label(values):
    counts = Counter(values)
    top = max(counts.values())
    return min(c for c, n in counts.items() if n == top)


@dataclass(frozen=True)
class VotingEnsemble(Transformer):
    """Train every member on the full data; predict by majority vote."""

    kind: ClassVar[str] = "learner"
    members: tuple = ()
    seed: int = 0
    state: Any = None

    def _fit(self, data, labels):
        fitted = tuple(m.fit(data, labels) for m in self.members)
        return {"members": fitted}

    def _transform(self, data):
        preds = [m.transform(data) for m in self.state["members"]]
        n = len(preds[0])
        out = np.empty(n, dtype=object)
        for i in range(n):
            out[i] = _mode_label([p[i] for p in preds])
        return out


@dataclass(frozen=True)
class StackingEnsemble(Transformer):
    """Train members on a seeded split, then a forest meta-learner on
    their one-hot-encoded holdout predictions."""

    kind: ClassVar[str] = "learner"
    members: tuple = ()
    stack_holdout: float = 0.3
    seed: int = 0
    state: Any = None

    def _fit(self, data, labels):
        y = np.asarray(list(labels), dtype=object)
        n = y.size
        n_hold = min(max(int(round(n * self.stack_holdout)), 1), n - 1)
        perm = np.random.default_rng(mix_seed(self.seed, 0)).permutation(n)
        hold, train = np.sort(perm[:n_hold]), np.sort(perm[n_hold:])
        fitted = tuple(
            m.fit(_take_rows(data, train), y[train]) for m in self.members
        )
        meta_table = self._prediction_table(fitted, _take_rows(data, hold))
        encoder = OneHotEncoder().fit(meta_table)
        meta = RandomForest(
            ForestConfig(num_trees=50, seed=mix_seed(self.seed, 1))
        ).fit(encoder.transform(meta_table), y[hold])
        return {"members": fitted, "encoder": encoder, "meta": meta}

    @staticmethod
    def _prediction_table(members, data) -> FeatureTable:
        cols = [np.asarray(m.transform(data), dtype=object) for m in members]
        return FeatureTable([f"member{i}" for i in range(len(members))], cols)

    def _transform(self, data):
        table = self._prediction_table(self.state["members"], data)
        return self.state["meta"].transform(self.state["encoder"].transform(table))


@dataclass(frozen=True)
class BestOfEnsemble(Transformer):
    """Cross-validate every member, keep only the most accurate one
    (first wins ties), and retrain it on the full data."""

    kind: ClassVar[str] = "learner"
    members: tuple = ()
    best_folds: int = 3
    seed: int = 0
    state: Any = None

    def _fit(self, data, labels):
        y = np.asarray(list(labels), dtype=object)
        n = y.size
        folds = min(self.best_folds, n)
        perm = np.random.default_rng(mix_seed(self.seed, 0)).permutation(n)
        chunks = np.array_split(perm, folds)
        best_index, best_score = 0, -1.0
        for i, member in enumerate(self.members):
            accs = []
            for f in range(folds):
                test = np.sort(chunks[f])
                train = np.sort(np.concatenate([chunks[g] for g in range(folds) if g != f]))
                fitted = member.fit(_take_rows(data, train), y[train])
                pred = fitted.transform(_take_rows(data, test))
                accs.append(float(np.mean(np.asarray(pred, dtype=object) == y[test])))
            score = float(np.mean(accs))
            if score > best_score:
                best_index, best_score = i, score
        chosen = self.members[best_index].fit(data, labels)
        return {"chosen_index": best_index, "cv_accuracy": best_score, "model": chosen}

    def _transform(self, data):
        return self.state["model"].transform(data)


# ---------------------------------------------------------------------------
# Functional entry points
# ---------------------------------------------------------------------------


def train_tree(data, labels, config: TreeConfig = TreeConfig()) -> DecisionTree:
    return DecisionTree(config=config).fit(data, labels)


def train_forest(data, labels, config: ForestConfig = ForestConfig()) -> RandomForest:
    return RandomForest(config=config).fit(data, labels)


def train_adaboost(data, labels, config: BoostConfig = BoostConfig()) -> AdaBoost:
    return AdaBoost(config=config).fit(data, labels)


def ensemble_train(data, labels, config: EnsembleConfig) -> Transformer:
    """Train the meta-ensemble selected by ``config.mode``."""
    members = tuple(config.members)
    if config.mode == "vote":
        model = VotingEnsemble(members=members, seed=config.seed)
    elif config.mode == "stack":
        model = StackingEnsemble(
            members=members, stack_holdout=config.stack_holdout, seed=config.seed
        )
    else:
        model = BestOfEnsemble(
            members=members, best_folds=config.best_folds, seed=config.seed
        )
    return model.fit(data, labels)


def predict(model: Transformer, data) -> np.ndarray:
    """Labels for each row of ``data`` from a fitted learner."""
    return model.transform(data)
