"""From-scratch CART trees and a Random Forest over feature vectors.

Determinism is a contract: every tree draws from its own PRNG seeded by
(seed, tree_index), so a fixed (dataset, hyperparams, seed) triple yields a
bit-identical model regardless of build order or thread count. Split search
considers midpoints between consecutive distinct sorted values, maximizes
the weighted Gini impurity decrease, and breaks ties toward the lower
feature index, then the lower threshold. Routing at prediction time sends
x <= threshold to the left child.

A single unbootstrapped tree with mtry = d and no depth bound is a plain
CART tree; the forest defaults follow standard practice (the original
study's tuned values were not published).
"""

from __future__ import annotations

import json
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import EmptyNode, SchemaError, SchemaMismatch, SingleClassDataset
from .features import FeatureSchema, FeatureVector

LABELS = ("benign", "suspicious")  # class 0, class 1
MODEL_FORMAT_VERSION = "1"


@dataclass(frozen=True)
class Hyperparams:
    n_trees: int = 300
    max_depth: int | None = None
    min_leaf: int = 1
    mtry: int | None = None  # None -> floor(sqrt(d))
    seed: int = 0
    bootstrap: bool = True

    def resolved_mtry(self, d: int) -> int:
        m = self.mtry if self.mtry is not None else int(math.floor(math.sqrt(d)))
        return max(1, min(d, m))

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "mtry": self.mtry,
            "seed": self.seed,
            "bootstrap": self.bootstrap,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparams":
        return cls(**d)


@dataclass(frozen=True)
class Dataset:
    vectors: tuple[FeatureVector, ...]
    labels: tuple[str, ...]
    schema: FeatureSchema

    def __post_init__(self) -> None:
        if len(self.vectors) != len(self.labels):
            raise SchemaMismatch("vectors and labels must have equal length")
        for v in self.vectors:
            if len(v.values) != len(self.schema):
                raise SchemaMismatch(f"vector for {v.domain!r} does not match schema length")
        for label in self.labels:
            if label not in LABELS:
                raise SchemaMismatch(f"unknown label {label!r}")

    def matrices(self) -> tuple[np.ndarray, np.ndarray]:
        X = np.array([v.values for v in self.vectors], dtype=np.float64)
        y = np.array([LABELS.index(l) for l in self.labels], dtype=np.int64)
        return X, y


def gini_impurity(class_counts) -> float:
    """1 - sum((c_i / n)^2); in [0, 1 - 1/k] for k classes."""
    counts = list(class_counts)
    if any(c < 0 for c in counts):
        raise ValueError("class counts must be non-negative")
    n = sum(counts)
    if n == 0:
        raise EmptyNode("gini impurity of an empty node")
    acc = 1.0
    for c in counts:
        p = c / n
        acc -= p * p
    return acc


# Tree nodes as plain dicts for cheap serialization:
#   leaf:     {"counts": [c0, c1]}
#   internal: {"feature": int, "threshold": float, "left": ..., "right": ...}


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    impurity_decrease: float


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    candidate_features,
    min_leaf: int = 1,
) -> Split | None:
    """Best (feature, threshold) by weighted Gini decrease, or None.

    Thresholds are midpoints between consecutive distinct sorted values.
    Ties break toward (lower feature index, lower threshold); a split must
    strictly decrease impurity and leave >= min_leaf rows on each side.
    """
    n = len(rows)
    if n < 2:
        return None
    ysub = y[rows]
    c1 = int(ysub.sum())
    c0 = n - c1
    g_parent = 1.0 - (c0 / n) * (c0 / n) - (c1 / n) * (c1 / n)
    if g_parent == 0.0:
        return None

    best: Split | None = None
    for f in sorted({int(f) for f in candidate_features}):
        x = X[rows, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ys = ysub[order]
        distinct = xs[1:] != xs[:-1]
        if not distinct.any():
            continue
        boundary_idx = np.nonzero(distinct)[0]  # split between i and i+1
        nl = (boundary_idx + 1).astype(np.float64)
        nr = n - nl
        valid = (nl >= min_leaf) & (nr >= min_leaf)
        if not valid.any():
            continue
        boundary_idx = boundary_idx[valid]
        nl = nl[valid]
        nr = nr[valid]
        cl1 = np.cumsum(ys, dtype=np.float64)[boundary_idx]
        cl0 = nl - cl1
        cr1 = c1 - cl1
        cr0 = nr - cr1
        pl0 = cl0 / nl
        pl1 = cl1 / nl
        pr0 = cr0 / nr
        pr1 = cr1 / nr
        gl = 1.0 - pl0 * pl0 - pl1 * pl1
        gr = 1.0 - pr0 * pr0 - pr1 * pr1
        dec = g_parent - (nl / n) * gl - (nr / n) * gr
        k = int(np.argmax(dec))  # first max = lowest threshold (sorted order)
        d_best = float(dec[k])
        if d_best <= 0.0:
            continue
        i = int(boundary_idx[k])
        threshold = (float(xs[i]) + float(xs[i + 1])) / 2.0
        if best is None or d_best > best.impurity_decrease:
            best = Split(feature=f, threshold=threshold, impurity_decrease=d_best)
    return best


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    hp: Hyperparams,
    rng: np.random.Generator,
    depth: int,
    root_n: int,
    importance: np.ndarray,
) -> dict:
    n = len(rows)
    ysub = y[rows]
    c1 = int(ysub.sum())
    c0 = n - c1
    if c0 == 0 or c1 == 0 or (hp.max_depth is not None and depth >= hp.max_depth) or n < 2:
        return {"counts": [c0, c1]}
    d = X.shape[1]
    mtry = hp.resolved_mtry(d)
    feats = np.arange(d) if mtry >= d else rng.choice(d, size=mtry, replace=False)
    split = best_split(X, y, rows, feats, min_leaf=hp.min_leaf)
    if split is None:
        return {"counts": [c0, c1]}
    importance[split.feature] += (n / root_n) * split.impurity_decrease
    # Positional partition along the sorted order, so float-rounded midpoints
    # can never create an empty side.
    x = X[rows, split.feature]
    order = np.argsort(x, kind="stable")
    xs = x[order]
    nl = int(np.searchsorted(xs, split.threshold, side="right"))
    if nl >= n:  # midpoint rounded up onto the maximum value run
        nl = int(np.searchsorted(xs, split.threshold, side="left"))
    left_rows = rows[order[:nl]]
    right_rows = rows[order[nl:]]
    return {
        "feature": split.feature,
        "threshold": split.threshold,
        "left": _grow_tree(X, y, left_rows, hp, rng, depth + 1, root_n, importance),
        "right": _grow_tree(X, y, right_rows, hp, rng, depth + 1, root_n, importance),
    }


def _tree_seed(seed: int, tree_index: int) -> np.random.SeedSequence:
    # Stable per-tree stream: (seed, namespace, index) hashed by SeedSequence.
    return np.random.SeedSequence((seed & 0xFFFFFFFF, 0x7E55, tree_index))


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[dict, ...]
    schema: FeatureSchema
    hyperparams: Hyperparams
    importances: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "labels": list(LABELS),
            "schema": self.schema.to_dict(),
            "schema_hash": self.schema.content_hash(),
            "hyperparams": self.hyperparams.to_dict(),
            "importances": list(self.importances),
            "trees": list(self.trees),
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True), encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        if d.get("format_version") != MODEL_FORMAT_VERSION:
            raise SchemaError(f"unsupported model format {d.get('format_version')!r}")
        schema = FeatureSchema.from_dict(d["schema"])
        if d.get("schema_hash") != schema.content_hash():
            raise SchemaError("model schema hash mismatch; refusing to load")
        return cls(
            trees=tuple(d["trees"]),
            schema=schema,
            hyperparams=Hyperparams.from_dict(d["hyperparams"]),
            importances=tuple(d["importances"]),
        )

    @classmethod
    def load(cls, path: str | Path) -> "ForestModel":
        return cls.from_dict(json.loads(Path(path).read_text("utf-8")))


def train_forest(ds: Dataset, hp: Hyperparams, n_jobs: int = 1) -> ForestModel:
    """Grow hp.n_trees trees on bootstrap samples; aggregate MDI importances."""
    if hp.n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    X, y = ds.matrices()
    n, d = X.shape
    if n == 0 or len(set(y.tolist())) < 2:
        raise SingleClassDataset("training needs at least one example per class")

    def build(tree_index: int) -> tuple[dict, np.ndarray]:
        rng = np.random.default_rng(_tree_seed(hp.seed, tree_index))
        rows = rng.integers(0, n, size=n) if hp.bootstrap else np.arange(n)
        importance = np.zeros(d, dtype=np.float64)
        tree = _grow_tree(X, y, np.asarray(rows), hp, rng, depth=0, root_n=len(rows), importance=importance)
        return tree, importance

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            built = list(pool.map(build, range(hp.n_trees)))
    else:
        built = [build(i) for i in range(hp.n_trees)]

    trees = tuple(t for t, _ in built)
    raw = np.sum([imp for _, imp in built], axis=0) / max(1, hp.n_trees)
    total = float(raw.sum())
    importances = tuple((raw / total).tolist()) if total > 0 else tuple(raw.tolist())
    return ForestModel(trees=trees, schema=ds.schema, hyperparams=hp, importances=importances)


def _leaf_distribution(tree: dict, values) -> tuple[float, float]:
    node = tree
    while "counts" not in node:
        node = node["left"] if values[node["feature"]] <= node["threshold"] else node["right"]
    c0, c1 = node["counts"]
    total = c0 + c1
    return (c0 / total, c1 / total)


@dataclass(frozen=True)
class Prediction:
    label: str
    probability: float  # averaged share of the suspicious class


def predict(model: ForestModel, v: FeatureVector) -> Prediction:
    """Average per-tree leaf distributions; ties go to benign (conservative)."""
    if len(v.values) != len(model.schema):
        raise SchemaMismatch("vector does not match the model schema")
    p1 = 0.0
    for tree in model.trees:
        p1 += _leaf_distribution(tree, v.values)[1]
    p1 /= len(model.trees)
    return Prediction(label="suspicious" if p1 > 0.5 else "benign", probability=p1)


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IterationMetrics:
    accuracy: float
    per_class: dict  # label -> {"precision","recall","f1","support"}
    weighted: dict  # {"precision","recall","f1"}

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "per_class": self.per_class, "weighted": self.weighted}


@dataclass(frozen=True)
class CVResult:
    iterations: tuple[IterationMetrics, ...]
    means: dict
    stds: dict

    def to_dict(self) -> dict:
        return {
            "iterations": [m.to_dict() for m in self.iterations],
            "means": self.means,
            "stds": self.stds,
        }

    def table(self) -> str:
        """Rows: weighted average, then one per class (accuracy repeats)."""
        lines = [f"{'Target':<20} {'Accuracy':>9} {'Precision':>10} {'Recall':>8} {'F1':>7}"]
        acc = self.means["accuracy"]
        w = self.means["weighted"]
        lines.append(
            f"{'Weighted Avg':<20} {acc:>9.3f} {w['precision']:>10.3f} {w['recall']:>8.3f} {w['f1']:>7.3f}"
        )
        for label in ("suspicious", "benign"):
            c = self.means["per_class"][label]
            lines.append(
                f"{label.title() + ' Domains':<20} {acc:>9.3f} {c['precision']:>10.3f}"
                f" {c['recall']:>8.3f} {c['f1']:>7.3f}"
            )
        return "\n".join(lines)


def _evaluate(y_true: np.ndarray, y_pred: np.ndarray) -> IterationMetrics:
    n = len(y_true)
    accuracy = float((y_true == y_pred).sum() / n)
    per_class = {}
    for cls, label in enumerate(LABELS):
        tp = int(((y_pred == cls) & (y_true == cls)).sum())
        fp = int(((y_pred == cls) & (y_true != cls)).sum())
        fn = int(((y_pred != cls) & (y_true == cls)).sum())
        support = int((y_true == cls).sum())
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[label] = {
            "precision": precision, "recall": recall, "f1": f1, "support": support,
        }
    weighted = {}
    for metric in ("precision", "recall", "f1"):
        weighted[metric] = sum(
            per_class[label][metric] * per_class[label]["support"] for label in LABELS
        ) / n
    return IterationMetrics(accuracy=accuracy, per_class=per_class, weighted=weighted)


def _stratified_split(
    y: np.ndarray, test_fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    train_idx: list[int] = []
    test_idx: list[int] = []
    for cls in (0, 1):
        members = np.nonzero(y == cls)[0]
        if len(members) < 2:
            raise SingleClassDataset(f"class {LABELS[cls]} needs >= 2 examples for a split")
        shuffled = members[rng.permutation(len(members))]
        n_test = int(round(test_fraction * len(members)))
        n_test = min(len(members) - 1, max(1, n_test))
        test_idx.extend(shuffled[:n_test].tolist())
        train_idx.extend(shuffled[n_test:].tolist())
    return np.array(sorted(train_idx)), np.array(sorted(test_idx))


def cross_validate(ds: Dataset, hp: Hyperparams, iterations: int = 20) -> CVResult:
    """Repeated stratified 80/20 shuffle-splits, seeded per iteration."""
    X, y = ds.matrices()
    if len(set(y.tolist())) < 2:
        raise SingleClassDataset("cross-validation needs both classes present")
    results = []
    for it in range(iterations):
        rng = np.random.default_rng(np.random.SeedSequence((hp.seed & 0xFFFFFFFF, 0xCF, it)))
        train_idx, test_idx = _stratified_split(y, 0.2, rng)
        fold_seed = int(np.random.SeedSequence((hp.seed & 0xFFFFFFFF, 0xCF, it, 1)).generate_state(1)[0])
        fold = Dataset(
            vectors=tuple(ds.vectors[i] for i in train_idx),
            labels=tuple(ds.labels[i] for i in train_idx),
            schema=ds.schema,
        )
        model = train_forest(fold, replace(hp, seed=fold_seed))
        preds = np.array(
            [LABELS.index(predict(model, ds.vectors[i]).label) for i in test_idx], dtype=np.int64
        )
        results.append(_evaluate(y[test_idx], preds))

    def agg(fn) -> dict:
        out = {
            "accuracy": fn([m.accuracy for m in results]),
            "weighted": {
                k: fn([m.weighted[k] for m in results]) for k in ("precision", "recall", "f1")
            },
            "per_class": {
                label: {
                    k: fn([m.per_class[label][k] for m in results])
                    for k in ("precision", "recall", "f1")
                }
                for label in LABELS
            },
        }
        return out

    mean = lambda xs: float(statistics.fmean(xs))
    std = lambda xs: float(statistics.pstdev(xs))
    return CVResult(iterations=tuple(results), means=agg(mean), stds=agg(std))


def select_features(model: ForestModel, threshold: float = 0.96) -> FeatureSchema:
    """Shortest importance-ranked prefix reaching the cumulative threshold.

    Ranking ties break toward the lower feature index; the returned schema
    preserves the original relative feature order.
    """
    order = sorted(range(len(model.importances)), key=lambda i: (-model.importances[i], i))
    keep: set[int] = set()
    cumulative = 0.0
    for i in order:
        keep.add(i)
        cumulative += model.importances[i]
        if cumulative >= threshold:
            break
    features = tuple(spec for i, spec in enumerate(model.schema.features) if i in keep)
    return FeatureSchema(features=features, version=model.schema.version)
