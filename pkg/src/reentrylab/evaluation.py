"""Cross-validated evaluation: folds, metrics, reports, correlations.

The protocol is stratified 10-fold cross-validation repeated 10 times with
per-repetition fold seeds. Confusion counts are taken per fold, turned into
metrics per fold, and the report stores the arithmetic mean over all
repetition x fold cells alongside every raw value, so any other aggregation
can be recomputed later. Metrics are exact rationals internally; division by
an empty denominator yields 0 and sets a degenerate flag instead of raising.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .detector import Dataset, ModelSpec, TrainedModel, fit
from .detector.base import FEATURE_NAMES
from .rng import Rng


class EmptyConfusion(ValueError):
    pass


class TooFewSamples(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            tn=self.tn + other.tn,
            fn=self.fn + other.fn,
        )


METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "fpr", "fnr")


@dataclass(frozen=True)
class MetricValues:
    """Classification metrics as exact fractions plus degeneracy flags."""

    accuracy: Fraction
    precision: Fraction
    recall: Fraction
    f1: Fraction
    fpr: Fraction
    fnr: Fraction
    degenerate: frozenset[str] = frozenset()

    def as_floats(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in METRIC_NAMES}


def _ratio(num: int, den: int, flag: str, flags: set[str]) -> Fraction:
    if den == 0:
        flags.add(flag)
        return Fraction(0)
    return Fraction(num, den)


def compute_metrics(counts: ConfusionCounts) -> MetricValues:
    """Metrics from confusion counts; harmful transactions are positives."""
    n = counts.total
    if n == 0:
        raise EmptyConfusion("confusion counts are all zero")
    flags: set[str] = set()
    accuracy = Fraction(counts.tp + counts.tn, n)
    precision = _ratio(counts.tp, counts.tp + counts.fp, "precision", flags)
    recall = _ratio(counts.tp, counts.tp + counts.fn, "recall", flags)
    if precision + recall == 0:
        flags.add("f1")
        f1 = Fraction(0)
    else:
        f1 = 2 * precision * recall / (precision + recall)
    fpr = _ratio(counts.fp, counts.fp + counts.tn, "fpr", flags)
    fnr = _ratio(counts.fn, counts.fn + counts.tp, "fnr", flags)
    return MetricValues(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        fpr=fpr,
        fnr=fnr,
        degenerate=frozenset(flags),
    )


def stratified_kfold(
    dataset: Dataset, k: int, rng: random.Random
) -> list[list[int]]:
    """Split sample indices into k folds with per-class balance.

    Each class is shuffled independently and dealt round-robin; the classes
    start at staggered folds so the leftover samples do not pile onto the
    same folds. Per-fold class counts never differ from the global ratio by
    more than one sample.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    by_class: dict[int, list[int]] = {}
    for i, sample in enumerate(dataset.samples):
        if sample.label is None:
            raise ValueError(f"sample {sample.tx_id} is unlabelled")
        by_class.setdefault(sample.label, []).append(i)
    folds: list[list[int]] = [[] for _ in range(k)]
    for class_pos, label in enumerate(sorted(by_class)):
        indices = list(by_class[label])
        if len(indices) < k:
            raise TooFewSamples(
                f"class {label} has {len(indices)} samples, fewer than {k} folds"
            )
        rng.shuffle(indices)
        offset = class_pos * (k // 2)
        for j, idx in enumerate(indices):
            folds[(offset + j) % k].append(idx)
    return [sorted(fold) for fold in folds]


@dataclass(frozen=True)
class FoldResult:
    repetition: int
    fold: int
    counts: ConfusionCounts
    metrics: MetricValues


@dataclass(frozen=True)
class ModelResult:
    """All evaluation cells for one model on one feature mask."""

    kind: str
    folds: tuple[FoldResult, ...]

    def mean(self, metric: str) -> Fraction:
        values = [getattr(f.metrics, metric) for f in self.folds]
        return sum(values, Fraction(0)) / len(values)

    def means(self) -> dict[str, float]:
        return {name: float(self.mean(name)) for name in METRIC_NAMES}

    def repetition_counts(self) -> list[ConfusionCounts]:
        pooled: dict[int, ConfusionCounts] = {}
        for f in self.folds:
            pooled[f.repetition] = pooled.get(f.repetition, ConfusionCounts()) + f.counts
        return [pooled[r] for r in sorted(pooled)]


@dataclass(frozen=True)
class ExperimentReport:
    feature_mask: tuple[str, ...]
    folds: int
    repetitions: int
    base_seed: int
    models: Mapping[str, ModelResult]

    def to_json_dict(self) -> dict:
        out = {
            "feature_mask": list(self.feature_mask),
            "folds": self.folds,
            "repetitions": self.repetitions,
            "base_seed": self.base_seed,
            "models": {},
        }
        for kind in sorted(self.models):
            result = self.models[kind]
            out["models"][kind] = {
                "mean": result.means(),
                "per_repetition": [
                    {
                        "repetition": r,
                        "tp": c.tp,
                        "fp": c.fp,
                        "tn": c.tn,
                        "fn": c.fn,
                    }
                    for r, c in enumerate(result.repetition_counts())
                ],
                "per_fold": [
                    {
                        "repetition": f.repetition,
                        "fold": f.fold,
                        "tp": f.counts.tp,
                        "fp": f.counts.fp,
                        "tn": f.counts.tn,
                        "fn": f.counts.fn,
                        **{k: float(v) for k, v in f.metrics.as_floats().items()},
                        "degenerate": sorted(f.metrics.degenerate),
                    }
                    for f in result.folds
                ],
            }
        return out


FitFunction = Callable[[ModelSpec, Dataset], TrainedModel]


def run_experiment(
    dataset: Dataset,
    specs: Sequence[ModelSpec],
    *,
    repetitions: int = 10,
    k: int = 10,
    base_seed: int = 0,
    fit_fn: FitFunction = fit,
) -> ExperimentReport:
    """Repeated stratified k-fold evaluation of every spec on the dataset.

    Fold assignment for repetition r is seeded with base_seed + r; each
    (model, repetition, fold) training derives its own model seed, so the
    whole experiment is reproducible from base_seed alone.
    """
    kinds = [s.kind for s in specs]
    if len(set(kinds)) != len(kinds):
        raise ValueError("duplicate model kinds in experiment")
    X = dataset.matrix()
    y = dataset.labels()
    results: dict[str, list[FoldResult]] = {s.kind: [] for s in specs}
    seed_root = Rng(base_seed)
    for r in range(repetitions):
        folds = stratified_kfold(dataset, k, random.Random(base_seed + r))
        for fold_idx, test_indices in enumerate(folds):
            test_set = set(test_indices)
            train_indices = [i for i in range(len(dataset)) if i not in test_set]
            train = dataset.subset(train_indices)
            for spec in specs:
                model_seed = seed_root.child(spec.kind, spec.seed, r, fold_idx).seed
                model = fit_fn(spec.with_seed(model_seed), train)
                tp = fp = tn = fn = 0
                for i in test_indices:
                    pred = model.predict(X[i])
                    if y[i] == 1 and pred == 1:
                        tp += 1
                    elif y[i] == 1:
                        fn += 1
                    elif pred == 1:
                        fp += 1
                    else:
                        tn += 1
                counts = ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)
                results[spec.kind].append(
                    FoldResult(
                        repetition=r,
                        fold=fold_idx,
                        counts=counts,
                        metrics=compute_metrics(counts),
                    )
                )
    return ExperimentReport(
        feature_mask=dataset.feature_mask,
        folds=k,
        repetitions=repetitions,
        base_seed=base_seed,
        models={kind: ModelResult(kind, tuple(fold_list)) for kind, fold_list in results.items()},
    )


def run_ablation(
    dataset: Dataset,
    specs: Sequence[ModelSpec],
    *,
    drop: str = "avg_stack_depth",
    repetitions: int = 10,
    k: int = 10,
    base_seed: int = 0,
    fit_fn: FitFunction = fit,
) -> ExperimentReport:
    """The same experiment with one feature removed from the mask."""
    mask = tuple(n for n in dataset.feature_mask if n != drop)
    if mask == dataset.feature_mask:
        raise ValueError(f"feature {drop!r} not in the active mask")
    return run_experiment(
        dataset.with_mask(mask),
        specs,
        repetitions=repetitions,
        k=k,
        base_seed=base_seed,
        fit_fn=fit_fn,
    )


# --- correlation ------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pearson correlations over the four features plus the label."""

    names: tuple[str, ...]
    values: np.ndarray
    defined: np.ndarray

    def value(self, a: str, b: str) -> float:
        i, j = self.names.index(a), self.names.index(b)
        return float(self.values[i, j])

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("",) + self.names)
        for i, name in enumerate(self.names):
            row: list[str] = [name]
            for j in range(len(self.names)):
                if self.defined[i, j]:
                    row.append(f"{self.values[i, j]:.6f}")
                else:
                    row.append("undefined")
            writer.writerow(row)
        return out.getvalue()


def correlation_matrix(dataset: Dataset) -> CorrelationMatrix:
    """Pearson correlation of every masked feature column and the label.

    Pairs involving a zero-variance column are flagged undefined rather than
    given a value. For defined pairs the matrix is symmetric with an exact
    unit diagonal.
    """
    names = dataset.feature_mask + ("label",)
    columns = np.column_stack([dataset.matrix(), dataset.labels().astype(np.float64)])
    n_cols = columns.shape[1]
    centred = columns - columns.mean(axis=0)
    stds = columns.std(axis=0)
    values = np.zeros((n_cols, n_cols))
    defined = np.zeros((n_cols, n_cols), dtype=bool)
    n = columns.shape[0]
    for i in range(n_cols):
        for j in range(n_cols):
            if stds[i] == 0.0 or stds[j] == 0.0:
                continue
            defined[i, j] = True
            if i == j:
                values[i, j] = 1.0
            else:
                cov = float(np.dot(centred[:, i], centred[:, j])) / n
                values[i, j] = cov / (stds[i] * stds[j])
    return CorrelationMatrix(names=names, values=values, defined=defined)


def write_correlation_csv(path: str, matrix: CorrelationMatrix) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(matrix.to_csv())


__all__ = [
    "ConfusionCounts",
    "MetricValues",
    "METRIC_NAMES",
    "EmptyConfusion",
    "TooFewSamples",
    "compute_metrics",
    "stratified_kfold",
    "FoldResult",
    "ModelResult",
    "ExperimentReport",
    "run_experiment",
    "run_ablation",
    "CorrelationMatrix",
    "correlation_matrix",
    "write_correlation_csv",
]
