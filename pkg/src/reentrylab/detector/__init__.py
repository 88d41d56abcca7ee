"""Harmful-transaction classifiers over monitor metadata.

Five model families share one entry point: :func:`fit` turns a
:class:`ModelSpec` plus a labelled :class:`Dataset` into a
:class:`TrainedModel`. Tree models and naive Bayes consume raw features;
logistic regression, k-NN, and the SVMs see standardized features through a
scaler fitted on the training split only.
"""

from __future__ import annotations

from typing import Sequence

from .base import (
    FEATURE_NAMES,
    MODEL_KINDS,
    SCALED_KINDS,
    Dataset,
    DegenerateTraining,
    DimensionMismatch,
    FeatureVector,
    ModelSpec,
    Scaler,
    TrainedModel,
    check_training_labels,
    extract_features,
)
from .bayes import GaussianNBClassifier
from .forest import RandomForestClassifier
from .linear import LogisticRegressionClassifier, lr_loss_and_grad
from .neighbors import KNNClassifier
from .svm import LinearSVMClassifier, PolySVMClassifier, poly3_kernel
from .tree import DecisionTreeClassifier, best_split, gini_impurity

__all__ = [
    "FEATURE_NAMES",
    "MODEL_KINDS",
    "SCALED_KINDS",
    "Dataset",
    "DegenerateTraining",
    "DimensionMismatch",
    "FeatureVector",
    "ModelSpec",
    "Scaler",
    "TrainedModel",
    "extract_features",
    "fit",
    "predict",
    "decision_scores",
    "GaussianNBClassifier",
    "RandomForestClassifier",
    "LogisticRegressionClassifier",
    "lr_loss_and_grad",
    "KNNClassifier",
    "LinearSVMClassifier",
    "PolySVMClassifier",
    "poly3_kernel",
    "DecisionTreeClassifier",
    "best_split",
    "gini_impurity",
]


def _build_core(spec: ModelSpec):
    if spec.kind == "rf":
        return RandomForestClassifier(n_trees=spec.n_trees, seed=spec.seed)
    if spec.kind == "nb":
        return GaussianNBClassifier()
    if spec.kind == "lr":
        return LogisticRegressionClassifier()
    if spec.kind == "knn":
        return KNNClassifier(n_neighbors=spec.n_neighbors)
    if spec.kind == "svm":
        if spec.kernel == "poly3":
            return PolySVMClassifier(seed=spec.seed)
        return LinearSVMClassifier(seed=spec.seed)
    raise ValueError(f"unknown model kind {spec.kind!r}")


def fit(spec: ModelSpec, train: Dataset) -> TrainedModel:
    """Train one model on the dataset's masked features."""
    X = train.matrix()
    y = train.labels()
    check_training_labels(y)
    scaler = None
    if spec.kind in SCALED_KINDS:
        scaler = Scaler().fit(X)
        X = scaler.transform(X)
    core = _build_core(spec).fit(X, y)
    return TrainedModel(
        spec=spec, feature_mask=train.feature_mask, scaler=scaler, core=core
    )


def predict(model: TrainedModel, x: Sequence[float]) -> int:
    return model.predict(x)


def decision_scores(model: TrainedModel, x: Sequence[float]) -> float:
    return model.decision_score(x)
