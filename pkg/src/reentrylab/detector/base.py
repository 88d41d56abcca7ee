"""Shared detector types: feature vectors, datasets, model specs, scaling."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..monitor import Observation

FEATURE_NAMES = ("gas_used", "bal_diff_c1", "bal_diff_c2", "avg_stack_depth")

MODEL_KINDS = ("rf", "nb", "lr", "knn", "svm")

# trees and naive Bayes work on raw features; the rest standardize
SCALED_KINDS = frozenset({"lr", "knn", "svm"})


class DegenerateTraining(ValueError):
    """Training set holds fewer than two classes (or is empty)."""


class DimensionMismatch(ValueError):
    """Input feature count does not match what the model was fitted on."""


@dataclass(frozen=True)
class FeatureVector:
    """One transaction's metadata features, optionally labelled."""

    tx_id: str
    gas_used: float
    bal_diff_c1: float
    bal_diff_c2: float
    avg_stack_depth: float
    label: int | None = None

    def values(self, mask: tuple[str, ...] = FEATURE_NAMES) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in mask)


def extract_features(obs: Observation) -> FeatureVector:
    """Reduce a monitor observation to the model-facing feature vector."""
    return FeatureVector(
        tx_id=obs.tx_id,
        gas_used=float(obs.gas_used),
        bal_diff_c1=float(obs.bal_diff_c1),
        bal_diff_c2=float(obs.bal_diff_c2),
        avg_stack_depth=obs.avg_stack_depth,
    )


@dataclass(frozen=True)
class Dataset:
    """Labelled samples plus the active feature mask."""

    samples: tuple[FeatureVector, ...]
    feature_mask: tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self) -> None:
        unknown = [n for n in self.feature_mask if n not in FEATURE_NAMES]
        if unknown:
            raise ValueError(f"unknown features in mask: {unknown}")
        if not self.feature_mask:
            raise ValueError("feature mask must keep at least one feature")
        ids = [s.tx_id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicated tx_id in dataset")

    def __len__(self) -> int:
        return len(self.samples)

    def matrix(self) -> np.ndarray:
        return np.array(
            [s.values(self.feature_mask) for s in self.samples], dtype=np.float64
        ).reshape(len(self.samples), len(self.feature_mask))

    def labels(self) -> np.ndarray:
        out = []
        for s in self.samples:
            if s.label is None:
                raise ValueError(f"sample {s.tx_id} is unlabelled")
            out.append(s.label)
        return np.array(out, dtype=np.int64)

    def with_mask(self, mask: Sequence[str]) -> "Dataset":
        return Dataset(samples=self.samples, feature_mask=tuple(mask))

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(
            samples=tuple(self.samples[i] for i in indices),
            feature_mask=self.feature_mask,
        )


@dataclass(frozen=True)
class ModelSpec:
    """What to train: a model kind, its hyperparameters, and a seed."""

    kind: str
    seed: int = 0
    n_trees: int = 100
    n_neighbors: int = 5
    kernel: str = "linear"  # svm only: "linear" | "poly3"

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kernel not in ("linear", "poly3"):
            raise ValueError(f"unknown svm kernel {self.kernel!r}")

    def with_seed(self, seed: int) -> "ModelSpec":
        return replace(self, seed=seed)


class Scaler:
    """Per-feature standardization fitted on training data only."""

    def __init__(self) -> None:
        self.mean: np.ndarray | None = None
        self.scale: np.ndarray | None = None

    def fit(self, X: np.ndarray) -> "Scaler":
        self.mean = X.mean(axis=0)
        std = X.std(axis=0)
        std[std == 0.0] = 1.0  # constant features pass through centred
        self.scale = std
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        assert self.mean is not None and self.scale is not None
        return (X - self.mean) / self.scale


class TrainedModel:
    """A fitted classifier bound to the feature mask it was trained on."""

    def __init__(
        self,
        spec: ModelSpec,
        feature_mask: tuple[str, ...],
        scaler: Scaler | None,
        core,
    ):
        self.spec = spec
        self.feature_mask = feature_mask
        self.scaler = scaler
        self.core = core

    @property
    def n_features(self) -> int:
        return len(self.feature_mask)

    def _prepare(self, x: Sequence[float]) -> np.ndarray:
        row = np.asarray(x, dtype=np.float64)
        if row.ndim != 1 or row.shape[0] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} features, got shape {row.shape}"
            )
        if self.scaler is not None:
            row = self.scaler.transform(row.reshape(1, -1))[0]
        return row

    def predict(self, x: Sequence[float]) -> int:
        return int(self.core.predict_one(self._prepare(x)))

    def decision_score(self, x: Sequence[float]) -> float:
        return float(self.core.decision_one(self._prepare(x)))

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.predict(row) for row in np.asarray(X)], dtype=np.int64)

    def dump(self) -> str:
        """Self-describing text serialization for diagnostics."""
        payload = {
            "kind": self.spec.kind,
            "seed": self.spec.seed,
            "feature_mask": list(self.feature_mask),
            "scaler": None
            if self.scaler is None
            else {
                "mean": [float(v) for v in self.scaler.mean],
                "scale": [float(v) for v in self.scaler.scale],
            },
            "core": self.core.describe(),
        }
        return json.dumps(payload, indent=2)


def check_training_labels(y: np.ndarray) -> None:
    if y.size == 0 or np.unique(y).size < 2:
        raise DegenerateTraining("training data must contain both classes")
