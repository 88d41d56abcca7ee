"""CART-style decision tree grown on Gini impurity.

Thresholds are midpoints between consecutive distinct sorted feature values.
Nodes split greedily on the largest impurity decrease; exact ties prefer the
lowest feature index and then the lowest threshold, so training is fully
deterministic given the (optional) feature-subsampling PRNG. Trees grow until
leaves are pure or smaller than ``min_samples_split``; there is no depth cap.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np


def gini_impurity(y: np.ndarray) -> float:
    """Gini impurity of a label multiset; 0 when pure, 0.5 at a 50/50 mix."""
    n = y.size
    if n == 0:
        return 0.0
    ones = int(np.sum(y))
    p1 = ones / n
    p0 = 1.0 - p1
    return 1.0 - p0 * p0 - p1 * p1


@dataclass(frozen=True)
class BestSplit:
    feature: int
    threshold: float
    gain: float


def best_split(
    X: np.ndarray, y: np.ndarray, features: list[int]
) -> BestSplit | None:
    """Largest-gain (feature, midpoint threshold) among ``features``.

    Returns None when no candidate feature has two distinct values. Ties on
    gain resolve to the lowest feature index, then the lowest threshold.
    """
    n = y.size
    parent = gini_impurity(y)
    best: BestSplit | None = None
    for f in sorted(features):
        xs = X[:, f]
        order = np.argsort(xs, kind="stable")
        sx = xs[order]
        sy = y[order]
        cuts = np.nonzero(sx[1:] > sx[:-1])[0]
        if cuts.size == 0:
            continue
        ones = np.cumsum(sy)
        total_ones = ones[-1]
        n_left = cuts + 1
        ones_left = ones[cuts]
        zeros_left = n_left - ones_left
        n_right = n - n_left
        ones_right = total_ones - ones_left
        zeros_right = n_right - ones_right
        g_left = 1.0 - (ones_left / n_left) ** 2 - (zeros_left / n_left) ** 2
        g_right = 1.0 - (ones_right / n_right) ** 2 - (zeros_right / n_right) ** 2
        gains = parent - (n_left * g_left + n_right * g_right) / n
        i = int(np.argmax(gains))  # first max = lowest threshold
        candidate = BestSplit(
            feature=f,
            threshold=float((sx[cuts[i]] + sx[cuts[i] + 1]) / 2.0),
            gain=float(gains[i]),
        )
        if best is None or candidate.gain > best.gain:
            best = candidate
    return best


@dataclass
class _Leaf:
    label: int


@dataclass
class _Node:
    feature: int
    threshold: float
    left: object
    right: object


def _majority(y: np.ndarray) -> int:
    ones = int(np.sum(y))
    zeros = y.size - ones
    return 1 if ones > zeros else 0  # ties fall back to the benign class


class DecisionTreeClassifier:
    """Plain binary CART; optionally subsamples features per node."""

    def __init__(self, max_features: int | None = None, min_samples_split: int = 2):
        self.max_features = max_features
        self.min_samples_split = min_samples_split
        self.root = None
        self.n_features_ = 0

    def fit(
        self, X: np.ndarray, y: np.ndarray, rng: random.Random | None = None
    ) -> "DecisionTreeClassifier":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        self.n_features_ = X.shape[1]
        if self.max_features is not None and rng is None:
            raise ValueError("feature subsampling needs a PRNG")
        self.root = self._grow(X, y, rng)
        return self

    def _grow(self, X: np.ndarray, y: np.ndarray, rng: random.Random | None):
        if (
            y.size < self.min_samples_split
            or np.all(y == y[0])
        ):
            return _Leaf(_majority(y))
        d = X.shape[1]
        if self.max_features is not None and self.max_features < d:
            features = sorted(rng.sample(range(d), self.max_features))
            split = best_split(X, y, features)
            if split is None:
                # sampled features were constant here; widen the search
                split = best_split(X, y, list(range(d)))
        else:
            split = best_split(X, y, list(range(d)))
        if split is None:
            return _Leaf(_majority(y))
        mask = X[:, split.feature] <= split.threshold
        left = self._grow(X[mask], y[mask], rng)
        right = self._grow(X[~mask], y[~mask], rng)
        return _Node(split.feature, split.threshold, left, right)

    def predict_one(self, x: np.ndarray) -> int:
        node = self.root
        while isinstance(node, _Node):
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.label

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.predict_one(row) for row in np.asarray(X)], dtype=np.int64)

    def decision_one(self, x: np.ndarray) -> float:
        return float(self.predict_one(x))

    def node_count(self) -> int:
        def count(node) -> int:
            if isinstance(node, _Leaf):
                return 1
            return 1 + count(node.left) + count(node.right)

        return count(self.root)

    def describe(self) -> dict:
        def walk(node):
            if isinstance(node, _Leaf):
                return {"leaf": node.label}
            return {
                "feature": node.feature,
                "threshold": node.threshold,
                "left": walk(node.left),
                "right": walk(node.right),
            }

        return {"type": "cart", "tree": walk(self.root)}
