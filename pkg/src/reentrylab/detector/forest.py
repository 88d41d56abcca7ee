"""Random forest: bagged CART trees with per-node feature subsampling.

Every tree derives its own PRNG from (forest seed, tree index), draws a
bootstrap sample of the training set, and considers floor(sqrt(d)) features
per node. Prediction is the modal vote of the trees; an exact tie predicts
the benign class.
"""

from __future__ import annotations

import math
import random

import numpy as np

from ..rng import Rng
from .tree import DecisionTreeClassifier


class RandomForestClassifier:
    def __init__(self, n_trees: int = 100, seed: int = 0):
        self.n_trees = n_trees
        self.seed = seed
        self.trees: list[DecisionTreeClassifier] = []

    def tree_rng(self, index: int) -> random.Random:
        return Rng(self.seed).child("tree", index).stream()

    def bootstrap_indices(self, index: int, n: int) -> list[int]:
        """The bootstrap sample tree ``index`` trains on (drawn first)."""
        rng = self.tree_rng(index)
        return [rng.randrange(n) for _ in range(n)]

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForestClassifier":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n, d = X.shape
        max_features = max(1, math.isqrt(d))
        self.trees = []
        for t in range(self.n_trees):
            rng = self.tree_rng(t)
            idx = [rng.randrange(n) for _ in range(n)]
            tree = DecisionTreeClassifier(max_features=max_features)
            tree.fit(X[idx], y[idx], rng)
            self.trees.append(tree)
        return self

    def tree_votes(self, x: np.ndarray) -> list[int]:
        return [tree.predict_one(x) for tree in self.trees]

    def predict_one(self, x: np.ndarray) -> int:
        votes = self.tree_votes(x)
        ones = sum(votes)
        return 1 if ones * 2 > len(votes) else 0

    def decision_one(self, x: np.ndarray) -> float:
        votes = self.tree_votes(x)
        return sum(votes) / len(votes)

    def describe(self) -> dict:
        return {
            "type": "random_forest",
            "n_trees": self.n_trees,
            "seed": self.seed,
            "node_counts": [t.node_count() for t in self.trees],
        }
