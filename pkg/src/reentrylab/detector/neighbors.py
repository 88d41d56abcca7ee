"""k-nearest-neighbor voting on standardized features.

Euclidean distance, k=5 by default. Equal distances are broken by the lower
training index (the stable sort guarantees it), which keeps predictions
deterministic on datasets with repeated points.
"""

from __future__ import annotations

import numpy as np


class KNNClassifier:
    def __init__(self, n_neighbors: int = 5):
        self.n_neighbors = n_neighbors
        self.X_: np.ndarray | None = None
        self.y_: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "KNNClassifier":
        self.X_ = np.asarray(X, dtype=np.float64)
        self.y_ = np.asarray(y, dtype=np.int64)
        return self

    def neighbors(self, x: np.ndarray) -> np.ndarray:
        d2 = np.sum((self.X_ - x) ** 2, axis=1)
        order = np.argsort(d2, kind="stable")
        return order[: self.n_neighbors]

    def predict_one(self, x: np.ndarray) -> int:
        votes = self.y_[self.neighbors(x)]
        ones = int(np.sum(votes))
        return 1 if ones * 2 > votes.size else 0

    def decision_one(self, x: np.ndarray) -> float:
        votes = self.y_[self.neighbors(x)]
        return float(np.mean(votes))

    def describe(self) -> dict:
        return {
            "type": "knn",
            "n_neighbors": self.n_neighbors,
            "train_size": int(self.X_.shape[0]),
        }
