"""Unregularized logistic regression trained by full-batch gradient descent.

Inputs are expected to be standardized upstream. Weights start at zero, the
learning rate is fixed at 0.1, and training stops after 5000 iterations or
when the cross-entropy improves by less than 1e-6 between iterations. The
loss trajectory is retained so optimizer behavior stays auditable.
"""

from __future__ import annotations

import numpy as np

LEARNING_RATE = 0.1
MAX_ITER = 5000
TOL = 1e-6


def lr_loss_and_grad(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray, float]:
    """Mean cross-entropy and its analytic gradient at (w, b)."""
    z = X @ w + b
    # log(1 + e^z) - y z, computed stably
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    p = 1.0 / (1.0 + np.exp(-z))
    err = p - y
    grad_w = X.T @ err / X.shape[0]
    grad_b = float(np.mean(err))
    return loss, grad_w, grad_b


class LogisticRegressionClassifier:
    def __init__(
        self,
        learning_rate: float = LEARNING_RATE,
        max_iter: int = MAX_ITER,
        tol: float = TOL,
    ):
        self.learning_rate = learning_rate
        self.max_iter = max_iter
        self.tol = tol
        self.w: np.ndarray | None = None
        self.b: float = 0.0
        self.loss_history: list[float] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LogisticRegressionClassifier":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        w = np.zeros(X.shape[1])
        b = 0.0
        self.loss_history = []
        previous = None
        for _ in range(self.max_iter):
            loss, grad_w, grad_b = lr_loss_and_grad(w, b, X, y)
            self.loss_history.append(loss)
            if previous is not None and abs(previous - loss) < self.tol:
                break
            previous = loss
            w = w - self.learning_rate * grad_w
            b = b - self.learning_rate * grad_b
        self.w = w
        self.b = b
        return self

    def probability_one(self, x: np.ndarray) -> float:
        z = float(self.w @ x + self.b)
        return 1.0 / (1.0 + np.exp(-z))

    def predict_one(self, x: np.ndarray) -> int:
        return 1 if self.probability_one(x) > 0.5 else 0

    def decision_one(self, x: np.ndarray) -> float:
        return self.probability_one(x)

    def describe(self) -> dict:
        return {
            "type": "logistic_regression",
            "weights": self.w.tolist(),
            "bias": self.b,
            "iterations": len(self.loss_history),
        }
