"""Support vector machines trained by seeded epoch subgradient descent.

Both variants minimize the usual regularized hinge objective

    lambda/2 ||w||^2 + (1/n) sum_i max(0, 1 - y_i f(x_i)),   lambda = 1/(C n)

with the classic 1/(lambda t) step schedule over 200 epochs of seeded
shuffles, so training is deterministic given the seed. The linear variant
learns an explicit weight vector over standardized features with an
appended bias column; the polynomial variant keeps the dual coefficients of
a degree-3 kernel K(u, v) = (1 + u.v)^3.
"""

from __future__ import annotations

import random

import numpy as np

EPOCHS = 200
C = 1.0


def _signed(y: np.ndarray) -> np.ndarray:
    return 2.0 * np.asarray(y, dtype=np.float64) - 1.0


class LinearSVMClassifier:
    def __init__(self, seed: int = 0, epochs: int = EPOCHS, c: float = C):
        self.seed = seed
        self.epochs = epochs
        self.c = c
        self.w: np.ndarray | None = None  # last entry is the bias weight

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LinearSVMClassifier":
        X = np.asarray(X, dtype=np.float64)
        Xa = np.hstack([X, np.ones((X.shape[0], 1))])
        yy = _signed(y)
        n = Xa.shape[0]
        lam = 1.0 / (self.c * n)
        w = np.zeros(Xa.shape[1])
        rng = random.Random(self.seed)
        t = 0
        for _ in range(self.epochs):
            order = list(range(n))
            rng.shuffle(order)
            for i in order:
                t += 1
                eta = 1.0 / (lam * t)
                margin = yy[i] * float(w @ Xa[i])
                w = (1.0 - eta * lam) * w
                if margin < 1.0:
                    w = w + (eta / n) * yy[i] * Xa[i]
        self.w = w
        return self

    def margin(self, x: np.ndarray) -> float:
        xa = np.append(np.asarray(x, dtype=np.float64), 1.0)
        return float(self.w @ xa)

    def predict_one(self, x: np.ndarray) -> int:
        return 1 if self.margin(x) > 0.0 else 0

    def decision_one(self, x: np.ndarray) -> float:
        return self.margin(x)

    def describe(self) -> dict:
        return {
            "type": "linear_svm",
            "seed": self.seed,
            "epochs": self.epochs,
            "weights": self.w.tolist(),
        }


def poly3_kernel(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return (1.0 + A @ B.T) ** 3


class PolySVMClassifier:
    """Kernelized variant: dual coefficients over the training set."""

    def __init__(self, seed: int = 0, epochs: int = EPOCHS, c: float = C):
        self.seed = seed
        self.epochs = epochs
        self.c = c
        self.X_: np.ndarray | None = None
        self.yy_: np.ndarray | None = None
        self.alpha_: np.ndarray | None = None
        self.steps_: int = 0

    def fit(self, X: np.ndarray, y: np.ndarray) -> "PolySVMClassifier":
        X = np.asarray(X, dtype=np.float64)
        yy = _signed(y)
        n = X.shape[0]
        lam = 1.0 / (self.c * n)
        K = poly3_kernel(X, X)
        alpha = np.zeros(n)
        rng = random.Random(self.seed)
        t = 0
        for _ in range(self.epochs):
            order = list(range(n))
            rng.shuffle(order)
            for i in order:
                t += 1
                f = float((alpha * yy) @ K[:, i]) / (lam * t)
                if yy[i] * f < 1.0:
                    alpha[i] += 1.0
        self.X_ = X
        self.yy_ = yy
        self.alpha_ = alpha
        self.steps_ = t
        return self

    def margin(self, x: np.ndarray) -> float:
        k = poly3_kernel(self.X_, np.asarray(x, dtype=np.float64).reshape(1, -1))
        lam = 1.0 / (self.c * self.X_.shape[0])
        return float((self.alpha_ * self.yy_) @ k[:, 0]) / (lam * self.steps_)

    def predict_one(self, x: np.ndarray) -> int:
        return 1 if self.margin(x) > 0.0 else 0

    def decision_one(self, x: np.ndarray) -> float:
        return self.margin(x)

    def describe(self) -> dict:
        return {
            "type": "poly3_svm",
            "seed": self.seed,
            "epochs": self.epochs,
            "support": int(np.count_nonzero(self.alpha_)),
        }
