"""Gaussian naive Bayes with variance smoothing.

Per class: empirical prior, per-feature mean and population variance. Every
variance gets 1e-9 times the largest feature variance of the whole training
set added, which keeps likelihoods finite for near-constant features.
"""

from __future__ import annotations

import numpy as np

VAR_SMOOTHING = 1e-9


class GaussianNBClassifier:
    def __init__(self) -> None:
        self.classes_: np.ndarray | None = None
        self.priors_: np.ndarray | None = None
        self.means_: np.ndarray | None = None
        self.vars_: np.ndarray | None = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GaussianNBClassifier":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        self.classes_ = np.array([0, 1])
        eps = VAR_SMOOTHING * float(np.max(X.var(axis=0)))
        priors, means, variances = [], [], []
        for c in (0, 1):
            rows = X[y == c]
            priors.append(rows.shape[0] / X.shape[0])
            means.append(rows.mean(axis=0))
            variances.append(rows.var(axis=0) + eps)
        self.priors_ = np.array(priors)
        self.means_ = np.array(means)
        self.vars_ = np.array(variances)
        return self

    def _log_joint(self, x: np.ndarray) -> np.ndarray:
        """log P(class) + log P(x | class) for both classes."""
        out = np.empty(2)
        for c in (0, 1):
            var = self.vars_[c]
            diff = x - self.means_[c]
            log_lik = -0.5 * np.sum(np.log(2.0 * np.pi * var) + diff * diff / var)
            out[c] = np.log(self.priors_[c]) + log_lik
        return out

    def posterior(self, x: np.ndarray) -> np.ndarray:
        """Normalized class posterior; the two entries sum to one."""
        joint = self._log_joint(x)
        shifted = joint - joint.max()
        weights = np.exp(shifted)
        return weights / weights.sum()

    def predict_one(self, x: np.ndarray) -> int:
        return 1 if self.posterior(x)[1] > 0.5 else 0

    def decision_one(self, x: np.ndarray) -> float:
        return float(self.posterior(x)[1])

    def describe(self) -> dict:
        return {
            "type": "gaussian_nb",
            "priors": self.priors_.tolist(),
            "means": self.means_.tolist(),
            "variances": self.vars_.tolist(),
        }
