"""Sample-weighted logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFinite
from ._common import check_problem, check_rows

DEFAULT_L2 = 1e-4
DEFAULT_MAX_ITER = 1000
DEFAULT_TOL = 1e-8

_ARMIJO = 1e-4


@dataclass(frozen=True, eq=False)
class LogRegModel:
    coefficients: np.ndarray
    intercept: float
    l2: float
    iterations_run: int
    final_loss: float

    kind = "logreg"

    @property
    def n_features(self) -> int:
        return len(self.coefficients)

    def decision(self, X) -> np.ndarray:
        X = check_rows(X, self.n_features)
        return X @ self.coefficients + self.intercept

    def score(self, X) -> np.ndarray:
        """Probability of the positive class."""
        return sigmoid(self.decision(X))

    def predict(self, X) -> np.ndarray:
        return (self.decision(X) > 0).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "coefficients": self.coefficients.tolist(),
            "intercept": self.intercept,
            "l2": self.l2,
            "iterations_run": self.iterations_run,
            "final_loss": self.final_loss,
        }

    @classmethod
    def from_dict(cls, doc) -> "LogRegModel":
        return cls(np.array(doc["coefficients"], dtype=float), float(doc["intercept"]),
                   float(doc["l2"]), int(doc["iterations_run"]), float(doc["final_loss"]))


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def objective(params, X, y, weights=None, l2: float = DEFAULT_L2) -> float:
    """Weighted mean log loss plus ``l2/2 * |coef|^2``.

    The loss is normalized by the total weight, so an integer weight on a row
    is exactly equivalent to repeating the row. ``params`` is
    ``[coef..., intercept]``; the intercept is not penalized.
    """
    theta, b = params[:-1], params[-1]
    z = X @ theta + b
    # -log(sigmoid(z)) = logaddexp(0, -z); -log(1 - sigmoid(z)) = logaddexp(0, z)
    per = np.where(y == 1, np.logaddexp(0.0, -z), np.logaddexp(0.0, z))
    w = np.ones(len(y)) if weights is None else weights
    return float(w @ per / w.sum() + 0.5 * l2 * (theta @ theta))


def gradient(params, X, y, weights=None, l2: float = DEFAULT_L2) -> np.ndarray:
    theta, b = params[:-1], params[-1]
    w = np.ones(len(y)) if weights is None else weights
    r = w * (sigmoid(X @ theta + b) - y) / w.sum()
    g = np.empty_like(params)
    g[:-1] = X.T @ r + l2 * theta
    g[-1] = r.sum()
    return g


def train_logreg(X, y, weights=None, l2: float = DEFAULT_L2, max_iter: int = DEFAULT_MAX_ITER,
                 tol: float = DEFAULT_TOL) -> LogRegModel:
    """Fit from zero initialization with Armijo backtracking line search.

    Stops once the loss changes by less than ``tol`` between iterations or
    after ``max_iter`` iterations. ``y`` holds 0/1 targets.
    """
    X, y, w = check_problem(X, y, weights)
    params = np.zeros(X.shape[1] + 1)
    loss = objective(params, X, y, w, l2)
    step = 1.0
    it = 0
    for it in range(1, max_iter + 1):
        g = gradient(params, X, y, w, l2)
        if not np.all(np.isfinite(g)):
            raise NonFinite(f"non-finite gradient at iteration {it}")
        gg = g @ g
        if gg == 0.0:
            break
        step = min(step * 2.0, 1e6)
        while True:
            cand = params - step * g
            new_loss = objective(cand, X, y, w, l2)
            if new_loss <= loss - _ARMIJO * step * gg:
                break
            step *= 0.5
            if step < 1e-20:
                new_loss, cand = loss, params
                break
        if not np.isfinite(new_loss):
            raise NonFinite(f"non-finite loss at iteration {it}")
        delta = loss - new_loss
        params, loss = cand, new_loss
        if abs(delta) < tol:
            break
    if not np.all(np.isfinite(params)):
        raise NonFinite("training produced non-finite parameters")
    return LogRegModel(params[:-1].copy(), float(params[-1]), float(l2), it, float(loss))
