"""Sample-weighted linear SVM trained by deterministic sub-gradient descent.

Objective (``lam = 1/C``)::

    lam/2 * |w|^2 + sum_i weight_i * max(0, 1 - y_i (w.x_i + b))

with ``y_i`` in {-1, +1}. Per-instance weights play the role of per-category
penalties, so weights of 1 everywhere give the plain soft-margin SVM.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFinite
from ._common import check_problem, check_rows

DEFAULT_LAMBDA = 1.0
DEFAULT_EPOCHS = 200


@dataclass(frozen=True, eq=False)
class LinearSvmModel:
    w: np.ndarray
    b: float
    lam: float

    kind = "svm"

    @property
    def n_features(self) -> int:
        return len(self.w)

    def decision(self, X) -> np.ndarray:
        X = check_rows(X, self.n_features)
        return X @ self.w + self.b

    def score(self, X) -> np.ndarray:
        """Signed margin."""
        return self.decision(X)

    def predict(self, X) -> np.ndarray:
        return (self.decision(X) > 0).astype(np.int64)

    def to_dict(self) -> dict:
        return {"w": self.w.tolist(), "b": self.b, "lam": self.lam}

    @classmethod
    def from_dict(cls, doc) -> "LinearSvmModel":
        return cls(np.array(doc["w"], dtype=float), float(doc["b"]), float(doc["lam"]))


def signed(y) -> np.ndarray:
    return np.where(np.asarray(y) == 1, 1.0, -1.0)


def objective(params, X, y, weights=None, lam: float = DEFAULT_LAMBDA) -> float:
    """``params`` is ``[w..., b]``; ``y`` is 0/1."""
    w, b = params[:-1], params[-1]
    hinge = np.maximum(0.0, 1.0 - signed(y) * (X @ w + b))
    sw = np.ones(len(y)) if weights is None else weights
    return float(0.5 * lam * (w @ w) + sw @ hinge)


def train_linear_svm(X, y, weights=None, lam: float = DEFAULT_LAMBDA,
                     epochs: int = DEFAULT_EPOCHS, seed: int = 0) -> LinearSvmModel:
    """Pegasos-style cyclic sub-gradient descent; returns the final iterate.

    Dividing the objective by ``n`` gives a mean-form problem with
    regularizer ``lam/n``; step ``t`` therefore uses ``eta = n / (lam * t)``.
    After every step ``w`` is projected onto the ball ``|w| <= sqrt(2 sum(weights) / lam)``,
    which contains the optimum (the objective at ``w = 0, b = 0`` is
    ``sum(weights)``). Without it the huge early steps leave an oversized
    ``w`` and ``b`` that the final iterate is slow to shed.
    One permutation of the rows, drawn from ``seed``, fixes the visiting
    order for every epoch.
    """
    X, y, sw = check_problem(X, y, weights)
    if lam <= 0:
        raise ValueError("lam must be positive")
    n, d = X.shape
    ys = signed(y)
    lam_n = lam / n
    order = np.random.default_rng(seed).permutation(n)
    # per-step numpy calls dominate at small D, so the loop runs on Python lists;
    # w is stored as scale * v so the shrink step is O(1)
    rows = X[order].tolist()
    yo = ys[order].tolist()
    so = sw[order].tolist()
    sq = [float(r @ r) for r in X[order]]
    radius2 = 2.0 * float(sw.sum()) / lam
    v = [0.0] * d
    vv = 0.0  # |v|^2, kept up to date alongside v
    scale = 1.0
    b = 0.0
    t = 0
    for _ in range(epochs):
        for xi, yi, si, xx in zip(rows, yo, so, sq):
            t += 1
            eta = 1.0 / (lam_n * t)
            vx = sum(a * c for a, c in zip(v, xi))
            margin = yi * (scale * vx + b)
            shrink = 1.0 - eta * lam_n
            if shrink == 0.0:
                v = [0.0] * d
                vv = vx = 0.0
                scale = 1.0
            else:
                scale *= shrink
            if margin < 1.0:
                g = eta * si * yi
                gs = g / scale
                v = [a + gs * c for a, c in zip(v, xi)]
                vv = max(vv + 2.0 * gs * vx + gs * gs * xx, 0.0)
                b += g
            norm2 = scale * scale * vv
            if norm2 > radius2:
                scale *= (radius2 / norm2) ** 0.5
        if not (np.isfinite(scale) and np.isfinite(b)):
            raise NonFinite("SVM iterate became non-finite")
        # refresh the running norm so rounding does not accumulate across epochs
        vv = sum(a * a for a in v)
    w = scale * np.array(v)
    if not np.all(np.isfinite(w)):
        raise NonFinite("SVM iterate became non-finite")
    return LinearSvmModel(w, float(b), float(lam))
