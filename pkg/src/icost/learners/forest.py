"""Bagged forest of weighted CART trees."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from ._common import check_problem, check_rows
from .tree import TreeModel, grow_tree

DEFAULT_N_TREES = 100


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple[TreeModel, ...]
    features_per_split: int | None
    seed: int
    n_features: int

    kind = "forest"

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def score(self, X) -> np.ndarray:
        """Mean over trees of the positive-class leaf share."""
        X = check_rows(X, self.n_features)
        return np.mean([t.leaf_share(X) for t in self.trees], axis=0)

    def predict(self, X) -> np.ndarray:
        return (self.score(X) > 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "features_per_split": self.features_per_split,
            "seed": self.seed,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, doc) -> "ForestModel":
        return cls(tuple(TreeModel.from_dict(t) for t in doc["trees"]),
                   doc["features_per_split"], int(doc["seed"]), int(doc["n_features"]))


def _resolve_max_features(max_features, d: int) -> int | None:
    if max_features is None:
        return None
    if max_features == "sqrt":
        return max(1, math.ceil(math.sqrt(d)))
    m = int(max_features)
    if m < 1:
        raise ValueError("max_features must be >= 1")
    return min(m, d)


def _fit_one(X, y, w, seq: np.random.SeedSequence, bootstrap: bool, m, min_samples_split, max_depth):
    rng = np.random.default_rng(seq)
    n = len(y)
    idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
    return grow_tree(X[idx], y[idx], w[idx], min_samples_split, max_depth, m, rng)


def train_forest(X, y, weights=None, n_trees: int = DEFAULT_N_TREES, seed: int = 0,
                 max_features="sqrt", bootstrap: bool = True, min_samples_split: int = 2,
                 max_depth: int | None = None, n_jobs: int = 1) -> ForestModel:
    """Each tree sees a size-n bootstrap of the rows, keeping each drawn row's weight.

    Tree ``i`` draws from its own stream ``SeedSequence(seed).spawn(n_trees)[i]``,
    so results do not depend on ``n_jobs``.
    """
    X, y, w = check_problem(X, y, weights)
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    m = _resolve_max_features(max_features, X.shape[1])
    seqs = np.random.SeedSequence(seed).spawn(n_trees)
    args = (bootstrap, m, min_samples_split, max_depth)
    if n_jobs == 1:
        trees = [_fit_one(X, y, w, s, *args) for s in seqs]
    else:
        trees = Parallel(n_jobs=n_jobs)(delayed(_fit_one)(X, y, w, s, *args) for s in seqs)
    return ForestModel(tuple(trees), m, int(seed), X.shape[1])
