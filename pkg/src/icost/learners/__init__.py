"""Cost-sensitive base learners.

All learners take 0/1 targets (1 = positive/minority) and one positive weight
per row, and expose ``score(X)`` where larger means more positive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from ..errors import ValidationError
from .forest import ForestModel, train_forest
from .logreg import LogRegModel, train_logreg
from .svm import LinearSvmModel, train_linear_svm
from .tree import TreeModel, train_tree

MODEL_FORMAT = "icost-model"
MODEL_VERSION = 1

LEARNERS = ("logreg", "svm", "tree", "forest")

_MODEL_TYPES = {
    "logreg": LogRegModel,
    "svm": LinearSvmModel,
    "tree": TreeModel,
    "forest": ForestModel,
}

# parameters each learner accepts from a config (seed is supplied by the caller)
_PARAMS = {
    "logreg": {"l2", "max_iter", "tol"},
    "svm": {"lam", "epochs"},
    "tree": {"min_samples_split", "max_depth"},
    "forest": {"n_trees", "max_features", "bootstrap", "min_samples_split", "max_depth", "n_jobs"},
}


@dataclass(frozen=True)
class LearnerConfig:
    name: str = "logreg"
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in LEARNERS:
            raise ValidationError(f"unknown learner {self.name!r}; choose from {list(LEARNERS)}")
        unknown = set(self.params) - _PARAMS[self.name]
        if unknown:
            raise ValidationError(f"learner {self.name!r} does not accept {sorted(unknown)}")
        object.__setattr__(self, "params", dict(self.params))

    def __hash__(self):
        return hash((self.name, json.dumps(self.params, sort_keys=True)))

    def fit(self, X, y, weights=None, seed: int = 0):
        p = dict(self.params)
        if self.name == "logreg":
            return train_logreg(X, y, weights, **p)
        if self.name == "svm":
            return train_linear_svm(X, y, weights, seed=seed, **p)
        if self.name == "tree":
            return train_tree(X, y, weights, **p)
        return train_forest(X, y, weights, seed=seed, **p)

    def to_dict(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, doc) -> "LearnerConfig":
        if isinstance(doc, str):
            return cls(doc)
        return cls(doc.get("name", "logreg"), doc.get("params", {}))


def predict_score(model, x) -> float | np.ndarray:
    """Score for one row (returns a float) or a matrix of rows (returns an array)."""
    x = np.asarray(x, dtype=float)
    s = model.score(x)
    return float(s[0]) if x.ndim == 1 else s


def model_to_dict(model) -> dict:
    return {"format": MODEL_FORMAT, "version": MODEL_VERSION, "kind": model.kind,
            "params": model.to_dict()}


def model_from_dict(doc: Mapping):
    if doc.get("format") != MODEL_FORMAT:
        raise ValidationError("not an icost model document")
    if doc.get("version") != MODEL_VERSION:
        raise ValidationError(f"unsupported model document version {doc.get('version')}")
    kind = doc.get("kind")
    if kind not in _MODEL_TYPES:
        raise ValidationError(f"unknown model kind {kind!r}")
    return _MODEL_TYPES[kind].from_dict(doc["params"])


def same_model(a, b) -> bool:
    """Exact (bitwise) parameter equality of two fitted models."""
    return json.dumps(model_to_dict(a), sort_keys=True) == json.dumps(model_to_dict(b), sort_keys=True)


__all__ = [
    "LEARNERS", "LearnerConfig", "LogRegModel", "LinearSvmModel", "TreeModel", "ForestModel",
    "train_logreg", "train_linear_svm", "train_tree", "train_forest",
    "predict_score", "model_to_dict", "model_from_dict", "same_model",
]
