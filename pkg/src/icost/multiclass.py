"""One-vs-rest decomposition of the cost-sensitive pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .costing import CostSpec, weigh
from .dataset import ImbalanceStats
from .errors import ICostError, TooFewClasses, ValidationError
from .learners import LearnerConfig, model_from_dict, model_to_dict


@dataclass(frozen=True, eq=False)
class BinaryMember:
    label: str
    class_id: int
    model: object
    stats: ImbalanceStats


@dataclass(frozen=True, eq=False)
class OvrModel:
    members: tuple[BinaryMember, ...]

    kind = "ovr"

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(m.label for m in self.members)

    def scores(self, X) -> np.ndarray:
        """``(n, n_classes)`` matrix of per-class binary scores."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        return np.column_stack([m.model.score(X) for m in self.members])

    def predict(self, X) -> np.ndarray:
        # members are in class-id (= lexicographic label) order and argmax keeps
        # the first maximum, so exact ties go to the smaller label
        return np.argmax(self.scores(X), axis=1)

    def to_dict(self) -> dict:
        return {
            "models": [
                {"label": m.label, "class_id": m.class_id, "ir": m.stats.ir,
                 "raw_ratio": m.stats.raw_ratio, "n_positive": m.stats.n_minority,
                 "n_negative": m.stats.n_majority, "model": model_to_dict(m.model)}
                for m in self.members
            ]
        }

    @classmethod
    def from_dict(cls, doc) -> "OvrModel":
        members = []
        for e in doc["models"]:
            stats = ImbalanceStats(-1, int(e["class_id"]), int(e["n_negative"]),
                                   int(e["n_positive"]), float(e["ir"]), float(e["raw_ratio"]))
            members.append(BinaryMember(str(e["label"]), int(e["class_id"]),
                                        model_from_dict(e["model"]), stats))
        return cls(tuple(members))


def binarized_stats(labels, class_id: int) -> ImbalanceStats:
    labels = np.asarray(labels)
    pos = int(np.sum(labels == class_id))
    neg = len(labels) - pos
    ratio = neg / pos
    return ImbalanceStats(-1, int(class_id), neg, pos, max(ratio, 1.0), ratio)


def train_member(X, labels, class_id: int, label: str, learner: LearnerConfig, spec: CostSpec,
                 seed: int = 0) -> BinaryMember:
    y = (np.asarray(labels) == class_id).astype(np.int64)
    stats = binarized_stats(labels, class_id)
    try:
        problem = weigh(X, y, spec, ir=stats.ir)
        model = learner.fit(X, y, problem.weights, seed=seed)
    except ICostError as e:
        raise type(e)(f"class {label!r}: {e}") from e
    return BinaryMember(label, int(class_id), model, stats)


def member_seed(seed: int, class_id: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(2, class_id)).generate_state(1)[0])


def train_ovr(X, labels, classes, learner: LearnerConfig | None = None, spec: CostSpec | None = None,
              seed: int = 0, n_jobs: int = 1) -> OvrModel:
    """Train one binary cost-sensitive model per class.

    Each subproblem recomputes its own IR (clamped at 1 when the positive
    class is the larger side), complexity profiles and weights on the
    binarized labels. ``labels`` are integer ids into ``classes``.
    """
    learner = learner or LearnerConfig()
    spec = spec or CostSpec()
    labels = np.asarray(labels)
    classes = tuple(classes)
    if len(classes) < 3:
        raise TooFewClasses(f"{len(classes)} classes: use the binary pipeline for two-class data")
    present = set(np.unique(labels).tolist())
    missing = [classes[c] for c in range(len(classes)) if c not in present]
    if missing:
        raise ValidationError(f"classes with no training rows: {missing}")
    jobs = [(c, classes[c], member_seed(seed, c)) for c in range(len(classes))]
    if n_jobs == 1:
        members = [train_member(X, labels, c, lab, learner, spec, s) for c, lab, s in jobs]
    else:
        members = Parallel(n_jobs=n_jobs)(
            delayed(train_member)(X, labels, c, lab, learner, spec, s) for c, lab, s in jobs)
    return OvrModel(tuple(members))


def predict_ovr(model: OvrModel, x):
    """Predicted class id for one row or an array of ids for a matrix."""
    x = np.asarray(x, dtype=float)
    pred = model.predict(x)
    return int(pred[0]) if x.ndim == 1 else pred
