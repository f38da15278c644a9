"""Evaluation metrics for imbalanced classification.

Zero-division conventions: precision and F1 are 0 when undefined; MCC is 0
when any marginal of the confusion matrix is empty; ROC-AUC is 0.5 when one
class has no scored instances.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import asdict, dataclass

import numpy as np

from .errors import EmptyFold, ValidationError

METRIC_NAMES = ("accuracy", "sensitivity", "specificity", "precision", "f1", "gmean", "mcc", "roc_auc")


@dataclass(frozen=True)
class ConfusionTally:
    tp: int
    fn: int
    tn: int
    fp: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.tn, self.fp) < 0:
            raise ValidationError("confusion counts must be non-negative")

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.tn + self.fp

    @classmethod
    def from_predictions(cls, y_true, y_pred, positive=1) -> "ConfusionTally":
        t = np.asarray(y_true) == positive
        p = np.asarray(y_pred) == positive
        return cls(int(np.sum(t & p)), int(np.sum(t & ~p)), int(np.sum(~t & ~p)), int(np.sum(~t & p)))


@dataclass(frozen=True)
class FoldMetrics:
    accuracy: float
    sensitivity: float
    specificity: float
    precision: float
    f1: float
    gmean: float
    mcc: float
    roc_auc: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in METRIC_NAMES])

    @classmethod
    def from_array(cls, a) -> "FoldMetrics":
        return cls(*(float(v) for v in a))


@dataclass(frozen=True)
class MetricsReport:
    folds: tuple[FoldMetrics, ...]
    mean: FoldMetrics
    std: FoldMetrics

    def to_dict(self) -> dict:
        return {
            "n_folds": len(self.folds),
            "mean": self.mean.as_dict(),
            "std": self.std.as_dict(),
            "folds": [f.as_dict() for f in self.folds],
        }


def _div(a, b) -> float:
    return a / b if b else 0.0


def roc_auc(scores, y_true) -> float:
    """Mann-Whitney U / (n_pos * n_neg) with average ranks for tied scores."""
    s = np.asarray(scores, dtype=float)
    t = np.asarray(y_true).astype(bool)
    n_pos = int(t.sum())
    n_neg = len(t) - n_pos
    if n_pos == 0 or n_neg == 0:
        return 0.5
    order = np.argsort(s, kind="mergesort")
    ss = s[order]
    ranks = np.empty(len(s))
    # average rank for each block of equal scores
    starts = np.r_[0, np.flatnonzero(ss[1:] != ss[:-1]) + 1]
    ends = np.r_[starts[1:], len(ss)]
    for a, b in zip(starts, ends):
        ranks[order[a:b]] = 0.5 * (a + b + 1)
    u = ranks[t].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def mcc(t: ConfusionTally) -> float:
    denom = (t.tp + t.fp) * (t.tp + t.fn) * (t.tn + t.fp) * (t.tn + t.fn)
    if denom == 0:
        return 0.0
    return (t.tp * t.tn - t.fp * t.fn) / math.sqrt(denom)


def binary_metrics(tally: ConfusionTally, scores=None, y_true=None) -> FoldMetrics:
    """All eight metrics for one binary fold.

    ``scores``/``y_true`` (1 = positive) feed ROC-AUC; without them it is
    reported as 0.5.
    """
    n = tally.positives + tally.negatives
    if n == 0:
        raise EmptyFold("no instances in fold")
    sens = _div(tally.tp, tally.positives)
    spec = _div(tally.tn, tally.negatives)
    prec = _div(tally.tp, tally.tp + tally.fp)
    f1 = _div(2 * prec * sens, prec + sens)
    auc = 0.5 if scores is None else roc_auc(scores, y_true)
    return FoldMetrics(
        accuracy=(tally.tp + tally.tn) / n,
        sensitivity=sens,
        specificity=spec,
        precision=prec,
        f1=f1,
        gmean=math.sqrt(sens * spec),
        mcc=mcc(tally),
        roc_auc=auc,
    )


def macro_metrics(per_class) -> FoldMetrics:
    """Unweighted mean over classes of one-vs-rest binary metrics.

    ``per_class`` is a sequence of ``(tally, scores, y_true)`` triples (scores
    may be None), one per class. Every field, accuracy and MCC included, is
    the plain mean of the per-class binary values.
    """
    per_class = list(per_class)
    if len(per_class) < 2:
        raise ValidationError("macro averaging needs at least 2 classes")
    rows = [binary_metrics(t, s, y) for t, s, y in per_class]
    return FoldMetrics.from_array(np.mean([r.as_array() for r in rows], axis=0))


def multiclass_metrics(y_true, y_pred, scores, n_classes: int) -> FoldMetrics:
    """Macro metrics from integer labels and an ``(n, n_classes)`` score matrix."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) == 0:
        raise EmptyFold("no instances in fold")
    S = None if scores is None else np.asarray(scores, dtype=float)
    per = []
    for c in range(n_classes):
        per.append((ConfusionTally.from_predictions(y_true, y_pred, c),
                    None if S is None else S[:, c], y_true == c))
    return macro_metrics(per)


def aggregate_folds(reports) -> MetricsReport:
    """Mean and sample standard deviation (0 for a single fold) per metric.

    ``statistics`` sums exactly, so the result does not depend on fold order
    and identical folds give back the fold value with zero spread.
    """
    reports = tuple(reports)
    if not reports:
        raise EmptyFold("no fold reports to aggregate")
    cols = list(zip(*(r.as_array().tolist() for r in reports)))
    mean = [statistics.mean(c) for c in cols]
    std = [statistics.stdev(c) if len(c) > 1 else 0.0 for c in cols]
    return MetricsReport(reports, FoldMetrics.from_array(mean), FoldMetrics.from_array(std))

