"""Tabular data loading, class statistics, stratified splitting and z-scoring."""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AmbiguousPositive,
    ClassTooSmall,
    DatasetNotFound,
    EmptyRowSet,
    MalformedCsv,
    SingleClass,
    TooManyMissing,
    ValidationError,
)

MAX_MISSING_FRACTION = 0.05


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix plus integer label ids.

    ``classes[i]`` is the original label string of class id ``i``; ids follow
    the lexicographic order of the label strings.
    """

    features: np.ndarray
    labels: np.ndarray
    classes: tuple[str, ...]
    feature_names: tuple[str, ...]
    label_name: str = "class"

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise ValidationError(f"features must be 2-D, got shape {X.shape}")
        n, d = X.shape
        if n < 2 or d < 1:
            raise ValidationError(f"need N >= 2 and D >= 1, got N={n}, D={d}")
        if y.shape != (n,):
            raise ValidationError("labels length does not match feature rows")
        if not np.all(np.isfinite(X)):
            raise ValidationError("features contain non-finite values")
        if len(self.feature_names) != d:
            raise ValidationError("feature_names length does not match D")
        if list(self.classes) != sorted(self.classes):
            raise ValidationError("classes must be in lexicographic order")
        if y.min() < 0 or y.max() >= len(self.classes):
            raise ValidationError("label id out of range")
        present = np.unique(y)
        if len(present) < 2:
            raise SingleClass("dataset needs at least 2 distinct labels")
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @classmethod
    def from_labels(cls, features, labels: Sequence, feature_names=None, label_name="class"):
        """Build a dataset from arbitrary label values (mapped through ``str``)."""
        names = [str(v) for v in labels]
        classes = tuple(sorted(set(names)))
        index = {c: i for i, c in enumerate(classes)}
        X = np.asarray(features, dtype=float)
        if feature_names is None:
            feature_names = [f"x{j}" for j in range(X.shape[1] if X.ndim == 2 else 0)]
        return cls(X, np.array([index[v] for v in names]), classes, tuple(feature_names), label_name)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def class_counts(self) -> dict[str, int]:
        counts = np.bincount(self.labels, minlength=self.n_classes)
        return {c: int(k) for c, k in zip(self.classes, counts)}

    def class_id(self, label: str) -> int:
        try:
            return self.classes.index(str(label))
        except ValueError:
            raise ValidationError(f"unknown class label {label!r}; known: {list(self.classes)}") from None

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.features[rows], self.labels[rows], self.classes,
                       self.feature_names, self.label_name)


@dataclass(frozen=True)
class ImbalanceStats:
    """Binary view of a dataset.

    ``minority_id`` is the positive (cost-boosted) class. ``majority_id`` is -1
    when every other class was pooled into the negative side. ``ir`` is
    ``n_majority / n_minority`` clamped below at 1, so a named positive that is
    actually the larger side gets ``ir == 1``; ``raw_ratio`` keeps the
    unclamped value.
    """

    majority_id: int
    minority_id: int
    n_majority: int
    n_minority: int
    ir: float
    raw_ratio: float


REST = -1


def imbalance_stats(d: Dataset, positive="auto") -> ImbalanceStats:
    counts = np.bincount(d.labels, minlength=d.n_classes)
    if positive == "auto":
        if d.n_classes != 2:
            raise AmbiguousPositive(
                f"{d.n_classes} classes present; name a positive class to get a binary view")
        # argmin returns the first minimum, i.e. the lexicographically smaller label on ties
        minority = int(np.argmin(counts))
        majority = 1 - minority
    else:
        minority = positive if isinstance(positive, (int, np.integer)) else d.class_id(positive)
        minority = int(minority)
        if not 0 <= minority < d.n_classes:
            raise ValidationError(f"class id {minority} out of range")
        majority = 1 - minority if d.n_classes == 2 else REST
    n_min = int(counts[minority])
    n_maj = int(len(d.labels) - n_min)
    ratio = n_maj / n_min
    return ImbalanceStats(majority, minority, n_maj, n_min, max(ratio, 1.0), ratio)


def binary_targets(labels: np.ndarray, minority_id: int) -> np.ndarray:
    """0/1 targets with 1 marking the minority (positive) class."""
    return (np.asarray(labels) == minority_id).astype(np.int64)


def ratio_of(y: np.ndarray) -> float:
    """IR of a 0/1 target vector, positives counted as minority, floored at 1."""
    pos = int(np.sum(y))
    if pos == 0:
        raise SingleClass("no positive instances")
    return max((len(y) - pos) / pos, 1.0)


# ----------------------------------------------------------------------------
# CSV io
# ----------------------------------------------------------------------------

def _parse_float(cell: str):
    cell = cell.strip()
    if not cell or cell in {"?", "NA", "NaN", "nan", "null"}:
        return None
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, label_column: str = "last") -> Dataset:
    """Read a numeric CSV with a header row.

    Missing or unparseable feature cells are replaced by the mean of the
    column's parsed values, provided no column is more than 5% missing.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DatasetNotFound(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise MalformedCsv(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if len(body) < 2:
        raise MalformedCsv(f"{path}: need at least 2 data rows, found {len(body)}")
    if label_column == "last":
        label_idx = len(header) - 1
    else:
        if label_column not in header:
            raise MalformedCsv(f"{path}: label column {label_column!r} not in header")
        label_idx = header.index(label_column)
    if len(header) < 2:
        raise MalformedCsv(f"{path}: need at least one feature column and a label column")

    feature_idx = [j for j in range(len(header)) if j != label_idx]
    n = len(body)
    X = np.empty((n, len(feature_idx)))
    missing = np.zeros_like(X, dtype=bool)
    labels = []
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise MalformedCsv(
                f"{path}: row {i + 2} has {len(row)} fields, header has {len(header)}")
        lab = row[label_idx].strip()
        if not lab:
            raise MalformedCsv(f"{path}: row {i + 2} has an empty label")
        labels.append(lab)
        for jj, j in enumerate(feature_idx):
            v = _parse_float(row[j])
            if v is None:
                missing[i, jj] = True
                X[i, jj] = 0.0
            else:
                X[i, jj] = v

    frac = missing.mean(axis=0)
    bad = [header[feature_idx[j]] for j in np.flatnonzero(frac > MAX_MISSING_FRACTION)]
    if bad:
        raise TooManyMissing(f"{path}: columns with more than 5% missing/non-numeric cells: {bad}")
    for j in np.flatnonzero(missing.any(axis=0)):
        ok = ~missing[:, j]
        X[missing[:, j], j] = X[ok, j].mean()

    if len(set(labels)) < 2:
        raise SingleClass(f"{path}: only one class label present")
    return Dataset.from_labels(X, labels, [header[j] for j in feature_idx], header[label_idx])


def to_csv_text(d: Dataset) -> str:
    """Serialize with 17 significant digits so reloading is bitwise exact."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(d.feature_names) + [d.label_name])
    for x, y in zip(d.features, d.labels):
        w.writerow(["%.17g" % v for v in x] + [d.classes[y]])
    return buf.getvalue()


def write_csv(d: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(to_csv_text(d))


def read_feature_rows(path, feature_names: Sequence[str]) -> np.ndarray:
    """Read the named feature columns from a CSV (extra columns are ignored).

    Used at prediction time, where no mean imputation is possible.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DatasetNotFound(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise MalformedCsv(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    missing_cols = [f for f in feature_names if f not in header]
    if missing_cols:
        raise MalformedCsv(f"{path}: missing feature columns {missing_cols}")
    cols = [header.index(f) for f in feature_names]
    X = np.empty((len(rows) - 1, len(cols)))
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise MalformedCsv(f"{path}: row {i + 2} has {len(row)} fields, header has {len(header)}")
        for jj, j in enumerate(cols):
            v = _parse_float(row[j])
            if v is None:
                raise MalformedCsv(f"{path}: row {i + 2}, column {header[j]!r} is not a number")
            X[i, jj] = v
    return X


# ----------------------------------------------------------------------------
# splitting
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SplitPlan:
    """Fold index per row, one vector per repeat."""

    n_folds: int
    n_repeats: int
    seed: int
    assignments: tuple[np.ndarray, ...] = field(repr=False)

    def folds(self):
        """Yield ``(repeat, fold, train_idx, test_idx)`` in (repeat, fold) order."""
        for r, a in enumerate(self.assignments):
            for f in range(self.n_folds):
                yield r, f, np.flatnonzero(a != f), np.flatnonzero(a == f)

    def __len__(self):
        return self.n_folds * self.n_repeats


def repeat_seed(seed: int, repeat: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(0, repeat))


def make_split_plan(d: Dataset | np.ndarray, n_folds: int = 5, n_repeats: int = 10,
                    seed: int = 0) -> SplitPlan:
    """Repeated stratified k-fold assignment.

    Members of each class are shuffled and dealt round-robin into folds. The
    dealing position carries over from one class to the next, so the folds
    that receive a class's remainder rotate and total fold sizes stay within
    one of each other as well.
    """
    labels = d.labels if isinstance(d, Dataset) else np.asarray(d)
    if n_folds < 2:
        raise ValidationError("n_folds must be >= 2")
    if n_repeats < 1:
        raise ValidationError("n_repeats must be >= 1")
    ids, counts = np.unique(labels, return_counts=True)
    if counts.min() < n_folds:
        small = ids[counts < n_folds].tolist()
        raise ClassTooSmall(f"classes {small} have fewer than {n_folds} members")
    out = []
    for r in range(n_repeats):
        rng = np.random.default_rng(repeat_seed(seed, r))
        a = np.empty(len(labels), dtype=np.int64)
        offset = 0
        for c in ids:
            members = rng.permutation(np.flatnonzero(labels == c))
            a[members] = (offset + np.arange(len(members))) % n_folds
            offset = (offset + len(members)) % n_folds
        a.setflags(write=False)
        out.append(a)
    return SplitPlan(n_folds, n_repeats, int(seed), tuple(out))


# ----------------------------------------------------------------------------
# z-score
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Standardizer:
    means: np.ndarray
    stdevs: np.ndarray

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.means) / self.stdevs

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "stdevs": self.stdevs.tolist()}

    @classmethod
    def from_dict(cls, doc) -> "Standardizer":
        return cls(np.array(doc["means"], dtype=float), np.array(doc["stdevs"], dtype=float))


def fit_standardizer(d: Dataset | np.ndarray, rows=None) -> Standardizer:
    """Population (ddof=0) z-score fitted on ``rows``; zero-variance columns get stdev 1."""
    X = d.features if isinstance(d, Dataset) else np.asarray(d, dtype=float)
    if rows is not None:
        X = X[np.asarray(rows)]
    if X.shape[0] == 0:
        raise EmptyRowSet("cannot fit a standardizer on zero rows")
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    # rounding can leave a tiny nonzero mean offset / stdev on constant columns
    const = np.ptp(X, axis=0) == 0
    mu = np.where(const, X[0], mu)
    sd = np.where(const | (sd == 0), 1.0, sd)
    return Standardizer(_frozen(mu), _frozen(sd))


def apply(s: Standardizer, d: Dataset | np.ndarray, rows=None) -> np.ndarray:
    X = d.features if isinstance(d, Dataset) else np.asarray(d, dtype=float)
    if rows is not None:
        X = X[np.asarray(rows)]
    return s.transform(X)
