"""Cross-validated experiments, cost-factor grid search and synthetic fixtures.

Seed discipline: a single master seed ``s`` expands deterministically into

* repeat ``r`` of the split plan: ``SeedSequence(s, spawn_key=(0, r))``
* the learner seed of fold ``(r, f)``: ``SeedSequence(s, spawn_key=(1, r, f))``
* one-vs-rest member ``c`` within a fold: ``SeedSequence(fold_seed, spawn_key=(2, c))``

so every fold can be evaluated independently and in any order.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
from joblib import Parallel, delayed

from . import complexity
from .costing import CostSpec, IRScaled, Mode, Scheme, parse_number, resolved_costs, weigh
from .dataset import (
    Dataset,
    Standardizer,
    binary_targets,
    fit_standardizer,
    imbalance_stats,
    load_csv,
    make_split_plan,
    ratio_of,
)
from .errors import BadParams, ICostError, ValidationError
from .learners import LearnerConfig, model_from_dict, model_to_dict
from .metrics import (
    METRIC_NAMES,
    ConfusionTally,
    FoldMetrics,
    MetricsReport,
    aggregate_folds,
    binary_metrics,
    multiclass_metrics,
)
from .multiclass import OvrModel, train_ovr

log = logging.getLogger(__name__)

REPORT_FORMAT = "icost-report"
REPORT_VERSION = 1
PIPELINE_FORMAT = "icost-pipeline"
PIPELINE_VERSION = 1


def fold_seed(seed: int, repeat: int, fold: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(1, repeat, fold)).generate_state(1)[0])


# ----------------------------------------------------------------------------
# grid
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Candidate cost values per parameter; cells are the Cartesian product.

    Parameter names follow the cost-factor keys of the mode: ``cost_factor``
    for original, ``border/safe/pure`` (or ``cfb/cfs/cfp``) for neighborhood
    'ins', ``g0..gk`` for 'gen', ``linked/normal`` for MST.
    """

    mode: Mode
    params: tuple[tuple[str, tuple], ...]
    scheme: Scheme = Scheme.INS
    n_neighbors: int = complexity.DEFAULT_K

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        params = self.params.items() if isinstance(self.params, Mapping) else self.params
        norm = tuple((str(k), tuple(parse_number(v) for v in vals)) for k, vals in params)
        if not norm or any(len(v) == 0 for _, v in norm):
            raise ValidationError("grid needs at least one candidate per parameter")
        if self.mode is Mode.ORIGINAL and [k for k, _ in norm] != ["cost_factor"]:
            raise ValidationError("original-mode grid takes a single 'cost_factor' parameter")
        object.__setattr__(self, "params", norm)

    def __len__(self):
        n = 1
        for _, v in self.params:
            n *= len(v)
        return n

    def cells(self) -> list[CostSpec]:
        names = [k for k, _ in self.params]
        out = []
        for combo in itertools.product(*(v for _, v in self.params)):
            values = combo[0] if self.mode is Mode.ORIGINAL else dict(zip(names, combo))
            out.append(CostSpec(self.mode, self.scheme, values, self.n_neighbors))
        return out

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "scheme": self.scheme.value,
            "n_neighbors": self.n_neighbors,
            "params": {k: [str(x) if isinstance(x, IRScaled) else x for x in v] for k, v in self.params},
        }

    @classmethod
    def from_dict(cls, doc) -> "GridSpec":
        if isinstance(doc, str):
            return standard_grid(doc)
        return cls(doc["mode"], doc["params"], doc.get("scheme", "ins"),
                   int(doc.get("n_neighbors", complexity.DEFAULT_K)))


def _irs(*ms):
    return tuple(IRScaled(m) for m in ms)


# cost-factor candidates used for tuning, per categorization mode
STANDARD_GRIDS = {
    Mode.ORIGINAL: (("cost_factor", _irs(0.8, 0.9, 1.0, 1.1, 1.2)),),
    Mode.NEIGHBORHOOD: (
        ("pure", (1.0, IRScaled(0.2))),
        ("safe", _irs(0.25, 0.35, 0.5)),
        ("border", _irs(0.75, 0.9, 1.0, 1.1, 1.25)),
    ),
    Mode.MST: (
        ("linked", _irs(0.75, 0.9, 1.0, 1.1, 1.25)),
        ("normal", _irs(0.3, 0.5, 0.7)),
    ),
}


def standard_grid(mode="neighborhood") -> GridSpec:
    mode = mode if isinstance(mode, Mode) else Mode(str(mode).lower())
    return GridSpec(mode, STANDARD_GRIDS[mode])


# ----------------------------------------------------------------------------
# plan
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentPlan:
    dataset: str | None = None
    label_column: str = "last"
    positive: str = "auto"
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    cost: CostSpec = field(default_factory=CostSpec)
    n_folds: int = 5
    n_repeats: int = 10
    seed: int = 0
    grid: GridSpec | None = None

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "label_column": self.label_column,
            "positive": self.positive,
            "learner": self.learner.to_dict(),
            "cost": self.cost.to_dict(),
            "n_folds": self.n_folds,
            "n_repeats": self.n_repeats,
            "seed": self.seed,
            "grid": None if self.grid is None else self.grid.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ExperimentPlan":
        known = {"dataset", "label_column", "positive", "learner", "cost", "n_folds",
                 "n_repeats", "seed", "grid"}
        unknown = set(doc) - known
        if unknown:
            raise ValidationError(f"unknown plan fields {sorted(unknown)}")
        return cls(
            dataset=doc.get("dataset"),
            label_column=doc.get("label_column", "last"),
            positive=str(doc.get("positive", "auto")),
            learner=LearnerConfig.from_dict(doc.get("learner", "logreg")),
            cost=CostSpec.from_dict(doc.get("cost", {})),
            n_folds=int(doc.get("n_folds", 5)),
            n_repeats=int(doc.get("n_repeats", 10)),
            seed=int(doc.get("seed", 0)),
            grid=None if doc.get("grid") is None else GridSpec.from_dict(doc["grid"]),
        )

    def load(self) -> Dataset:
        if self.dataset is None:
            raise ValidationError("plan has no dataset path")
        return load_csv(self.dataset, self.label_column)

    def validate(self, d: Dataset) -> None:
        """Check every precondition that can be checked before training starts."""
        if self.n_folds < 2 or self.n_repeats < 1:
            raise ValidationError("need n_folds >= 2 and n_repeats >= 1")
        task = task_of(d, self.positive)
        if task.multiclass:
            ir_checks = [max((len(d.labels) - k) / k, 1.0) for k in d.class_counts.values()]
        else:
            ir_checks = [imbalance_stats(d, task.positive).ir]
        specs = [self.cost] if self.grid is None else self.grid.cells()
        for spec in specs:
            for ir in ir_checks:
                resolved_costs(spec, ir)
        make_split_plan(d, self.n_folds, 1, self.seed)


@dataclass(frozen=True)
class Task:
    multiclass: bool
    positive: int | None  # minority/positive class id for binary views


def task_of(d: Dataset, positive="auto") -> Task:
    if positive == "auto":
        if d.n_classes == 2:
            return Task(False, imbalance_stats(d).minority_id)
        return Task(True, None)
    return Task(False, d.class_id(positive))


# ----------------------------------------------------------------------------
# fitted pipeline (standardize -> weigh -> train)
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FittedPipeline:
    standardizer: Standardizer
    model: object
    classes: tuple[str, ...]
    feature_names: tuple[str, ...]
    positive_id: int | None
    ir: float | None
    costs: dict
    learner: LearnerConfig
    cost: CostSpec

    @property
    def multiclass(self) -> bool:
        return isinstance(self.model, OvrModel)

    def scores(self, X) -> np.ndarray:
        """Positive-class score (binary) or per-class score matrix (multiclass)."""
        return self.model.scores(self.standardizer.transform(X)) if self.multiclass \
            else self.model.score(self.standardizer.transform(X))

    def predict(self, X) -> np.ndarray:
        """Predicted class ids in the dataset's label space."""
        Z = self.standardizer.transform(X)
        if self.multiclass:
            return self.model.predict(Z)
        is_pos = self.model.predict(Z).astype(bool)
        other = [c for c in range(len(self.classes)) if c != self.positive_id]
        # pooled negatives cannot be mapped back to one label
        neg = other[0] if len(other) == 1 else -1
        return np.where(is_pos, self.positive_id, neg)

    def label_of(self, class_id: int) -> str:
        return "rest" if class_id < 0 else self.classes[class_id]

    def to_dict(self) -> dict:
        return {
            "format": PIPELINE_FORMAT,
            "version": PIPELINE_VERSION,
            "classes": list(self.classes),
            "feature_names": list(self.feature_names),
            "positive_id": self.positive_id,
            "ir": self.ir,
            "costs": self.costs,
            "learner": self.learner.to_dict(),
            "cost": self.cost.to_dict(),
            "standardizer": self.standardizer.to_dict(),
            "model": {"kind": "ovr", **self.model.to_dict()} if self.multiclass else model_to_dict(self.model),
        }

    @classmethod
    def from_dict(cls, doc) -> "FittedPipeline":
        if doc.get("format") != PIPELINE_FORMAT:
            raise ValidationError("not an icost pipeline document")
        if doc.get("version") != PIPELINE_VERSION:
            raise ValidationError(f"unsupported pipeline document version {doc.get('version')}")
        mdoc = doc["model"]
        model = OvrModel.from_dict(mdoc) if mdoc.get("kind") == "ovr" else model_from_dict(mdoc)
        return cls(Standardizer.from_dict(doc["standardizer"]), model, tuple(doc["classes"]),
                   tuple(doc["feature_names"]), doc["positive_id"], doc["ir"], doc["costs"],
                   LearnerConfig.from_dict(doc["learner"]), CostSpec.from_dict(doc["cost"]))


def train_fold(d: Dataset, train_idx, learner: LearnerConfig, cost: CostSpec, positive="auto",
               seed: int = 0) -> FittedPipeline:
    """Fit the whole pipeline using only the rows in ``train_idx``."""
    train_idx = np.asarray(train_idx)
    task = task_of(d, positive)
    s = fit_standardizer(d, train_idx)
    Xtr = s.transform(d.features[train_idx])
    labels = d.labels[train_idx]
    if task.multiclass:
        model = train_ovr(Xtr, labels, d.classes, learner, cost, seed=seed)
        return FittedPipeline(s, model, d.classes, d.feature_names, None, None, {}, learner, cost)
    y = binary_targets(labels, task.positive)
    ir = ratio_of(y)
    problem = weigh(Xtr, y, cost, ir)
    model = learner.fit(Xtr, y, problem.weights, seed=seed)
    return FittedPipeline(s, model, d.classes, d.feature_names, task.positive, ir,
                          problem.costs, learner, cost)


@dataclass(frozen=True, eq=False)
class FoldResult:
    repeat: int
    fold: int
    metrics: FoldMetrics
    n_train: int
    n_test: int
    ir: float | None
    costs: dict
    pipeline: FittedPipeline | None = None

    def to_dict(self) -> dict:
        return {
            "repeat": self.repeat,
            "fold": self.fold,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "train_ir": self.ir,
            "costs": self.costs,
            "metrics": self.metrics.as_dict(),
        }


def evaluate_fold(d: Dataset, repeat: int, fold: int, train_idx, test_idx, learner: LearnerConfig,
                  cost: CostSpec, positive="auto", seed: int = 0, keep_model: bool = False) -> FoldResult:
    try:
        pipe = train_fold(d, train_idx, learner, cost, positive, fold_seed(seed, repeat, fold))
    except ICostError as e:
        raise type(e)(f"repeat {repeat}, fold {fold}: {e}") from e
    Xte = d.features[test_idx]
    if pipe.multiclass:
        S = pipe.scores(Xte)
        m = multiclass_metrics(d.labels[test_idx], pipe.predict(Xte), S, d.n_classes)
    else:
        yte = binary_targets(d.labels[test_idx], pipe.positive_id)
        Z = pipe.standardizer.transform(Xte)
        pred = pipe.model.predict(Z)
        m = binary_metrics(ConfusionTally.from_predictions(yte, pred), pipe.model.score(Z), yte)
    return FoldResult(repeat, fold, m, len(train_idx), len(test_idx), pipe.ir, pipe.costs,
                      pipe if keep_model else None)


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    plan: ExperimentPlan
    report: MetricsReport
    folds: tuple[FoldResult, ...]

    def to_dict(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "plan": self.plan.to_dict(),
            "config": self.plan.cost.describe(),
            "summary": {"n_folds": len(self.folds), "mean": self.report.mean.as_dict(),
                        "std": self.report.std.as_dict()},
            "folds": [f.to_dict() for f in self.folds],
        }


def run_experiment(plan: ExperimentPlan, dataset: Dataset | None = None, n_jobs: int = 1,
                   keep_models: bool = False) -> ExperimentResult:
    """Repeated stratified CV of one configuration.

    Standardization, IR, complexity profiles and weights are all computed
    from the training partition of each fold.
    """
    d = plan.load() if dataset is None else dataset
    plan.validate(d)
    split = make_split_plan(d, plan.n_folds, plan.n_repeats, plan.seed)
    jobs = list(split.folds())
    args = (plan.learner, plan.cost, plan.positive, plan.seed, keep_models)
    if n_jobs == 1:
        results = [evaluate_fold(d, r, f, tr, te, *args) for r, f, tr, te in jobs]
    else:
        results = Parallel(n_jobs=n_jobs)(
            delayed(evaluate_fold)(d, r, f, tr, te, *args) for r, f, tr, te in jobs)
    results.sort(key=lambda fr: (fr.repeat, fr.fold))
    report = aggregate_folds(fr.metrics for fr in results)
    log.info("%s: mean MCC %.4f over %d folds", plan.cost.describe(), report.mean.mcc, len(results))
    return ExperimentResult(plan, report, tuple(results))


# ----------------------------------------------------------------------------
# grid search
# ----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridResult:
    plan: ExperimentPlan
    cells: tuple[CostSpec, ...]
    results: tuple[ExperimentResult, ...]
    best_index: int

    @property
    def best(self) -> CostSpec:
        return self.cells[self.best_index]

    @property
    def best_result(self) -> ExperimentResult:
        return self.results[self.best_index]

    def table(self) -> list[dict]:
        rows = []
        for i, (c, r) in enumerate(zip(self.cells, self.results)):
            rows.append({"cell": i, "config": c.describe(), "cost": c.to_dict(),
                         "mean": r.report.mean.as_dict(), "std": r.report.std.as_dict()})
        return rows

    def to_dict(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "plan": self.plan.to_dict(),
            "best_cell": self.best_index,
            "best": self.best.to_dict(),
            "best_config": self.best.describe(),
            "grid": self.table(),
            "best_folds": [f.to_dict() for f in self.best_result.folds],
        }


def select_best(results: Sequence[ExperimentResult]) -> int:
    """Highest mean MCC; ties go to higher mean G-mean, then the earlier cell."""
    best = 0
    for i, r in enumerate(results[1:], start=1):
        a, b = r.report.mean, results[best].report.mean
        if (a.mcc, a.gmean) > (b.mcc, b.gmean):
            best = i
    return best


def grid_search(plan: ExperimentPlan, dataset: Dataset | None = None, n_jobs: int = 1) -> GridResult:
    """Evaluate every grid cell on the same CV folds and pick the best by MCC."""
    if plan.grid is None:
        raise ValidationError("plan has no grid")
    d = plan.load() if dataset is None else dataset
    plan.validate(d)
    cells = plan.grid.cells()
    results = tuple(run_experiment(replace(plan, cost=c, grid=None), d, n_jobs=n_jobs) for c in cells)
    return GridResult(plan, tuple(cells), results, select_best(results))


# ----------------------------------------------------------------------------
# outputs
# ----------------------------------------------------------------------------

def dumps_report(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def summary_rows(results: Sequence[tuple[str, ExperimentResult]]) -> str:
    """CSV text with one row per configuration."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["config", "learner", "n_folds"] + [f"mean_{m}" for m in METRIC_NAMES]
               + [f"std_{m}" for m in METRIC_NAMES])
    for name, r in results:
        mean, std = r.report.mean.as_dict(), r.report.std.as_dict()
        w.writerow([name, r.plan.learner.name, len(r.folds)] + [repr(mean[m]) for m in METRIC_NAMES]
                   + [repr(std[m]) for m in METRIC_NAMES])
    return buf.getvalue()


# ----------------------------------------------------------------------------
# synthetic data
# ----------------------------------------------------------------------------

GENERATORS = ("gaussian", "blobs")


def make_synthetic(generator: str = "gaussian", seed: int = 0, n_majority: int = 900,
                   n_minority: int = 90, overlap: float = 0.6) -> Dataset:
    """Two unit-variance 2-D Gaussian clusters, means ``(1 - overlap) * 4`` apart.

    Labels are ``neg`` (majority) and ``pos`` (minority).
    """
    if generator != "gaussian":
        raise BadParams(f"unknown binary generator {generator!r}")
    if n_majority < 1 or n_minority < 1:
        raise BadParams("class counts must be positive")
    if not 0.0 <= overlap <= 1.0:
        raise BadParams("overlap must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    sep = (1.0 - overlap) * 4.0
    X = np.vstack([rng.normal(size=(n_majority, 2)),
                   rng.normal(size=(n_minority, 2)) + np.array([sep, 0.0])])
    labels = ["neg"] * n_majority + ["pos"] * n_minority
    return Dataset.from_labels(X, labels, ["x0", "x1"])


def make_blobs(seed: int = 0, counts: Sequence[int] = (100, 100, 100), separation: float = 6.0) -> Dataset:
    """Unit-variance 2-D Gaussian blobs centred on a circle of radius ``separation``.

    Class ``i`` is labelled ``c{i}``.
    """
    if len(counts) < 2 or min(counts) < 1:
        raise BadParams("need at least 2 classes with positive counts")
    if separation < 0:
        raise BadParams("separation must be non-negative")
    rng = np.random.default_rng(seed)
    k = len(counts)
    parts, labels = [], []
    for i, n in enumerate(counts):
        ang = 2 * np.pi * i / k
        centre = separation * np.array([np.cos(ang), np.sin(ang)])
        parts.append(rng.normal(size=(n, 2)) + centre)
        labels += [f"c{i}"] * n
    return Dataset.from_labels(np.vstack(parts), labels, ["x0", "x1"])
