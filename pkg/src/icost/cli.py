"""Command-line interface.

Exit codes: 0 success, 2 validation error (bad input, config or arguments),
1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import complexity
from .costing import parse_cost_factor
from .dataset import (
    binary_targets,
    fit_standardizer,
    imbalance_stats,
    load_csv,
    read_feature_rows,
    to_csv_text,
    write_csv,
)
from .errors import ICostError, ValidationError
from .harness import (
    ExperimentPlan,
    FittedPipeline,
    GridSpec,
    dumps_report,
    grid_search,
    make_blobs,
    make_synthetic,
    run_experiment,
    summary_rows,
    standard_grid,
    task_of,
    train_fold,
)

log = logging.getLogger("icost")


def _learner_params(pairs):
    out = {}
    for p in pairs or ():
        if "=" not in p:
            raise ValidationError(f"--learner-param expects key=value, got {p!r}")
        k, v = p.split("=", 1)
        try:
            out[k.strip()] = json.loads(v)
        except json.JSONDecodeError:
            out[k.strip()] = v
    return out


def _add_plan_args(p: argparse.ArgumentParser, grid: bool = False):
    p.add_argument("data", nargs="?", help="CSV dataset (overrides the config's dataset)")
    p.add_argument("--config", help="plan JSON; explicit flags override its fields")
    p.add_argument("--label", help="label column name (default: last column)")
    p.add_argument("--positive", help="positive class label, or 'auto'")
    p.add_argument("--learner", choices=["logreg", "svm", "tree", "forest"])
    p.add_argument("--learner-param", action="append", metavar="KEY=VALUE",
                   help="learner hyper-parameter, repeatable (e.g. l2=0.001)")
    p.add_argument("--algorithm", choices=["original", "neighborhood", "mst"], type=str.lower)
    p.add_argument("--type", dest="scheme", choices=["ins", "gen"], type=str.lower)
    p.add_argument("--cost-factor", help="scalar, comma list, or JSON map; entries may be '0.5*IR'")
    p.add_argument("--n-neighbors", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1, help="parallel fold workers")
    if grid:
        p.add_argument("--grid", help="'standard' (default) or a grid JSON file")


def _plan_from_args(a) -> ExperimentPlan:
    doc = {}
    if a.config:
        with open(a.config, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as e:
                raise ValidationError(f"{a.config}: invalid JSON: {e}") from None
    if a.data:
        doc["dataset"] = a.data
    if a.label:
        doc["label_column"] = a.label
    if a.positive:
        doc["positive"] = a.positive
    learner = doc.get("learner", "logreg")
    learner = {"name": learner, "params": {}} if isinstance(learner, str) else dict(learner)
    if a.learner:
        if a.learner != learner.get("name"):
            learner["params"] = {}
        learner["name"] = a.learner
    if a.learner_param:
        learner["params"] = {**learner.get("params", {}), **_learner_params(a.learner_param)}
    doc["learner"] = learner
    cost = dict(doc.get("cost", {}))
    if a.algorithm:
        cost["mode"] = a.algorithm
    if a.scheme:
        cost["scheme"] = a.scheme
    if a.n_neighbors is not None:
        cost["n_neighbors"] = a.n_neighbors
    plan = ExperimentPlan.from_dict({**doc, "cost": cost, "grid": None})
    if a.cost_factor is not None:
        plan = _replace_cost(plan, values=parse_cost_factor(a.cost_factor))
    overrides = {}
    if a.folds is not None:
        overrides["n_folds"] = a.folds
    if a.repeats is not None:
        overrides["n_repeats"] = a.repeats
    if a.seed is not None:
        overrides["seed"] = a.seed
    if hasattr(a, "grid"):
        grid = doc.get("grid")
        if a.grid and a.grid.lower() != "standard":
            with open(a.grid, encoding="utf-8") as fh:
                grid = json.load(fh)
        elif a.grid:
            grid = "standard"
        if grid is None or grid == "standard":
            overrides["grid"] = standard_grid(plan.cost.mode)
        else:
            overrides["grid"] = GridSpec.from_dict(grid)
    return replace(plan, **overrides)


def _replace_cost(plan, **kw):
    return replace(plan, cost=replace(plan.cost, **kw))


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ----------------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------------

def cmd_analyze(a) -> int:
    d = load_csv(a.data, a.label or "last")
    task = task_of(d, a.positive or "auto")
    if task.multiclass:
        raise ValidationError("analysis needs a binary view: pass --positive for multiclass data")
    stats = imbalance_stats(d, task.positive)
    X = fit_standardizer(d).transform(d.features)
    y = binary_targets(d.labels, task.positive)
    algo = a.algorithm or "neighborhood"
    instances = []
    if algo == "mst":
        mst = complexity.build_mst(X)
        profiles = complexity.mst_profiles(mst, y)
        for p in profiles:
            instances.append({"index": p.instance_index, "class": d.classes[d.labels[p.instance_index]],
                              "linked": p.linked})
        extra = {"mst_total_weight": mst.total_weight}
    else:
        k = a.n_neighbors or complexity.DEFAULT_K
        profiles = complexity.knn_profiles(X, y, k)
        for p in profiles:
            instances.append({"index": p.instance_index, "class": d.classes[d.labels[p.instance_index]],
                              "opposite_count": p.opposite_count, "grade": f"g{p.grade}",
                              "category": p.category.value})
        grades = {f"g{j}": 0 for j in range(k + 1)}
        for p in profiles:
            grades[f"g{p.grade}"] += 1
        extra = {"n_neighbors": k, "grade_counts": grades}
    doc = {
        "format": "icost-complexity",
        "version": 1,
        "dataset": a.data,
        "algorithm": algo,
        "positive": d.classes[stats.minority_id],
        "n_samples": d.n_samples,
        "n_minority": stats.n_minority,
        "n_majority": stats.n_majority,
        "ir": stats.ir,
        "summary": complexity.summarize(profiles),
        **extra,
        "instances": instances,
    }
    _write(a.out, dumps_report(doc))
    return 0


def cmd_train(a) -> int:
    plan = _plan_from_args(a)
    d = plan.load()
    plan.validate(d)
    pipe = train_fold(d, np.arange(d.n_samples), plan.learner, plan.cost, plan.positive, plan.seed)
    _write(a.out, json.dumps(pipe.to_dict(), indent=2) + "\n")
    return 0


def cmd_predict(a) -> int:
    with open(a.model, encoding="utf-8") as fh:
        try:
            pipe = FittedPipeline.from_dict(json.load(fh))
        except (json.JSONDecodeError, KeyError) as e:
            raise ValidationError(f"{a.model}: not a readable model document ({e})") from None
    X = read_feature_rows(a.data, pipe.feature_names)
    pred = pipe.predict(X)
    S = pipe.scores(X)
    if pipe.multiclass:
        header = ["prediction"] + [f"score_{c}" for c in pipe.classes]
        rows = [[pipe.label_of(p)] + [repr(float(v)) for v in s] for p, s in zip(pred, S)]
    else:
        header = ["prediction", "score"]
        rows = [[pipe.label_of(p), repr(float(s))] for p, s in zip(pred, S)]
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _write(a.out, out.getvalue())
    return 0


def _out_paths(a):
    os.makedirs(a.out_dir, exist_ok=True)
    return os.path.join(a.out_dir, "report.json"), os.path.join(a.out_dir, "summary.csv")


def cmd_evaluate(a) -> int:
    plan = _plan_from_args(a)
    res = run_experiment(plan, n_jobs=a.jobs)
    rpath, spath = _out_paths(a)
    _write(rpath, dumps_report(res.to_dict()))
    _write(spath, summary_rows([(plan.cost.describe(), res)]))
    m = res.report.mean
    print(f"{plan.cost.describe()} {plan.learner.name}: {len(res.folds)} folds, "
          f"MCC {m.mcc:.4f}, ROC-AUC {m.roc_auc:.4f}, G-mean {m.gmean:.4f}, F1 {m.f1:.4f}")
    return 0


def cmd_gridsearch(a) -> int:
    plan = _plan_from_args(a)
    res = grid_search(plan, n_jobs=a.jobs)
    rpath, spath = _out_paths(a)
    _write(rpath, dumps_report(res.to_dict()))
    _write(spath, summary_rows([(c.describe(), r) for c, r in zip(res.cells, res.results)]))
    m = res.best_result.report.mean
    print(f"best of {len(res.cells)} cells: {res.best.describe()} (MCC {m.mcc:.4f}, G-mean {m.gmean:.4f})")
    return 0


def cmd_synth(a) -> int:
    if a.generator == "blobs":
        counts = [int(c) for c in (a.counts or "100,100,100").split(",")]
        d = make_blobs(a.seed, counts, a.separation)
    else:
        d = make_synthetic(a.generator, a.seed, a.n_majority, a.n_minority, a.overlap)
    if a.out in (None, "-"):
        sys.stdout.write(to_csv_text(d))
    else:
        write_csv(d, a.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="icost", description="Instance-complexity cost-sensitive learning")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="complexity report for the minority class")
    p.add_argument("data")
    p.add_argument("--label")
    p.add_argument("--positive")
    p.add_argument("--algorithm", choices=["neighborhood", "mst"], type=str.lower)
    p.add_argument("--n-neighbors", type=int)
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("train", help="fit on the full dataset and save the model")
    _add_plan_args(p)
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a saved model to a CSV")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--out", help="predictions CSV (default stdout)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="repeated stratified cross-validation")
    _add_plan_args(p)
    p.add_argument("--out-dir", default=".", help="where report.json and summary.csv go")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gridsearch", help="cost-factor grid search under cross-validation")
    _add_plan_args(p, grid=True)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_gridsearch)

    p = sub.add_parser("synth", help="write a synthetic fixture CSV")
    p.add_argument("--generator", choices=["gaussian", "blobs"], default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-majority", type=int, default=900)
    p.add_argument("--n-minority", type=int, default=90)
    p.add_argument("--overlap", type=float, default=0.6)
    p.add_argument("--counts", help="blobs: comma-separated class counts")
    p.add_argument("--separation", type=float, default=6.0, help="blobs: centre radius")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s:%(name)s:%(message)s")
    try:
        return a.func(a)
    except (ValidationError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ICostError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
