"""Command-line entry points.

Commands: prep (CSV to prepared dataset), synth (generate a synthetic
dataset), fit, predict, explain (SVG / diagram document), gridsearch,
evaluate, rank, validate (psychometric checks), serve. A JSON config file
can preload any flag; explicit flags win. Errors leave a machine-readable
document on stderr and a nonzero exit status.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    PolygridConfig,
    PolygridInstance,
    default_grid,
    fit as fit_model,
    predict,
)
from .datasets import (
    AssignmentSynthSpec,
    CongenericSpec,
    Dataset,
    dataset_stats,
    load_csv,
    make_dataset,
    mcdonald_omega,
    save_csv,
    sum_area_violation_test,
    synth_assignment,
    synth_congeneric,
)
from .diagram import build_diagram, render_svg
from .evaluation import (
    BaselineLearner,
    PolygridLearner,
    dominance_and_echelons,
    default_metrics,
    grid_search,
    results_to_csv,
    run_experiment,
    size_matched_comparison,
)
from .solvers import SolverKind


def _fail(message: str, detail: dict | None = None, code: int = 1):
    doc = {"error": message}
    if detail:
        doc["detail"] = detail
    print(json.dumps(doc), file=sys.stderr)
    raise SystemExit(code)


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _config_from_args(args, overrides: dict) -> PolygridConfig:
    doc = dict(overrides.get("model", {}))
    for key in (
        "ns_per_domain", "n_a", "vorder", "sector_type", "annulus_type",
        "cutoff_scheme", "threshold_granularity", "arc_resolution",
    ):
        value = getattr(args, key, None)
        if value is not None:
            doc[key] = value
    if getattr(args, "solver", None) is not None:
        doc["solver"] = {"variant": args.solver,
                         "ridge_lambda": getattr(args, "ridge_lambda", None) or 1.0}
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    return PolygridConfig.from_dict(doc)


def _write_json(path: str, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _load_dataset(path: str, task: str | None = None) -> Dataset:
    if path.endswith(".json"):
        doc = json.loads(Path(path).read_text())
        ds = make_dataset(
            name=doc.get("name", path),
            X_raw=np.array(doc["X_raw"], dtype=float),
            Y=None if doc.get("Y") is None else np.array(doc["Y"], dtype=int),
            task=doc.get("task"),
            domain_names=doc.get("domain_names"),
            label_names=doc.get("label_names"),
            ranges=doc.get("ranges"),
        )
        saved = doc.get("manifest", {})
        for key, value in saved.items():
            ds.manifest.setdefault(key, value)
        return ds
    return load_csv(path, task=task)


def _dataset_doc(ds: Dataset) -> dict:
    return {
        "name": ds.name,
        "task": ds.task,
        "domain_names": ds.domain_names,
        "label_names": ds.label_names,
        "X_raw": ds.X_raw.tolist(),
        "Y": None if ds.Y is None else ds.Y.tolist(),
        "ranges": [list(r) for r in ds.ranges],
        "manifest": ds.manifest,
    }


def _manifest_with_ranges(ds: Dataset) -> dict:
    manifest = dict(ds.manifest)
    manifest["ranges"] = [list(r) for r in ds.ranges]
    return manifest


def cmd_prep(args):
    ds = _load_dataset(args.input, task=args.task)
    _write_json(args.output, _dataset_doc(ds))
    manifest_path = args.manifest or (str(Path(args.output).with_suffix("")) + ".manifest.json")
    _write_json(manifest_path, _manifest_with_ranges(ds))
    print(json.dumps({"dataset": ds.name, "instances": ds.m, "features": ds.d,
                      "labels": ds.n_labels, "manifest": manifest_path}))


def cmd_synth(args):
    loadings = tuple(float(v) for v in args.loadings.split(",")) if args.loadings else None
    d = args.domains if args.domains else (len(loadings) if loadings else 4)
    spec = CongenericSpec(
        d=d,
        m=args.instances,
        loadings=loadings or tuple(np.linspace(0.8, 1.0, d)),
        eta_mean=args.eta_mean,
        eta_std=args.eta_std,
        error_std=args.error_std,
        score_range=(args.range_lo, args.range_hi),
    )
    ds = synth_congeneric(spec, seed=args.seed, name=args.name)
    if args.assignment != "none":
        synth_spec = AssignmentSynthSpec(
            mode=args.assignment,
            n_labels=args.labels,
            cutoff=args.cutoff,
            target_cardinality=args.cardinality,
            top_k=args.top_k,
            seed=args.seed,
        )
        ds = synth_assignment(ds, synth_spec)
    _write_json(args.output, _dataset_doc(ds))
    print(json.dumps({"dataset": ds.name, "instances": ds.m, "features": ds.d,
                      "labels": ds.n_labels, "task": ds.task}))


def cmd_fit(args):
    overrides = _load_config_file(args.config)
    ds = _load_dataset(args.dataset)
    if ds.Y is None:
        _fail("dataset has no assignment; run synth or provide labels")
    cfg = _config_from_args(args, overrides)
    instance = fit_model(
        ds.X, ds.Y, cfg, ds.task,
        label_names=ds.label_names,
        domain_names=ds.domain_names,
        dataset_manifest=_manifest_with_ranges(ds),
    )
    _write_json(args.output, instance.to_dict())
    print(json.dumps({"instance": args.output, "size": instance.size(),
                      "config": cfg.short_label()}))


def _load_instance(path: str) -> PolygridInstance:
    return PolygridInstance.from_dict(json.loads(Path(path).read_text()))


def cmd_predict(args):
    instance = _load_instance(args.instance)
    scores = [float(v) for v in args.scores.split(",")]
    if len(scores) != instance.d:
        _fail(f"expected {instance.d} scores, got {len(scores)}")
    x = np.array(scores)
    if not args.scaled:
        from .service import scale_scores

        x, errors = scale_scores(instance, scores)
        if errors:
            _fail("scores out of range", errors)
    pred = predict(instance, x)
    doc = {
        "scores": [float(v) for v in pred.scores],
        "labels": [int(v) for v in pred.labels],
        "label_names": [instance.label_names[j]
                        for j in range(instance.n_labels) if pred.labels[j] == 1],
        "ranking": None if pred.ranking is None else [int(v) for v in pred.ranking],
        "area": pred.area,
    }
    if args.output:
        _write_json(args.output, doc)
    print(json.dumps(doc))


def cmd_explain(args):
    instance = _load_instance(args.instance)
    rows = []
    for chunk in args.scores.split(";"):
        rows.append([float(v) for v in chunk.split(",")])
    X = np.array(rows)
    if not args.scaled:
        from .service import scale_scores

        scaled = []
        for row in rows:
            x, errors = scale_scores(instance, row)
            if errors:
                _fail("scores out of range", errors)
            scaled.append(x)
        X = np.array(scaled)
    preds = [predict(instance, row) for row in X]
    dm = build_diagram(instance, X, preds)
    if args.format in ("svg", "both"):
        Path(args.output).write_text(render_svg(dm))
        print(json.dumps({"svg": args.output}))
    if args.format in ("json", "both"):
        target = args.diagram_json or (str(Path(args.output).with_suffix("")) + ".diagram.json")
        _write_json(target, dm.to_dict())
        print(json.dumps({"diagram": target}))


def cmd_gridsearch(args):
    ds = _load_dataset(args.dataset)
    if args.reduced:
        grid = default_grid(
            ns_per_domain=(1,), n_a=(1, 2),
            vorders=("averages", "rho"),
            annulus_types=("s-invariant", "r-invariant"),
            sector_types=("miss", "cover"),
            solvers=("lstsq", "ridge"),
            cutoff_schemes=("single",),
        )
    else:
        grid = default_grid()
    best, table = grid_search(ds, grid, ss=args.repetitions, seed=args.seed)
    results_to_csv(table, args.output)
    summary = {
        name: {"config_index": idx, "config": cfg.short_label(), "mean": res.mean}
        for name, (idx, cfg, res) in best.items()
    }
    if args.best_output:
        _write_json(args.best_output, summary)
    print(json.dumps({"results": args.output, "best": summary}))


def cmd_evaluate(args):
    ds = _load_dataset(args.dataset)
    overrides = _load_config_file(args.config)
    cfg = _config_from_args(args, overrides)
    if args.models == "polygrid":
        results = list(run_experiment(
            ds, lambda: PolygridLearner(cfg), ss=args.repetitions, seed=args.seed,
        ).values())
    else:
        kinds = tuple(args.models.split(",")) if args.models != "all" else (
            "linear", "ridge", "random", "dt", "brdt", "rf", "brrf", "mlp")
        results = size_matched_comparison(
            [ds], cfg, baseline_kinds=kinds, ss=args.repetitions, seed=args.seed,
        )
    results_to_csv(results, args.output)
    print(json.dumps({"results": args.output, "rows": len(results)}))


def cmd_rank(args):
    import csv as csv_mod

    from .evaluation import RunResult

    results = []
    with open(args.results) as fh:
        for row in csv_mod.DictReader(fh):
            sample = [float(v) for k, v in row.items()
                      if k.startswith("rep") and v not in ("", None)]
            results.append(RunResult(
                dataset=row["dataset"], model=row["model"], config=row.get("config", ""),
                metric=row["metric"], sample=sample, alpha=float(row.get("alpha", 0.05)),
            ))
    metrics = sorted({r.metric for r in results})
    report = {}
    for name in metrics:
        A, ranking = dominance_and_echelons(results, name)
        report[name] = {"dominance": A.to_dict(), "ranking": ranking.to_dict()}
    _write_json(args.output, report)
    print(json.dumps({"report": args.output, "metrics": metrics}))


def cmd_validate(args):
    ds = _load_dataset(args.dataset)
    report = {"dataset": ds.name}
    synthesis = ds.manifest.get("synthesis")
    if synthesis:
        lam = np.array(synthesis["loadings"])
        err = np.array(synthesis["error_std"]) ** 2
        report["mcdonald_omega"] = mcdonald_omega(lam, err)
    if args.loadings:
        lam = np.array([float(v) for v in args.loadings.split(",")])
        err = np.array([float(v) for v in (args.error_variances or "0").split(",")])
        if len(err) == 1:
            err = np.full(len(lam), err[0])
        report["mcdonald_omega"] = mcdonald_omega(lam, err)
    cov = np.cov(ds.X_raw, rowvar=False)
    off = cov[~np.eye(ds.d, dtype=bool)]
    report["covariances_all_positive"] = bool(np.all(off > 0))
    report["min_covariance"] = float(off.min())
    report["sum_area"] = sum_area_violation_test(ds, max_pairs=args.max_pairs, seed=args.seed)
    if ds.Y is not None:
        report["stats"] = dataset_stats(ds)
    if args.output:
        _write_json(args.output, report)
    print(json.dumps(report))


def cmd_serve(args):
    from .service import serve

    instance = _load_instance(args.instance)
    serve(instance, host=args.host, port=args.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polygrid",
        description="Interpretable recommendations from psychometric assessments",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_flags(p):
        p.add_argument("--ns-per-domain", dest="ns_per_domain", type=int)
        p.add_argument("--n-a", dest="n_a", type=int)
        p.add_argument("--vorder", choices=("original", "rho", "averages", "measures"))
        p.add_argument("--sector-type", dest="sector_type", choices=("miss", "cover"))
        p.add_argument("--annulus-type", dest="annulus_type",
                       choices=("s-invariant", "r-invariant", "tree"))
        p.add_argument("--solver", choices=("lstsq", "ridge", "lstsqsym", "lstsquni"))
        p.add_argument("--ridge-lambda", dest="ridge_lambda", type=float)
        p.add_argument("--cutoff-scheme", dest="cutoff_scheme", choices=("single", "multiple"))
        p.add_argument("--threshold-granularity", dest="threshold_granularity", type=int)
        p.add_argument("--arc-resolution", dest="arc_resolution", type=int)
        p.add_argument("--config", help="JSON config file")

    p = sub.add_parser("prep", help="prepare a CSV dataset")
    p.add_argument("input")
    p.add_argument("--task", choices=("multiclass", "multilabel", "labelranking"))
    p.add_argument("--output", required=True)
    p.add_argument("--manifest")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--name", default="synthetic")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--domains", type=int)
    p.add_argument("--loadings", help="comma separated positive loadings")
    p.add_argument("--eta-mean", dest="eta_mean", type=float, default=14.0)
    p.add_argument("--eta-std", dest="eta_std", type=float, default=3.0)
    p.add_argument("--error-std", dest="error_std", type=float, default=0.8)
    p.add_argument("--range-lo", dest="range_lo", type=float, default=4.0)
    p.add_argument("--range-hi", dest="range_hi", type=float, default=20.0)
    p.add_argument("--assignment", default="none",
                   choices=("none", "sumscore-cutoff", "fuzzy-multilabel", "fuzzy-ranking"))
    p.add_argument("--labels", type=int, default=2)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--cardinality", type=float)
    p.add_argument("--top-k", dest="top_k", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit an instance on a prepared dataset")
    p.add_argument("dataset")
    add_model_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="score one assessment")
    p.add_argument("instance")
    p.add_argument("--scores", required=True, help="comma separated scores")
    p.add_argument("--scaled", action="store_true", help="scores already in (0, 1]")
    p.add_argument("--output")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("explain", help="emit an explanation diagram")
    p.add_argument("instance")
    p.add_argument("--scores", required=True,
                   help="semicolon separated rows of comma separated scores")
    p.add_argument("--scaled", action="store_true")
    p.add_argument("--format", choices=("svg", "json", "both"), default="svg")
    p.add_argument("--output", required=True)
    p.add_argument("--diagram-json", dest="diagram_json")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("gridsearch", help="stage 1: search model configurations")
    p.add_argument("dataset")
    p.add_argument("--repetitions", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reduced", action="store_true", help="small grid for smoke runs")
    p.add_argument("--output", required=True)
    p.add_argument("--best-output", dest="best_output")
    p.set_defaults(func=cmd_gridsearch)

    p = sub.add_parser("evaluate", help="stage 2: size-matched comparison")
    p.add_argument("dataset")
    add_model_flags(p)
    p.add_argument("--models", default="all",
                   help="'polygrid', 'all', or comma separated baseline kinds")
    p.add_argument("--repetitions", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rank", help="stage 3: dominance matrices and echelons")
    p.add_argument("results", help="results CSV from evaluate")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("validate", help="psychometric checks on a dataset")
    p.add_argument("dataset")
    p.add_argument("--loadings")
    p.add_argument("--error-variances", dest="error_variances")
    p.add_argument("--max-pairs", dest="max_pairs", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="run the prediction/explanation service")
    p.add_argument("instance")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8008)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except SystemExit:
        raise
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        _fail(str(exc) or exc.__class__.__name__)
    return 0


if __name__ == "__main__":
    sys.exit(main())
