"""Acceptance suite: one test per release criterion, one pass line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
summary lines. Tolerances are fixed here, not configurable.
"""

import time

import numpy as np
import pytest

from polygrid.baselines import mlp_size_schedule
from polygrid.core import (
    PolygridConfig,
    cyclic_arrangements,
    default_grid,
    downgrade,
    fit_multilabel,
    logranks,
    predict,
)
from polygrid.datasets import (
    AssignmentSynthSpec,
    CongenericSpec,
    Dataset,
    dataset_stats,
    make_benchmark_assessments,
    make_goodpoor_dataset,
    make_nested_multilabel_dataset,
    sum_area_violation_test,
    synth_assignment,
    synth_congeneric,
)
from polygrid.diagram import build_diagram, render_svg, replay_scores
from polygrid.evaluation import (
    PolygridLearner,
    RunResult,
    dominance_and_echelons,
    grid_search,
    run_experiment,
    size_matched_comparison,
)
from polygrid.geometry import (
    cell_coverage,
    partition_ud,
    polygon_area,
    roots_of_unity,
    uh_to_ud,
)
from polygrid.solvers import SolverKind


def report(name, ok, detail):
    marker = "PASS" if ok else "FAIL"
    print(f"[{marker}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_geometry_conservation():
    """1,000 random assessments x 144 partition shapes: coverage sums match
    polygon areas to 1e-6 relative; cell areas sum to pi within 1e-3."""
    t0 = time.time()
    rng = np.random.default_rng(20240801)
    d = 4
    X = rng.uniform(1e-3, 1.0, size=(1000, d))
    X[rng.integers(0, 1000, size=d), np.arange(d)] = 1.0  # scaled maxima hit 1
    Z, _ = uh_to_ud(X)
    areas = polygon_area(Z)

    worst_conservation = 0.0
    worst_completeness = 0.0
    combos = 0
    for nspd in (1, 2, 3):
        for n_a in range(1, 9):
            for ann in ("s-invariant", "r-invariant", "tree"):
                for sec in ("miss", "cover"):
                    tree = np.linspace(0.15, 0.9, n_a - 1) if ann == "tree" else None
                    part = partition_ud(n_a, nspd * d, annulus_type=ann,
                                        sector_type=sec, tree_radii=tree, d=d)
                    S = cell_coverage(Z, part)
                    rel = np.max(np.abs(S.sum(axis=1) - areas) / areas)
                    worst_conservation = max(worst_conservation, rel)
                    gap = abs(part.cell_areas().sum() - np.pi)
                    worst_completeness = max(worst_completeness, gap)
                    combos += 1
    elapsed = time.time() - t0
    ok = (combos == 144 and worst_conservation < 1e-6
          and worst_completeness < 1e-3 and elapsed < 120)
    report(
        "geometry conservation",
        ok,
        f"{combos} combos, worst relative error {worst_conservation:.2e}, "
        f"worst completeness gap {worst_completeness:.2e}, {elapsed:.1f}s",
    )


def test_worked_examples_exact():
    """Worked values reproduced exactly (or to 1e-9)."""
    checks = []

    out = downgrade(np.array([[1, 2, -1, -1]]))[0]
    checks.append(("downgrade", np.array_equal(out, [0, 1, 1, 0])))

    U = logranks(np.array([[3, 2, -1, -1]]))[0]
    checks.append(("logranks", np.allclose(U, [0, 0, 1 / 3, 2 / 3], atol=1e-9)))

    zeta = roots_of_unity(4)
    checks.append(("roots of unity", np.allclose(zeta, [1, 1j, -1, -1j], atol=1e-12)))

    sizes = mlp_size_schedule(18, d=4, n=2, repetitions=10)
    checks.append((
        "mlp schedule",
        sizes == [23, 9, 23, 16, 23, 9, 23, 16, 23, 9] and abs(np.mean(sizes) - 17.4) < 1e-9,
    ))

    x = np.array([0.767, 0.630, 0.600, 0.525])
    part = partition_ud(1, 4, sector_type="miss", d=4)
    Z, _ = uh_to_ud(x[np.newaxis, :])
    s = cell_coverage(Z, part)[0]
    nu = np.sin(np.pi / 2) / 2
    expected = nu * x * np.roll(x, -1)
    checks.append(("cyclic interaction features", np.allclose(s, expected, atol=1e-9)))

    Y = np.zeros((100, 2), dtype=int)
    Y[:41, 0] = 1
    Y[41:, 1] = 1
    ds = Dataset("t", np.ones((100, 4)), np.ones((100, 4)), Y, "multiclass",
                 list("abcd"), ["g", "p"], [(0, 1)] * 4)
    imb = dataset_stats(ds)["imbalance"]
    checks.append(("imbalance", abs(imb - (1 - 41 / 59)) < 1e-9))

    failed = [name for name, ok in checks if not ok]
    report("paper worked examples", not failed,
           f"{len(checks)} checks" + (f", failed: {failed}" if failed else ""))


def test_sum_area_monotonicity():
    """Zero-error equal-range one-factor data: no sum/area order violations."""
    t0 = time.time()
    spec4 = CongenericSpec(d=4, m=100, loadings=(0.9, 1.0, 0.8, 0.95),
                           error_std=0.0, score_range=(0.0, 100.0))
    ds4 = synth_congeneric(spec4, seed=11)
    rep4 = sum_area_violation_test(ds4)

    spec5 = CongenericSpec(d=5, m=200, loadings=(0.9, 1.0, 0.8, 0.95, 0.85),
                           error_std=0.0, score_range=(0.0, 100.0))
    ds5 = synth_congeneric(spec5, seed=12)
    rep5 = sum_area_violation_test(ds5)

    elapsed = time.time() - t0
    ok = (
        rep4["arrangements"] == 3
        and rep5["arrangements"] == 12
        and len(cyclic_arrangements(4)) == 3
        and len(cyclic_arrangements(5)) == 12
        and rep4["total_violations"] == 0
        and rep5["total_violations"] == 0
        and elapsed < 60
    )
    report(
        "sum-area monotonicity",
        ok,
        f"d=4: {rep4['arrangements']} arrangements, {rep4['total_violations']} violations; "
        f"d=5: {rep5['arrangements']} arrangements, {rep5['total_violations']} violations; "
        f"{elapsed:.1f}s",
    )


def test_config_ordering_reproduction():
    """Good/Poor sum-score task: the ridge/cover config clears 0.95, beats the
    default config with disjoint intervals, and a second annulus helps."""
    t0 = time.time()
    ds = make_goodpoor_dataset(seed=42)
    cfg_best = PolygridConfig(1, 1, "averages", "cover", "s-invariant",
                              SolverKind("ridge"), "single")
    cfg_default = PolygridConfig(1, 1, "rho", "miss", "s-invariant",
                                 SolverKind("lstsq"), "single")
    cfg_na2 = PolygridConfig(1, 2, "rho", "miss", "s-invariant",
                             SolverKind("lstsq"), "single")

    res_best = run_experiment(ds, lambda: PolygridLearner(cfg_best),
                              ss=100, seed=7)["accuracy"]
    res_default = run_experiment(ds, lambda: PolygridLearner(cfg_default),
                                 ss=100, seed=7)["accuracy"]
    res_na2 = run_experiment(ds, lambda: PolygridLearner(cfg_na2),
                             ss=100, seed=7)["accuracy"]
    elapsed = time.time() - t0

    cond_a = res_best.mean >= 0.95
    cond_b = res_best.ci[0] > res_default.ci[1]
    cond_c = res_na2.mean > res_default.mean
    ok = cond_a and cond_b and cond_c and elapsed < 300
    report(
        "config ordering",
        ok,
        f"ridge/cover {res_best.mean:.3f} (>=0.95 {cond_a}), default {res_default.mean:.3f} "
        f"(CI separated {cond_b}), +annulus {res_na2.mean:.3f} (improves {cond_c}), "
        f"{elapsed:.1f}s",
    )


def test_iris_subset_accuracy():
    """Four-feature flower data, 120/30 splits: mean subset accuracy >= 0.80."""
    t0 = time.time()
    from sklearn.datasets import load_iris

    iris = load_iris()
    Y = np.eye(3, dtype=int)[iris.target]
    X = iris.data / iris.data.max(axis=0)
    cfg = PolygridConfig(1, 1, "original", "cover", "s-invariant",
                         SolverKind("lstsqsym"), "single")
    accs = []
    for rep in range(50):
        rng = np.random.default_rng((2024, rep))
        idx = rng.permutation(len(X))
        tr, te = idx[:120], idx[120:]
        inst = fit_multilabel(X[tr], Y[tr], cfg, task="multiclass")
        accs.append(np.mean(
            [np.array_equal(predict(inst, X[i]).labels, Y[i]) for i in te]
        ))
    elapsed = time.time() - t0
    mean_acc = float(np.mean(accs))
    ok = mean_acc >= 0.80 and elapsed < 60
    report("iris check", ok, f"mean subset accuracy {mean_acc:.3f} over 50 splits, "
                             f"{elapsed:.1f}s")


def test_cardinality_calibration():
    """Fuzzy assignment synthesis hits 1.08 (11 labels) and 4.54 (22 labels)
    within 0.02 on all three synthetic assessment sets."""
    sets = [
        make_benchmark_assessments("whoqol-like", m=100, seed=31),
        make_benchmark_assessments("deficit-like", m=510, seed=32),
        make_benchmark_assessments("capacity-like", m=718, seed=33),
    ]
    details = []
    ok = True
    for ds in sets:
        for n_labels, target in ((11, 1.08), (22, 4.54)):
            out = synth_assignment(ds, AssignmentSynthSpec(
                mode="fuzzy-multilabel", n_labels=n_labels,
                target_cardinality=target, seed=5,
            ))
            achieved = dataset_stats(out)["cardinality"]
            hit = abs(achieved - target) <= 0.02
            ok = ok and hit
            details.append(f"{ds.name} n={n_labels}: {achieved:.3f}")
    report("cardinality calibration", ok, "; ".join(details))


def test_harness_sanity():
    """Reduced grid + size-matched comparison: the chance model's dominance
    row is zero and its column is saturated; hand-built chains give three
    singleton echelons."""
    t0 = time.time()

    datasets = [make_nested_multilabel_dataset(seed=s) for s in (1, 2, 3)]

    grid = default_grid(
        ns_per_domain=(1,), n_a=(1, 2),
        vorders=("averages", "rho"),
        annulus_types=("s-invariant", "r-invariant"),
        sector_types=("miss", "cover"),
        solvers=("lstsq", "ridge"),
        cutoff_schemes=("single",),
    )
    assert len(grid) <= 64
    best, _ = grid_search(datasets[0], grid, ss=20, seed=13,
                          metrics=("accuracy",))
    _, best_cfg, _ = best["accuracy"]

    results = size_matched_comparison(
        datasets, best_cfg, ss=20, seed=13,
        metrics=("accuracy", "hammingl", "f1.micro"),
    )

    ok = True
    details = [f"grid {len(grid)} configs, best {best_cfg.short_label()!r}"]
    for name in ("accuracy", "hammingl", "f1.micro"):
        A, _ = dominance_and_echelons(results, name)
        r = A.models.index("random")
        row = np.delete(A.A[r, :], r)
        col = np.delete(A.A[:, r], r)
        row_ok = bool(np.all(row == 0))
        col_ok = bool(np.all(col == len(datasets)))
        ok = ok and row_ok and col_ok
        details.append(f"{name}: random row zero {row_ok}, column saturated {col_ok}")

    chain = []
    rng = np.random.default_rng(99)
    for dsn in ("d1", "d2", "d3"):
        for model, base in (("M1", 0.9), ("M2", 0.6), ("M3", 0.3)):
            chain.append(RunResult(dataset=dsn, model=model, config="",
                                   metric="accuracy",
                                   sample=list(base + 0.001 * rng.uniform(size=10))))
    _, ranking = dominance_and_echelons(chain, "accuracy")
    echelons_ok = [e["members"] for e in ranking.echelons] == [["M1"], ["M2"], ["M3"]]
    ok = ok and echelons_ok
    details.append(f"singleton echelons {echelons_ok}")

    elapsed = time.time() - t0
    ok = ok and elapsed < 600
    report("harness sanity", ok, "; ".join(details) + f"; {elapsed:.1f}s")


def test_faithfulness_round_trip():
    """100 random predictions replay from the diagram to 1e-9; SVG bytes are
    deterministic."""
    ds = make_goodpoor_dataset(seed=55)
    cfg = PolygridConfig(2, 2, "averages", "cover", "r-invariant",
                         SolverKind("ridge"), "single")
    inst = fit_multilabel(ds.X, ds.Y, cfg, task="multiclass",
                          label_names=ds.label_names, domain_names=ds.domain_names)
    rng = np.random.default_rng(56)
    rows = ds.X[rng.choice(ds.m, size=100, replace=True)]
    worst = 0.0
    for row in rows:
        pred = predict(inst, row)
        dm = build_diagram(inst, row[np.newaxis, :], [pred])
        replayed = replay_scores(dm)
        tags = {c.col: c.tag.value for c in dm.charts if c.kind == "matching"}
        for col, value in replayed[1].items():
            worst = max(worst, abs(value - tags[col]))
    pred = predict(inst, ds.X[0])
    svg_a = render_svg(build_diagram(inst, ds.X[:1], [pred]))
    svg_b = render_svg(build_diagram(inst, ds.X[:1], [predict(inst, ds.X[0])]))
    deterministic = svg_a.encode() == svg_b.encode()
    ok = worst < 1e-9 and deterministic
    report("faithfulness round-trip", ok,
           f"worst tag replay error {worst:.2e}, svg deterministic {deterministic}")
