import numpy as np
import pytest

from polygrid.core import PolygridConfig
from polygrid.datasets import make_separable_dataset
from polygrid.evaluation import (
    BaselineLearner,
    PolygridLearner,
    RunResult,
    dominance_and_echelons,
    grid_search,
    interval_jaccard,
    kendall_tau,
    lr_accuracy,
    lr_loss,
    metric,
    metric_direction,
    run_experiment,
)
from polygrid.solvers import SolverKind


class TestBasicMetrics:
    def test_perfect_prediction(self):
        Y = np.array([[1, 0, 1], [0, 1, 0], [1, 1, 0]])
        assert metric("accuracy", Y, Y) == 1.0
        assert metric("hammingl", Y, Y) == 0.0
        assert metric("f1.micro", Y, Y) == 1.0
        assert metric("f1.macro", Y, Y) == 1.0
        assert metric("f1.weigh", Y, Y) == 1.0

    def test_hamming_complement(self):
        rng = np.random.default_rng(0)
        Y = rng.integers(0, 2, size=(30, 5))
        P = rng.integers(0, 2, size=(30, 5))
        agree = np.mean(Y == P)
        assert metric("hammingl", Y, P) == pytest.approx(1 - agree)

    def test_f1_against_sklearn(self):
        from sklearn.metrics import f1_score

        rng = np.random.default_rng(1)
        for _ in range(10):
            Y = rng.integers(0, 2, size=(40, 6))
            P = rng.integers(0, 2, size=(40, 6))
            assert metric("f1.micro", Y, P) == pytest.approx(
                f1_score(Y, P, average="micro", zero_division=0))
            assert metric("f1.macro", Y, P) == pytest.approx(
                f1_score(Y, P, average="macro", zero_division=0))
            assert metric("f1.weigh", Y, P) == pytest.approx(
                f1_score(Y, P, average="weighted", zero_division=0))

    def test_bounds(self):
        rng = np.random.default_rng(2)
        Y = rng.integers(0, 2, size=(20, 4))
        P = rng.integers(0, 2, size=(20, 4))
        S = rng.normal(size=(20, 4))
        for name in ("accuracy", "hammingl", "f1.micro", "f1.macro", "f1.weigh"):
            assert 0 <= metric(name, Y, P) <= 1
        assert 0 <= metric("jaccsim", Y, P, scores=S) <= 1


class TestIntervalJaccard:
    def test_disjoint_intervals(self):
        Y = np.array([[0], [0], [1], [1]])
        S = np.array([[0.0], [0.4], [0.6], [1.0]])
        assert interval_jaccard(Y, S) == 0.0

    def test_identical_intervals(self):
        Y = np.array([[0], [0], [1], [1]])
        S = np.array([[0.0], [1.0], [0.0], [1.0]])
        assert interval_jaccard(Y, S) == 1.0

    def test_against_interval_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            Y = rng.integers(0, 2, size=(15, 3))
            S = rng.normal(size=(15, 3))
            expected = []
            for j in range(3):
                neg = S[Y[:, j] == 0, j]
                pos = S[Y[:, j] == 1, j]
                if len(neg) == 0 or len(pos) == 0:
                    expected.append(0.0)
                    continue
                a1, a2 = neg.min(), neg.max()
                b1, b2 = pos.min(), pos.max()
                inter = max(0.0, min(a2, b2) - max(a1, b1))
                union = max(a2, b2) - min(a1, b1)
                expected.append(inter / union if union > 0 else 1.0)
            assert interval_jaccard(Y, S) == pytest.approx(np.mean(expected))

    def test_empty_class_contributes_zero(self):
        Y = np.array([[1], [1]])
        S = np.array([[0.2], [0.8]])
        assert interval_jaccard(Y, S) == 0.0


class TestRankingMetrics:
    def test_identical_rankings(self):
        Y = np.array([[2, 0, 1, -1], [1, -1, -1, -1]])
        assert kendall_tau(Y, Y) == 1.0
        assert lr_accuracy(Y, Y) == 1.0
        assert lr_loss(Y, Y) == 0.0

    def test_reversed_complete_ranking(self):
        Y = np.array([[0, 1, 2, 3]])
        P = np.array([[3, 2, 1, 0]])
        assert kendall_tau(Y, P) == -1.0

    def test_missing_label_counts_discordant(self):
        Y = np.array([[0, 1, -1]])
        P = np.array([[0, -1, -1]])
        assert kendall_tau(Y, P) == -1.0

    def test_lracc_requires_same_length(self):
        Y = np.array([[0, 1, -1]])
        P = np.array([[0, -1, -1]])
        assert lr_accuracy(Y, P) == 0.0
        assert lr_loss(Y, P) == pytest.approx(1 / 3)

    def test_single_label_rows_skipped(self):
        Y = np.array([[0, -1], [1, -1]])
        P = np.array([[1, -1], [0, -1]])
        assert kendall_tau(Y, P) == 0.0


class TestRunExperiment:
    def test_determinism(self):
        ds = make_separable_dataset(m=60, seed=4)
        cfg = PolygridConfig(1, 1, "averages", "cover", solver=SolverKind("ridge"))
        a = run_experiment(ds, lambda: PolygridLearner(cfg), ss=5, seed=9)
        b = run_experiment(ds, lambda: PolygridLearner(cfg), ss=5, seed=9)
        for name in a:
            assert a[name].sample == b[name].sample

    def test_ci_contains_mean(self):
        ds = make_separable_dataset(m=60, seed=5)
        cfg = PolygridConfig(1, 1, "averages", "cover", solver=SolverKind("ridge"))
        res = run_experiment(ds, lambda: PolygridLearner(cfg), ss=8, seed=1)
        for r in res.values():
            lo, hi = r.ci
            assert lo <= r.mean <= hi

    def test_single_rep_degenerate_ci(self):
        ds = make_separable_dataset(m=60, seed=6)
        cfg = PolygridConfig()
        with pytest.warns(UserWarning, match="single repetition"):
            res = run_experiment(ds, lambda: PolygridLearner(cfg), ss=1, seed=2)
        r = res["accuracy"]
        assert r.ci == (r.mean, r.mean)

    def test_high_accuracy_on_separable(self):
        ds = make_separable_dataset(m=100, seed=7)
        cfg = PolygridConfig(1, 1, "averages", "cover", solver=SolverKind("ridge"))
        res = run_experiment(ds, lambda: PolygridLearner(cfg), ss=20, seed=3)
        assert res["accuracy"].mean >= 0.9

    def test_baseline_learner_runs(self):
        ds = make_separable_dataset(m=60, seed=8)
        res = run_experiment(ds, lambda: BaselineLearner("ridge"), ss=4, seed=4)
        assert 0 <= res["accuracy"].mean <= 1


class TestGridSearch:
    def test_single_config_returned(self):
        ds = make_separable_dataset(m=60, seed=9)
        cfg = PolygridConfig(1, 1, "averages", "cover", solver=SolverKind("ridge"))
        best, table = grid_search(ds, [cfg], ss=4, seed=5)
        for name, (idx, chosen, res) in best.items():
            assert idx == 0 and chosen is cfg
        assert len(table) == len(best)

    def test_dominant_config_wins(self):
        ds = make_separable_dataset(m=100, seed=10)
        good = PolygridConfig(1, 1, "averages", "cover", solver=SolverKind("ridge"))
        bad = PolygridConfig(1, 1, "rho", "miss", solver=SolverKind("lstsq"))
        best, _ = grid_search(ds, [bad, good], ss=10, seed=6)
        idx, chosen, res = best["accuracy"]
        assert idx == 1


def make_result(model, dataset, sample, metric_name="accuracy"):
    return RunResult(dataset=dataset, model=model, config="", metric=metric_name,
                     sample=list(sample))


class TestDominance:
    def test_three_model_chain(self):
        results = []
        rng = np.random.default_rng(11)
        for dsn in ("d1", "d2", "d3"):
            results.append(make_result("M1", dsn, 0.9 + 0.001 * rng.uniform(size=10)))
            results.append(make_result("M2", dsn, 0.6 + 0.001 * rng.uniform(size=10)))
            results.append(make_result("M3", dsn, 0.3 + 0.001 * rng.uniform(size=10)))
        A, ranking = dominance_and_echelons(results, "accuracy")
        assert [e["members"] for e in ranking.echelons] == [["M1"], ["M2"], ["M3"]]
        i1, i2, i3 = (A.models.index(m) for m in ("M1", "M2", "M3"))
        assert A.A[i1, i2] == 3 and A.A[i1, i3] == 3 and A.A[i2, i3] == 3
        assert A.A[i2, i1] == 0 and A.A[i3, i1] == 0

    def test_identical_models_single_echelon(self):
        results = []
        for dsn in ("d1", "d2"):
            for m in ("A", "B", "C"):
                results.append(make_result(m, dsn, [0.5] * 6))
        _, ranking = dominance_and_echelons(results, "accuracy")
        assert len(ranking.echelons) == 1
        assert sorted(ranking.echelons[0]["members"]) == ["A", "B", "C"]

    def test_lower_better_direction(self):
        results = []
        rng = np.random.default_rng(12)
        for dsn in ("d1", "d2"):
            results.append(make_result("low", dsn, 0.1 + 0.001 * rng.uniform(size=8), "hammingl"))
            results.append(make_result("high", dsn, 0.5 + 0.001 * rng.uniform(size=8), "hammingl"))
        A, ranking = dominance_and_echelons(results, "hammingl")
        assert ranking.echelons[0]["leader"] == "low"

    def test_antisymmetry(self):
        rng = np.random.default_rng(13)
        results = []
        for dsn in ("d1", "d2", "d3", "d4"):
            for m in ("A", "B", "C"):
                base = rng.uniform(0.3, 0.9)
                results.append(make_result(m, dsn, base + 0.01 * rng.uniform(size=10)))
        A, _ = dominance_and_echelons(results, "accuracy")
        n = len(A.models)
        for i in range(n):
            assert A.A[i, i] == 0
            for j in range(n):
                if i != j:
                    # per dataset at most one direction increments
                    assert A.A[i, j] + A.A[j, i] <= len(A.datasets)

    def test_echelon_partition_property(self):
        # fuzz: every model lands in exactly one echelon
        rng = np.random.default_rng(14)
        for trial in range(20):
            models = [f"m{k}" for k in range(rng.integers(2, 7))]
            results = []
            for dsn in ("d1", "d2", "d3"):
                for m in models:
                    base = rng.uniform(0, 1)
                    width = rng.uniform(0.001, 0.3)
                    results.append(make_result(m, dsn, base + width * rng.uniform(size=6)))
            _, ranking = dominance_and_echelons(results, "accuracy")
            seen = [m for e in ranking.echelons for m in e["members"]]
            assert sorted(seen) == sorted(models)

    def test_missing_cell_rejected(self):
        results = [make_result("A", "d1", [0.5] * 5), make_result("B", "d2", [0.5] * 5)]
        with pytest.raises(ValueError, match="missing"):
            dominance_and_echelons(results, "accuracy")


class TestDirections:
    def test_directions(self):
        assert metric_direction("accuracy") == 1
        assert metric_direction("hammingl") == -1
        assert metric_direction("jaccsim") == -1
        assert metric_direction("lrloss") == -1
        assert metric_direction("ktau") == 1
