import numpy as np
import pytest

from polygrid.core import downgrade
from polygrid.datasets import (
    AssignmentSynthSpec,
    CongenericSpec,
    Dataset,
    calibrate_lambda_cut,
    dataset_stats,
    fuzzy_c_means,
    is_sum_area_violation,
    lambda_cut,
    load_csv,
    make_benchmark_assessments,
    make_dataset,
    mcdonald_omega,
    prepare_scores,
    save_csv,
    sum_area_violation_test,
    synth_assignment,
    synth_congeneric,
)


class TestPrepare:
    def test_scaling_records_maxima(self):
        X_raw = np.array([[4.0, 10.0], [8.0, 20.0]])
        X, manifest = prepare_scores(X_raw)
        assert np.allclose(X, [[0.5, 0.5], [1.0, 1.0]])
        assert manifest["scaling_maxima"] == [8.0, 20.0]

    def test_zero_shifted_by_epsilon(self):
        X, manifest = prepare_scores(np.array([[0.0, 5.0], [10.0, 5.0]]))
        assert X[0, 0] == 1e-6
        assert manifest["zeros_shifted"] == 1

    def test_negative_rejected_with_coordinates(self):
        with pytest.raises(ValueError, match="row 1, column 0"):
            prepare_scores(np.array([[1.0, 2.0], [-0.5, 3.0]]))

    def test_idempotent(self):
        X, _ = prepare_scores(np.array([[2.0, 3.0], [4.0, 6.0]]))
        X2, _ = prepare_scores(X)
        assert np.array_equal(X, X2)


class TestLoadCsv:
    def test_iris_like_multiclass(self, tmp_path):
        from sklearn.datasets import load_iris

        iris = load_iris()
        path = tmp_path / "iris.csv"
        names = [n.replace(" (cm)", "") for n in iris.feature_names]
        with open(path, "w") as fh:
            fh.write(",".join([f"domain:{n}" for n in names] + ["class:species"]) + "\n")
            for row, target in zip(iris.data, iris.target):
                fh.write(",".join(map(str, row)) + f",{iris.target_names[target]}\n")
        ds = load_csv(path)
        assert ds.task == "multiclass"
        assert ds.m == 150 and ds.d == 4 and ds.n_labels == 3
        assert np.all(ds.Y.sum(axis=1) == 1)
        assert ds.label_names == ["setosa", "versicolor", "virginica"]

    def test_negative_score_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("domain:a,domain:b,domain:c\n1,2,3\n1,-2,3\n")
        with pytest.raises(ValueError, match="row 1, column 1"):
            load_csv(path)

    def test_missing_value_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("domain:a,domain:b\n1,\n")
        with pytest.raises(ValueError, match="missing"):
            load_csv(path)

    def test_ranking_roundtrip(self, tmp_path):
        path = tmp_path / "rank.csv"
        path.write_text(
            "domain:a,domain:b,domain:c,label:0,label:1,label:2\n"
            "1,2,3,2,0,-1\n"
            "3,2,1,1,-1,-1\n"
        )
        ds = load_csv(path)
        assert ds.task == "labelranking"
        assert np.array_equal(ds.Y[0], [2, 0, -1])

    def test_duplicate_ranking_rejected(self, tmp_path):
        path = tmp_path / "rank.csv"
        path.write_text("domain:a,domain:b,domain:c,label:0,label:1\n1,2,3,1,1\n")
        with pytest.raises(ValueError):
            load_csv(path, task="labelranking")

    def test_save_and_reload(self, tmp_path):
        ds = make_dataset("t", np.array([[4.0, 10.0], [8.0, 20.0]]),
                          Y=np.array([[1, 0], [0, 1]]), task="multilabel")
        path = tmp_path / "out.csv"
        save_csv(ds, path)
        back = load_csv(path)
        assert np.allclose(back.X_raw, ds.X_raw)
        assert np.array_equal(back.Y, ds.Y)


class TestCongeneric:
    def test_zero_error_perfect_correlation(self):
        spec = CongenericSpec(d=4, m=50, loadings=(0.8, 1.0, 0.9, 0.7),
                              error_std=0.0, score_range=(0.0, 100.0))
        ds = synth_congeneric(spec, seed=1)
        C = np.corrcoef(ds.X_raw, rowvar=False)
        assert np.allclose(C, 1.0, atol=1e-9)

    def test_positive_covariances(self):
        spec = CongenericSpec(d=4, m=500, loadings=(0.84, 1.0, 0.85, 0.77),
                              eta_mean=16, eta_std=3, error_std=0.8,
                              score_range=(4.0, 20.0))
        ok = 0
        for seed in range(100):
            ds = synth_congeneric(spec, seed=seed)
            cov = np.cov(ds.X_raw, rowvar=False)
            off = cov[~np.eye(4, dtype=bool)]
            ok += int(np.all(off > 0))
        assert ok >= 99

    def test_scores_clipped_to_range(self):
        spec = CongenericSpec(d=3, m=100, loadings=(1.0, 1.0, 1.0),
                              error_std=5.0, score_range=(4.0, 20.0))
        ds = synth_congeneric(spec, seed=2)
        assert ds.X_raw.min() >= 4.0 and ds.X_raw.max() <= 20.0

    def test_invalid_loadings(self):
        with pytest.raises(ValueError):
            CongenericSpec(d=2, m=10, loadings=(1.0, -0.5))


class TestOmega:
    def test_zero_error_gives_one(self):
        assert mcdonald_omega([0.8, 1.0, 0.9], [0, 0, 0]) == 1.0

    def test_worked_value(self):
        assert mcdonald_omega([1, 1, 1, 1], [4, 4, 4, 4]) == pytest.approx(0.5)

    def test_monotone_in_loadings(self):
        low = mcdonald_omega([1, 1], [2, 2])
        high = mcdonald_omega([2, 2], [2, 2])
        assert high > low

    def test_all_zero_loadings_rejected(self):
        with pytest.raises(ValueError):
            mcdonald_omega([0, 0], [1, 1])


class TestFuzzyAssignments:
    def test_lambda_cut_monotone(self):
        rng = np.random.default_rng(3)
        U = rng.dirichlet(np.ones(5), size=200)
        cards = [lambda_cut(U, lam).sum(axis=1).mean() for lam in np.linspace(0, 1, 21)]
        assert all(a >= b - 1e-12 for a, b in zip(cards, cards[1:]))

    def test_calibration_hits_target(self):
        ds = make_benchmark_assessments(m=200, seed=4)
        U, _ = fuzzy_c_means(ds.X, 11, seed=4)
        lam, achieved = calibrate_lambda_cut(U, 1.08, 0.02)
        assert abs(achieved - 1.08) <= 0.02

    def test_calibration_reports_unreachable(self):
        U = np.ones((10, 3)) / 3.0
        with pytest.raises(ValueError, match="unreachable|failed"):
            calibrate_lambda_cut(U, 2.0, 0.001)

    def test_cutoff_below_all_sums(self):
        ds = make_benchmark_assessments(m=50, seed=5)
        out = synth_assignment(ds, AssignmentSynthSpec(mode="sumscore-cutoff", cutoff=-1.0))
        assert np.all(out.Y[:, 0] == 1)

    def test_ranking_consistent_with_multilabel(self):
        ds = make_benchmark_assessments(m=150, seed=6)
        ml = synth_assignment(
            ds, AssignmentSynthSpec(mode="fuzzy-multilabel", n_labels=6,
                                    target_cardinality=2.0, seed=6),
        )
        lr = synth_assignment(
            ds, AssignmentSynthSpec(mode="fuzzy-ranking", n_labels=6, top_k=2, seed=6),
        )
        lam = ml.manifest["assignment"]["lambda"]
        U, _ = fuzzy_c_means(ds.X, 6, seed=6)
        presence = downgrade(lr.Y)
        # the ranked top-2 labels are exactly the lambda-cut labels whenever
        # the cut keeps two labels
        cut = lambda_cut(U, lam)
        two = cut.sum(axis=1) == 2
        assert two.any()
        assert np.array_equal(presence[two], cut[two])


class TestStats:
    def test_imbalance_from_split(self):
        Y = np.zeros((100, 2), dtype=int)
        Y[:41, 0] = 1
        Y[41:, 1] = 1
        ds = Dataset("t", np.ones((100, 4)), np.ones((100, 4)), Y, "multiclass",
                     ["a", "b", "c", "d"], ["g", "p"], [(0, 1)] * 4)
        stats = dataset_stats(ds)
        assert stats["imbalance"] == pytest.approx(1 - 41 / 59, abs=1e-9)
        assert stats["cardinality"] == 1.0
        assert stats["labelsets"] == 2

    def test_single_labelsets(self):
        Y = np.array([[1, 0], [1, 0], [0, 1]])
        ds = Dataset("t", np.ones((3, 3)), np.ones((3, 3)), Y, "multilabel",
                     ["a", "b", "c"], ["x", "y"], [(0, 1)] * 3)
        stats = dataset_stats(ds)
        assert stats["labelsets"] == 2
        assert stats["single_labelsets"] == 1

    def test_identical_rows(self):
        Y = np.tile([1, 1, 0], (5, 1))
        ds = Dataset("t", np.ones((5, 3)), np.ones((5, 3)), Y, "multilabel",
                     ["a", "b", "c"], ["x", "y", "z"], [(0, 1)] * 3)
        stats = dataset_stats(ds)
        assert stats["labelsets"] == 1
        assert stats["single_labelsets"] == 0


class TestSumAreaViolations:
    def test_zero_error_no_violations_d4(self):
        spec = CongenericSpec(d=4, m=100, loadings=(0.9, 1.0, 0.8, 0.95),
                              error_std=0.0, score_range=(0.0, 100.0))
        ds = synth_congeneric(spec, seed=7)
        report = sum_area_violation_test(ds)
        assert report["arrangements"] == 3
        assert report["total_violations"] == 0
        assert report["pairs_per_arrangement"] == 100 * 99 // 2

    def test_zero_error_no_violations_d5(self):
        spec = CongenericSpec(d=5, m=200, loadings=(0.9, 1.0, 0.8, 0.95, 0.85),
                              error_std=0.0, score_range=(0.0, 100.0))
        ds = synth_congeneric(spec, seed=8)
        report = sum_area_violation_test(ds)
        assert report["arrangements"] == 12
        assert report["total_violations"] == 0

    def test_flagged_pair(self):
        assert is_sum_area_violation(4.042, 4.067, 1.548, 1.543)
        assert not is_sum_area_violation(4.0, 5.0, 1.0, 2.0)

    def test_noisy_data_reports_rates(self):
        ds = make_benchmark_assessments(kind="capacity-like", m=60, seed=9,
                                        error_std=3.0)
        report = sum_area_violation_test(ds)
        assert report["arrangements"] == 12
        assert 0 <= report["weighted_violation_rate"] <= 1
        assert len(report["per_arrangement"]) == 12
