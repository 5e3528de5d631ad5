"""Metrics, repeated-split experiments, grid search, and model ranking.

The experiment runner evaluates a learner over ss independent train/test
splits and reports per-split metric samples with a Student-t confidence
interval. Grid search picks the best configuration per metric. Ranking
across datasets replaces significance tests with dominance counts: model A
dominates model B on a dataset when their confidence intervals do not
overlap and A's point estimate is better. An echelon hierarchy is then
formed by repeatedly hiring the best-ranked free model as a leader together
with every free model competitive with it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as scipy_stats

from .baselines import BASELINE_KINDS, WeightBudget, fit_baseline, model_size
from .core import PolygridConfig, encode_ranking, fit as fit_polygrid, predict
from .datasets import Dataset

LOWER_BETTER = {"hammingl", "jaccsim", "lrloss"}
MULTILABEL_METRICS = ("accuracy", "hammingl", "f1.micro", "f1.macro", "f1.weigh", "jaccsim")
RANKING_METRICS = ("ktau", "lracc", "lrloss")


def metric_direction(name: str) -> int:
    """+1 when higher is better, -1 when lower is better."""
    return -1 if name in LOWER_BETTER else 1


def _f1_counts(tp, fp, fn):
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if denom else 0.0


def subset_accuracy(Y_true, Y_pred) -> float:
    return float(np.mean(np.all(Y_true == Y_pred, axis=1)))


def hamming_loss(Y_true, Y_pred) -> float:
    return float(np.mean(Y_true != Y_pred))


def f1_micro(Y_true, Y_pred) -> float:
    tp = int(np.sum((Y_true == 1) & (Y_pred == 1)))
    fp = int(np.sum((Y_true == 0) & (Y_pred == 1)))
    fn = int(np.sum((Y_true == 1) & (Y_pred == 0)))
    return _f1_counts(tp, fp, fn)


def _per_label_f1(Y_true, Y_pred):
    tp = np.sum((Y_true == 1) & (Y_pred == 1), axis=0)
    fp = np.sum((Y_true == 0) & (Y_pred == 1), axis=0)
    fn = np.sum((Y_true == 1) & (Y_pred == 0), axis=0)
    denom = 2 * tp + fp + fn
    with np.errstate(divide="ignore", invalid="ignore"):
        f1 = np.where(denom > 0, 2 * tp / np.where(denom == 0, 1, denom), 0.0)
    return f1


def f1_macro(Y_true, Y_pred) -> float:
    return float(_per_label_f1(Y_true, Y_pred).mean())


def f1_weighted(Y_true, Y_pred) -> float:
    support = Y_true.sum(axis=0)
    total = support.sum()
    if total == 0:
        return 0.0
    return float((_per_label_f1(Y_true, Y_pred) * support).sum() / total)


def interval_jaccard(Y_true, scores) -> float:
    """Overlap of the score intervals of actual negatives and positives.

    For each label, the minimal interval spanned by the scores of the
    ground-truth negatives is intersected with that of the positives;
    the Jaccard ratio of the interval lengths is averaged over labels.
    A label missing one of the two classes contributes zero overlap.
    Lower is better: overlap means the scores do not separate the classes.
    """
    Y_true = np.asarray(Y_true)
    scores = np.asarray(scores, dtype=float)
    n = Y_true.shape[1]
    values = []
    for j in range(n):
        neg = scores[Y_true[:, j] == 0, j]
        pos = scores[Y_true[:, j] == 1, j]
        if len(neg) == 0 or len(pos) == 0:
            values.append(0.0)
            continue
        lo = max(neg.min(), pos.min())
        hi = min(neg.max(), pos.max())
        inter = max(0.0, hi - lo)
        union = max(neg.max(), pos.max()) - min(neg.min(), pos.min())
        values.append(inter / union if union > 0 else (1.0 if inter == 0 else 0.0))
    return float(np.mean(values))


def _ranking_rows(Y):
    """Ordered label lists from a ranking encoding."""
    rows = []
    for row in np.atleast_2d(Y):
        rows.append([int(v) for v in row if v != -1])
    return rows


def kendall_tau(Y_true, Y_pred) -> float:
    """Kendall tau over the label pairs present in each true ranking.

    A true-ranking label missing from the prediction makes all of its
    pairs discordant. Rows with fewer than two ranked labels carry no
    pair information and are skipped; the result is averaged over the
    remaining rows (0.0 if none).
    """
    taus = []
    for truth, pred in zip(_ranking_rows(Y_true), _ranking_rows(Y_pred)):
        k = len(truth)
        if k < 2:
            continue
        pos = {label: i for i, label in enumerate(pred)}
        concordant = 0
        total = k * (k - 1) // 2
        for a in range(k):
            for b in range(a + 1, k):
                la, lb = truth[a], truth[b]
                if la in pos and lb in pos and pos[la] < pos[lb]:
                    concordant += 1
        discordant = total - concordant
        taus.append((concordant - discordant) / total)
    return float(np.mean(taus)) if taus else 0.0


def lr_accuracy(Y_true, Y_pred) -> float:
    """Exact ranking match fraction, length included."""
    Y_true = np.atleast_2d(Y_true)
    Y_pred = np.atleast_2d(Y_pred)
    return float(np.mean(np.all(Y_true == Y_pred, axis=1)))


def lr_loss(Y_true, Y_pred) -> float:
    """Fraction of encoded (label, rank) cells that differ, fillers literal."""
    Y_true = np.atleast_2d(Y_true)
    Y_pred = np.atleast_2d(Y_pred)
    return float(np.mean(Y_true != Y_pred))


def metric(name: str, Y_true, Y_pred, scores=None) -> float:
    """Dispatch by metric name; jaccsim needs the continuous scores."""
    if name == "accuracy":
        return subset_accuracy(Y_true, Y_pred)
    if name == "hammingl":
        return hamming_loss(Y_true, Y_pred)
    if name == "f1.micro":
        return f1_micro(Y_true, Y_pred)
    if name == "f1.macro":
        return f1_macro(Y_true, Y_pred)
    if name == "f1.weigh":
        return f1_weighted(Y_true, Y_pred)
    if name == "jaccsim":
        if scores is None:
            raise ValueError("jaccsim needs continuous scores")
        return interval_jaccard(Y_true, scores)
    if name == "ktau":
        return kendall_tau(Y_true, Y_pred)
    if name == "lracc":
        return lr_accuracy(Y_true, Y_pred)
    if name == "lrloss":
        return lr_loss(Y_true, Y_pred)
    raise ValueError(f"unknown metric {name!r}")


@dataclass
class RunResult:
    dataset: str
    model: str
    config: str
    metric: str
    sample: list[float]
    alpha: float = 0.05
    extra: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(self.sample))

    @property
    def ci(self) -> tuple[float, float]:
        ss = len(self.sample)
        if ss < 2:
            return (self.mean, self.mean)
        sem = float(np.std(self.sample, ddof=1)) / np.sqrt(ss)
        if sem == 0.0:
            return (self.mean, self.mean)
        t = scipy_stats.t.ppf(1 - self.alpha / 2, ss - 1)
        return (self.mean - t * sem, self.mean + t * sem)

    def to_row(self) -> dict:
        lo, hi = self.ci
        return {
            "dataset": self.dataset,
            "model": self.model,
            "config": self.config,
            "metric": self.metric,
            "mean": self.mean,
            "ci_lo": lo,
            "ci_hi": hi,
            "alpha": self.alpha,
            "ss": len(self.sample),
            **{f"rep{i}": v for i, v in enumerate(self.sample)},
        }


# ---------------------------------------------------------------------------
# learners: a uniform fit/predict surface over the model and the baselines


class PolygridLearner:
    def __init__(self, cfg: PolygridConfig, name: str = "Polygrid"):
        self.cfg = cfg
        self.name = name

    def fit(self, X, Y, task, seed):
        self.instance = fit_polygrid(X, Y, self.cfg, task)
        return self

    def evaluate(self, X, Y, task, metrics):
        preds = [predict(self.instance, row) for row in X]
        scores = np.array([p.scores for p in preds])
        labels = np.array([p.labels for p in preds])
        n = labels.shape[1]
        out = {}
        if task == "labelranking":
            rankings = np.array([encode_ranking(p.ranking, n) for p in preds])
            for name in metrics:
                out[name] = metric(name, Y, rankings)
        else:
            for name in metrics:
                out[name] = metric(name, Y, labels, scores=scores)
        return out

    def size(self) -> int:
        return self.instance.size()


class BaselineLearner:
    def __init__(self, kind: str, budget: int | None = None,
                 budget_tracker: WeightBudget | None = None, name: str | None = None):
        if kind not in BASELINE_KINDS:
            raise ValueError(f"unknown baseline {kind!r}")
        self.kind = kind
        self.budget = budget
        self.budget_tracker = budget_tracker
        self.name = name or kind

    def fit(self, X, Y, task, seed):
        self.model = fit_baseline(
            self.kind, X, Y, task=task, budget=self.budget,
            seed=seed, budget_tracker=self.budget_tracker,
        )
        self.task = task
        return self

    def evaluate(self, X, Y, task, metrics):
        out = {}
        if task == "labelranking":
            rankings = self.model.predict_rankings(X)
            for name in metrics:
                out[name] = metric(name, Y, rankings)
        else:
            labels = self.model.predict(X)
            scores = self.model.scores(X)
            for name in metrics:
                out[name] = metric(name, Y, labels, scores=scores)
        return out

    def size(self) -> int:
        return model_size(self.model)


def default_metrics(task: str) -> tuple[str, ...]:
    return RANKING_METRICS if task == "labelranking" else MULTILABEL_METRICS


# ---------------------------------------------------------------------------
# repeated-split experiments


def _split_indices(m, ratio, rng):
    idx = rng.permutation(m)
    n_test = max(1, int(round(m * (1 - ratio))))
    return idx[n_test:], idx[:n_test]


def _split_is_degenerate(Y, task, train_idx):
    if task == "labelranking":
        from .core import downgrade

        present = downgrade(Y[train_idx])
        return bool(np.any(present.sum(axis=0) == 0))
    return bool(np.any(Y[train_idx].sum(axis=0) == 0))


def run_experiment(
    ds: Dataset,
    learner_factory,
    ss: int = 50,
    split_ratio: float = 0.8,
    seed: int = 0,
    metrics: tuple[str, ...] | None = None,
    alpha: float = 0.05,
    max_redraws: int = 20,
) -> dict[str, RunResult]:
    """Evaluate a learner over ss seeded train/test splits.

    learner_factory() must return a fresh learner per repetition. Splits in
    which some label never appears in training are redrawn with an
    incremented sub-seed (up to max_redraws, then accepted and counted).
    """
    if ds.Y is None:
        raise ValueError("dataset has no assignment to learn")
    task = ds.task
    metrics = tuple(metrics or default_metrics(task))
    samples: dict[str, list[float]] = {name: [] for name in metrics}
    redraws = 0
    learner = None
    for rep in range(ss):
        attempt = 0
        while True:
            rng = np.random.default_rng((seed, rep, attempt))
            train_idx, test_idx = _split_indices(ds.m, split_ratio, rng)
            if not _split_is_degenerate(ds.Y, task, train_idx):
                break
            attempt += 1
            redraws += 1
            if attempt > max_redraws:
                break
        learner = learner_factory()
        learner.fit(ds.X[train_idx], ds.Y[train_idx], task, seed=rep)
        values = learner.evaluate(ds.X[test_idx], ds.Y[test_idx], task, metrics)
        for name in metrics:
            samples[name].append(values[name])

    results = {}
    for name in metrics:
        results[name] = RunResult(
            dataset=ds.name,
            model=learner.name,
            config=getattr(learner, "cfg", None).short_label() if hasattr(learner, "cfg") else "",
            metric=name,
            sample=samples[name],
            alpha=alpha,
            extra={"redraws": redraws, "ss": ss, "model_size": learner.size()},
        )
    if ss == 1:
        warnings.warn("single repetition: confidence interval degenerates to a point",
                      stacklevel=2)
    return results


def grid_search(
    ds: Dataset,
    grid: list[PolygridConfig],
    ss: int = 50,
    seed: int = 0,
    metrics: tuple[str, ...] | None = None,
    split_ratio: float = 0.8,
    alpha: float = 0.05,
) -> tuple[dict[str, tuple[int, PolygridConfig, RunResult]], list[RunResult]]:
    """Evaluate every config; per metric return (index, config, result).

    Winners take the best point estimate (direction aware); ties break
    towards the smaller instance size, then the lower config index.
    """
    metrics = tuple(metrics or default_metrics(ds.task))
    table: list[RunResult] = []
    best: dict[str, tuple[int, PolygridConfig, RunResult]] = {}
    for idx, cfg in enumerate(grid):
        results = run_experiment(
            ds, lambda cfg=cfg: PolygridLearner(cfg), ss=ss,
            split_ratio=split_ratio, seed=seed, metrics=metrics, alpha=alpha,
        )
        for name in metrics:
            res = results[name]
            table.append(res)
            direction = metric_direction(name)
            if name not in best:
                best[name] = (idx, cfg, res)
                continue
            _, _, cur = best[name]
            better = direction * (res.mean - cur.mean)
            if better > 1e-12:
                best[name] = (idx, cfg, res)
            elif abs(better) <= 1e-12:
                if res.extra["model_size"] < cur.extra["model_size"]:
                    best[name] = (idx, cfg, res)
    return best, table


# ---------------------------------------------------------------------------
# dominance matrices and echelon ranking


@dataclass
class DominanceMatrix:
    models: list[str]
    metric: str
    datasets: list[str]
    A: np.ndarray

    def to_dict(self) -> dict:
        return {
            "models": self.models,
            "metric": self.metric,
            "datasets": self.datasets,
            "counts": self.A.tolist(),
        }


@dataclass
class EchelonRanking:
    echelons: list[dict]          # {"leader": str, "members": [str, ...]}
    average_ranks: dict[str, float]
    metric: str

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "echelons": self.echelons,
            "average_ranks": self.average_ranks,
        }


def _ci_dominates(a: RunResult, b: RunResult, direction: int) -> bool:
    a_lo, a_hi = a.ci
    b_lo, b_hi = b.ci
    disjoint = a_lo > b_hi or b_lo > a_hi
    if not disjoint:
        return False
    return direction * (a.mean - b.mean) > 0


def dominance_and_echelons(
    results: list[RunResult], metric_name: str
) -> tuple[DominanceMatrix, EchelonRanking]:
    """Rank models over datasets by dominance counts and echelon hiring."""
    rows = [r for r in results if r.metric == metric_name]
    models = sorted({r.model for r in rows}, key=lambda m: _model_order(m))
    datasets = sorted({r.dataset for r in rows})
    direction = metric_direction(metric_name)
    lut = {(r.model, r.dataset): r for r in rows}
    missing = [
        (mo, dsn) for mo in models for dsn in datasets if (mo, dsn) not in lut
    ]
    if missing:
        raise ValueError(f"missing results for {missing[:3]}...")

    # average ranks: per dataset, best point estimate gets rank 1
    ranks = np.zeros((len(models), len(datasets)))
    for jd, dsn in enumerate(datasets):
        means = np.array([lut[(mo, dsn)].mean for mo in models])
        order = scipy_stats.rankdata(-direction * means, method="average")
        ranks[:, jd] = order
    avg_ranks = ranks.mean(axis=1)

    A = np.zeros((len(models), len(models)), dtype=int)
    for j0, m0 in enumerate(models):
        for j1, m1 in enumerate(models):
            if j0 == j1:
                continue
            for dsn in datasets:
                if _ci_dominates(lut[(m0, dsn)], lut[(m1, dsn)], direction):
                    A[j0, j1] += 1

    free = list(range(len(models)))
    echelons = []
    while free:
        leader = min(free, key=lambda j: (avg_ranks[j], j))
        members = [
            j for j in free
            if j == leader or abs(int(A[leader, j]) - int(A[j, leader])) <= 1
        ]
        echelons.append(
            {"leader": models[leader], "members": [models[j] for j in members]}
        )
        free = [j for j in free if j not in members]

    ranking = EchelonRanking(
        echelons=echelons,
        average_ranks={models[j]: float(avg_ranks[j]) for j in range(len(models))},
        metric=metric_name,
    )
    return DominanceMatrix(models, metric_name, datasets, A), ranking


_MODEL_ORDER = ["Polygrid", "linear", "ridge", "dt", "brdt", "rf", "brrf", "mlp", "random"]


def _model_order(name: str):
    try:
        return (_MODEL_ORDER.index(name), name)
    except ValueError:
        return (len(_MODEL_ORDER), name)


def size_matched_comparison(
    datasets: list[Dataset],
    polygrid_cfg: PolygridConfig,
    baseline_kinds: tuple[str, ...] = BASELINE_KINDS,
    ss: int = 20,
    seed: int = 0,
    metrics: tuple[str, ...] | None = None,
    alpha: float = 0.05,
) -> list[RunResult]:
    """Stage-2 evaluation: baselines fit under the model's weight budget."""
    all_results: list[RunResult] = []
    for ds in datasets:
        metrics_ds = tuple(metrics or default_metrics(ds.task))
        poly_results = run_experiment(
            ds, lambda: PolygridLearner(polygrid_cfg), ss=ss, seed=seed,
            metrics=metrics_ds, alpha=alpha,
        )
        target = poly_results[metrics_ds[0]].extra["model_size"]
        all_results.extend(poly_results.values())
        for kind in baseline_kinds:
            tracker = WeightBudget(target) if kind in ("dt", "brdt", "rf", "brrf", "mlp") else None
            results = run_experiment(
                ds,
                lambda kind=kind, tracker=tracker: BaselineLearner(
                    kind, budget=target, budget_tracker=tracker
                ),
                ss=ss, seed=seed, metrics=metrics_ds, alpha=alpha,
            )
            all_results.extend(results.values())
    return all_results


def results_to_csv(results: list[RunResult], path) -> None:
    import csv

    rows = [r.to_row() for r in results]
    fields: list[str] = []
    for row in rows:
        for key in row:
            if key not in fields:
                fields.append(key)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
