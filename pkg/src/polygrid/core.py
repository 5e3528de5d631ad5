"""The Polygrid model: configuration, fitting, and prediction.

Fitting runs the full pipeline: order the domains, map assessments to disc
polygons, compute class prototypes, partition the disc, extract coverage
features, solve per-label weights, and search classification thresholds.
Prediction reruns the geometric steps for one row and applies the learned
weights; every number a diagram displays is taken verbatim from here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (
    DiscPartition,
    cell_coverage,
    partition_ud,
    polygon_area,
    roots_of_unity,
    uh_to_ud,
)
from .solvers import SolverKind, normalise_rows, solve_weights
from .trees import RegressionTree

VERTEX_ORDERS = ("original", "rho", "averages", "measures")
CUTOFF_SCHEMES = ("single", "multiple")
TASKS = ("multiclass", "multilabel", "labelranking")

# vertex orders used by the default hyperparameter grid; "original" stays
# available but is excluded so the full grid keeps 3,456 combinations
GRID_VERTEX_ORDERS = ("averages", "measures", "rho")


@dataclass(frozen=True)
class PolygridConfig:
    """Hyperparameters of one Polygrid fit."""

    ns_per_domain: int = 1
    n_a: int = 1
    vorder: str = "rho"
    sector_type: str = "miss"
    annulus_type: str = "s-invariant"
    solver: SolverKind = SolverKind("lstsq")
    cutoff_scheme: str = "single"
    threshold_granularity: int = 101
    arc_resolution: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.ns_per_domain < 1:
            raise ValueError("ns_per_domain must be >= 1")
        if self.n_a < 1:
            raise ValueError("n_a must be >= 1")
        if self.vorder not in VERTEX_ORDERS:
            raise ValueError(f"unknown vorder {self.vorder!r}")
        if self.cutoff_scheme not in CUTOFF_SCHEMES:
            raise ValueError(f"unknown cutoff scheme {self.cutoff_scheme!r}")
        if self.threshold_granularity < 1:
            raise ValueError("threshold_granularity must be >= 1")

    def to_dict(self) -> dict:
        return {
            "ns_per_domain": self.ns_per_domain,
            "n_a": self.n_a,
            "vorder": self.vorder,
            "sector_type": self.sector_type,
            "annulus_type": self.annulus_type,
            "solver": {"variant": self.solver.variant, "ridge_lambda": self.solver.ridge_lambda},
            "cutoff_scheme": self.cutoff_scheme,
            "threshold_granularity": self.threshold_granularity,
            "arc_resolution": self.arc_resolution,
            "seed": self.seed,
        }

    @staticmethod
    def from_dict(doc: dict) -> "PolygridConfig":
        solver = doc.get("solver", {"variant": "lstsq", "ridge_lambda": 1.0})
        if isinstance(solver, str):
            solver = {"variant": solver, "ridge_lambda": 1.0}
        return PolygridConfig(
            ns_per_domain=int(doc.get("ns_per_domain", 1)),
            n_a=int(doc.get("n_a", 1)),
            vorder=doc.get("vorder", "rho"),
            sector_type=doc.get("sector_type", "miss"),
            annulus_type=doc.get("annulus_type", "s-invariant"),
            solver=SolverKind(solver["variant"], float(solver.get("ridge_lambda", 1.0))),
            cutoff_scheme=doc.get("cutoff_scheme", "single"),
            threshold_granularity=int(doc.get("threshold_granularity", 101)),
            arc_resolution=int(doc.get("arc_resolution", 64)),
            seed=int(doc.get("seed", 0)),
        )

    def short_label(self) -> str:
        parts = [
            f"ns/d={self.ns_per_domain}",
            f"na={self.n_a}",
            self.vorder,
            self.annulus_type,
            self.sector_type,
            self.solver.variant,
            self.cutoff_scheme,
        ]
        return ", ".join(parts)


def default_grid(
    ns_per_domain=(1, 2, 3),
    n_a=tuple(range(1, 9)),
    vorders=GRID_VERTEX_ORDERS,
    annulus_types=("s-invariant", "r-invariant", "tree"),
    sector_types=("miss", "cover"),
    solvers=("lstsq", "ridge", "lstsqsym", "lstsquni"),
    cutoff_schemes=("single", "multiple"),
) -> list[PolygridConfig]:
    """Enumerate the search grid; the full default has 3,456 configs."""
    grid = []
    for nspd, na, vo, ann, sec, sol, cut in itertools.product(
        ns_per_domain, n_a, vorders, annulus_types, sector_types, solvers, cutoff_schemes
    ):
        grid.append(
            PolygridConfig(
                ns_per_domain=nspd,
                n_a=na,
                vorder=vo,
                sector_type=sec,
                annulus_type=ann,
                solver=SolverKind(sol),
                cutoff_scheme=cut,
            )
        )
    return grid


def order_vertices(X: np.ndarray, vorder: str) -> np.ndarray:
    """Permutation of the domain columns used for polygon vertices.

    "original" keeps the dataset order, "averages" sorts by descending
    column mean, "measures" by descending column variance, and "rho"
    searches cyclic arrangements for the highest total adjacent-pair
    Pearson correlation (exhaustive for d <= 6, greedy beyond). Ties break
    towards the lower original index.
    """
    X = np.asarray(X, dtype=float)
    d = X.shape[1]
    if vorder == "original":
        return np.arange(d)
    if vorder == "averages":
        key = X.mean(axis=0)
        return _stable_desc_order(key)
    if vorder == "measures":
        key = X.var(axis=0)
        return _stable_desc_order(key)
    if vorder == "rho":
        return _rho_order(X)
    raise ValueError(f"unknown vorder {vorder!r}")


def _stable_desc_order(key: np.ndarray) -> np.ndarray:
    return np.lexsort((np.arange(len(key)), -key))


def _corr_matrix(X: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        C = np.corrcoef(X, rowvar=False)
    return np.nan_to_num(C, nan=0.0)


def cyclic_arrangements(d: int) -> list[tuple[int, ...]]:
    """All (d-1)!/2 cyclic arrangements up to rotation and reflection.

    Each arrangement is canonicalised to start at 0 with its second element
    smaller than its last, lexicographically smallest first.
    """
    arrangements = []
    for perm in itertools.permutations(range(1, d)):
        if perm[0] < perm[-1]:
            arrangements.append((0,) + perm)
    arrangements.sort()
    return arrangements


def _rho_order(X: np.ndarray) -> np.ndarray:
    C = _corr_matrix(X)
    d = X.shape[1]
    if d <= 6:
        best, best_score = None, -np.inf
        for arr in cyclic_arrangements(d):
            score = sum(C[arr[k], arr[(k + 1) % d]] for k in range(d))
            if score > best_score + 1e-12:
                best, best_score = arr, score
        return np.array(best)
    # greedy: start from the strongest pair and extend whichever end has
    # the best remaining correlation
    pairs = [(C[i, j], -i, -j) for i in range(d) for j in range(i + 1, d)]
    _, ni, nj = max(pairs)
    chain = [-ni, -nj]
    free = set(range(d)) - set(chain)
    while free:
        candidates = []
        for c in sorted(free):
            candidates.append((C[chain[0], c], 0, -c))
            candidates.append((C[chain[-1], c], 1, -c))
        _, end, nc = max(candidates)
        c = -nc
        if end == 0:
            chain.insert(0, c)
        else:
            chain.append(c)
        free.remove(c)
    # canonicalise: rotate so 0 leads, reflect so the second < last
    idx = chain.index(0)
    chain = chain[idx:] + chain[:idx]
    if chain[1] > chain[-1]:
        chain = [chain[0]] + chain[1:][::-1]
    return np.array(chain)


def downgrade(Y_rank: np.ndarray) -> np.ndarray:
    """Convert a ranking assignment to a 0/1 presence assignment.

    Each row lists ranked label indices followed by -1 fillers; the output
    marks exactly the labels that appear in the row.
    """
    Y_rank = np.atleast_2d(np.asarray(Y_rank, dtype=int))
    m, n = Y_rank.shape
    out = np.zeros((m, n), dtype=int)
    for i in range(m):
        seen = set()
        for v in Y_rank[i]:
            if v == -1:
                continue
            if v < 0 or v >= n:
                raise ValueError(f"label index {v} out of range in row {i}")
            if v in seen:
                raise ValueError(f"duplicate label {v} in ranking row {i}")
            seen.add(v)
            out[i, v] = 1
    return out


def logranks(Y_rank: np.ndarray) -> np.ndarray:
    """Row-stochastic membership degrees derived from ranking positions.

    A label at position p in a ranking over n labels receives weight
    2^(n-1-p) / (2^n - 1); absent labels receive 0. Rows are then
    normalised to sum to one (all-filler rows stay zero).
    """
    Y_rank = np.atleast_2d(np.asarray(Y_rank, dtype=int))
    m, n = Y_rank.shape
    downgrade(Y_rank)  # runs the shared validation
    U = np.zeros((m, n))
    denom = 2.0**n - 1.0
    for i in range(m):
        for pos, v in enumerate(Y_rank[i]):
            if v == -1:
                continue
            U[i, v] = 2.0 ** (n - 1 - pos) / denom
        total = U[i].sum()
        if total > 0:
            U[i] /= total
    return U


@dataclass(frozen=True)
class Prediction:
    """Outcome of scoring one assessment against a fitted instance."""

    scores: np.ndarray                      # yhat, one entry per label
    labels: np.ndarray                      # 0/1 decisions
    per_cell_contributions: np.ndarray      # (n, n_as) weighted-area terms
    coverages: np.ndarray                   # feature vector fed to the weights
    polygon: np.ndarray                     # complex vertices, reordered domains
    area: float
    ranking: np.ndarray | None = None       # ordered label indices (ranking task)
    membership_scores: np.ndarray | None = None


@dataclass(frozen=True)
class PolygridInstance:
    """A fitted model: partition, weights, thresholds, and prototypes."""

    config: PolygridConfig
    task: str
    zeta: np.ndarray
    partition: DiscPartition
    vertex_order: np.ndarray
    W: np.ndarray                           # (n, n_as)
    intercepts: np.ndarray | None           # (n,) or None
    thresholds: np.ndarray                  # (n,) (+inf for empty labels)
    prototypes: np.ndarray                  # (n, d) mean scores, dataset order
    label_names: list[str]
    domain_names: list[str]
    membership_weights: np.ndarray | None = None
    empty_labels: tuple[int, ...] = ()
    dataset_manifest: dict | None = None

    @property
    def n_labels(self) -> int:
        return self.W.shape[0]

    @property
    def d(self) -> int:
        return len(self.vertex_order)

    def size(self) -> int:
        """Weight count: dense weights, plus intercepts, plus membership."""
        n, n_as = self.W.shape
        total = n * n_as
        if self.intercepts is not None:
            total += n
        if self.membership_weights is not None:
            total += self.membership_weights.size
        return total

    def prototype_areas(self) -> np.ndarray:
        areas = np.zeros(self.n_labels)
        for j in range(self.n_labels):
            proto = self.prototypes[j][self.vertex_order]
            if np.all(proto > 0):
                Z, _ = uh_to_ud(proto[np.newaxis, :])
                areas[j] = polygon_area(Z[0])
        return areas

    def features_for(self, X: np.ndarray) -> np.ndarray:
        """Effective feature rows for prepared score rows (vorder applied)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Z, _ = uh_to_ud(X[:, self.vertex_order])
        S = cell_coverage(Z, self.partition)
        if self.config.solver.normalises_rows:
            S = normalise_rows(S)
        return S

    def predict(self, x: np.ndarray) -> Prediction:
        return predict(self, x)

    def to_dict(self) -> dict:
        doc = {
            "format": "polygrid-instance",
            "version": 1,
            "config": self.config.to_dict(),
            "task": self.task,
            "vertex_order": [int(v) for v in self.vertex_order],
            "radii": [float(r) for r in self.partition.radii],
            "weights": self.W.tolist(),
            "intercepts": None if self.intercepts is None else self.intercepts.tolist(),
            "thresholds": [None if not np.isfinite(t) else float(t) for t in self.thresholds],
            "prototypes": self.prototypes.tolist(),
            "label_names": list(self.label_names),
            "domain_names": list(self.domain_names),
            "membership_weights": (
                None if self.membership_weights is None else self.membership_weights.tolist()
            ),
            "empty_labels": list(self.empty_labels),
            "dataset_manifest": self.dataset_manifest,
        }
        return doc

    @staticmethod
    def from_dict(doc: dict) -> "PolygridInstance":
        if doc.get("format") != "polygrid-instance":
            raise ValueError("not a model instance document")
        if int(doc.get("version", -1)) != 1:
            raise ValueError(f"unsupported instance version {doc.get('version')!r}")
        config = PolygridConfig.from_dict(doc["config"])
        vertex_order = np.array(doc["vertex_order"], dtype=int)
        d = len(vertex_order)
        radii = np.array(doc["radii"], dtype=float)
        tree_radii = radii[:-1] if config.annulus_type == "tree" else None
        partition = partition_ud(
            n_a=config.n_a,
            n_s=config.ns_per_domain * d,
            annulus_type=config.annulus_type,
            sector_type=config.sector_type,
            tree_radii=tree_radii,
            arc_resolution=config.arc_resolution,
            d=d,
        )
        thresholds = np.array(
            [np.inf if t is None else float(t) for t in doc["thresholds"]], dtype=float
        )
        return PolygridInstance(
            config=config,
            task=doc["task"],
            zeta=roots_of_unity(d),
            partition=partition,
            vertex_order=vertex_order,
            W=np.array(doc["weights"], dtype=float),
            intercepts=(
                None if doc["intercepts"] is None else np.array(doc["intercepts"], dtype=float)
            ),
            thresholds=thresholds,
            prototypes=np.array(doc["prototypes"], dtype=float),
            label_names=list(doc["label_names"]),
            domain_names=list(doc["domain_names"]),
            membership_weights=(
                None
                if doc.get("membership_weights") is None
                else np.array(doc["membership_weights"], dtype=float)
            ),
            empty_labels=tuple(doc.get("empty_labels", ())),
            dataset_manifest=doc.get("dataset_manifest"),
        )


def compute_class_prototypes(X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Mean score row per label; labels with no positive rows get zeros."""
    m, d = X.shape
    n = Y.shape[1]
    H = np.zeros((n, d))
    empty = []
    for j in range(n):
        mask = Y[:, j] == 1
        if mask.any():
            H[j] = X[mask].mean(axis=0)
        else:
            empty.append(j)
    return H, empty


def _tree_annulus_radii(X_ordered: np.ndarray, Y: np.ndarray, n_a: int) -> np.ndarray:
    """Annulus boundaries from a shallow regression tree on the first label.

    Thresholds are pooled across features (all share the unit scale),
    rounded to two decimals, kept at least 0.02 apart, and the first
    n_a - 1 in growth order are used. Gaps left by degenerate trees are
    filled from the equal-area defaults.
    """
    if n_a == 1:
        return np.array([], dtype=float)
    depth = int(np.ceil(np.log2(n_a)))
    tree = RegressionTree(max_depth=depth).fit(X_ordered, Y[:, 0].astype(float))
    chosen: list[float] = []
    for thr in tree.thresholds_in_growth_order():
        r = round(thr, 2)
        if r <= 0.0 or r >= 1.0:
            continue
        if all(abs(r - c) >= 0.02 for c in chosen):
            chosen.append(r)
        if len(chosen) == n_a - 1:
            break
    if len(chosen) < n_a - 1:
        for fallback in np.sqrt(np.arange(1, n_a) / n_a):
            r = round(float(fallback), 2)
            if 0.0 < r < 1.0 and all(abs(r - c) >= 0.02 for c in chosen):
                chosen.append(r)
            if len(chosen) == n_a - 1:
                break
    return np.array(sorted(chosen), dtype=float)


def _threshold_candidates(Y_hat: np.ndarray, granularity: int) -> np.ndarray:
    lo = float(Y_hat.min())
    hi = float(Y_hat.max())
    if lo == hi:
        return np.array([lo])
    return np.linspace(lo, hi, granularity)


def _f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def select_thresholds(
    Y: np.ndarray, Y_hat: np.ndarray, scheme: str, granularity: int
) -> np.ndarray:
    """Pick thresholds over a shared candidate ladder spanning the scores.

    Under "multiple", each label maximises its own training F1; under
    "single", one shared threshold maximises subset accuracy. The lowest
    best candidate wins ties. Labels with no positive example get +inf.
    """
    n = Y.shape[1]
    candidates = _threshold_candidates(Y_hat, granularity)
    thresholds = np.full(n, np.inf)
    has_pos = Y.sum(axis=0) > 0
    if scheme == "multiple":
        for j in range(n):
            if not has_pos[j]:
                continue
            best_t, best_f1 = candidates[0], -1.0
            for t in candidates:
                f1 = _f1(Y[:, j], (Y_hat[:, j] >= t).astype(int))
                if f1 > best_f1 + 1e-12:
                    best_t, best_f1 = t, f1
            thresholds[j] = best_t
    else:
        best_t, best_acc = candidates[0], -1.0
        for t in candidates:
            pred = (Y_hat >= t).astype(int)
            pred[:, ~has_pos] = 0
            acc = float(np.mean(np.all(pred == Y, axis=1)))
            if acc > best_acc + 1e-12:
                best_t, best_acc = t, acc
        thresholds[has_pos] = best_t
    return thresholds


def _fit_weight_matrix(S, Y, solver):
    n = Y.shape[1]
    f = S.shape[1]
    W = np.zeros((n, f))
    intercepts = np.zeros(n) if solver.fits_intercept else None
    for j in range(n):
        w, b = solve_weights(S, Y[:, j].astype(float), solver)
        W[j] = w
        if intercepts is not None:
            intercepts[j] = b
    return W, intercepts


def fit_multilabel(
    X: np.ndarray,
    Y: np.ndarray,
    cfg: PolygridConfig,
    task: str = "multilabel",
    label_names: list[str] | None = None,
    domain_names: list[str] | None = None,
    dataset_manifest: dict | None = None,
    Y_rank: np.ndarray | None = None,
) -> PolygridInstance:
    """Fit a Polygrid instance on prepared scores and a 0/1 assignment."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=int)
    if X.shape[0] != Y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
    m, d = X.shape
    n = Y.shape[1]
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    label_names = label_names or [f"label {j}" for j in range(n)]
    domain_names = domain_names or [f"domain {k}" for k in range(d)]

    order = order_vertices(X, cfg.vorder)
    X_ord = X[:, order]
    Z, zeta = uh_to_ud(X_ord)

    H, empty = compute_class_prototypes(X, Y)

    tree_radii = None
    if cfg.annulus_type == "tree":
        tree_radii = _tree_annulus_radii(X_ord, Y, cfg.n_a)
    partition = partition_ud(
        n_a=cfg.n_a,
        n_s=cfg.ns_per_domain * d,
        annulus_type=cfg.annulus_type,
        sector_type=cfg.sector_type,
        tree_radii=tree_radii,
        arc_resolution=cfg.arc_resolution,
        d=d,
    )

    S = cell_coverage(Z, partition)
    S_eff = normalise_rows(S) if cfg.solver.normalises_rows else S
    W, intercepts = _fit_weight_matrix(S, Y, cfg.solver)

    Y_hat = S_eff @ W.T
    if intercepts is not None:
        Y_hat = Y_hat + intercepts[np.newaxis, :]
    thresholds = select_thresholds(Y, Y_hat, cfg.cutoff_scheme, cfg.threshold_granularity)

    membership = None
    if Y_rank is not None:
        U = logranks(Y_rank)
        membership = np.zeros_like(W)
        for j in range(n):
            w, _ = solve_weights(S, U[:, j], cfg.solver, fit_intercept=False)
            membership[j] = w

    return PolygridInstance(
        config=cfg,
        task=task,
        zeta=zeta,
        partition=partition,
        vertex_order=order,
        W=W,
        intercepts=intercepts,
        thresholds=thresholds,
        prototypes=H,
        label_names=label_names,
        domain_names=domain_names,
        membership_weights=membership,
        empty_labels=tuple(empty),
        dataset_manifest=dataset_manifest,
    )


def fit_labelranking(
    X: np.ndarray,
    Y_rank: np.ndarray,
    cfg: PolygridConfig,
    label_names: list[str] | None = None,
    domain_names: list[str] | None = None,
    dataset_manifest: dict | None = None,
) -> PolygridInstance:
    """Fit on a ranking assignment: presence weights on the downgraded
    assignment plus membership weights on the rank-derived degrees."""
    Y_rank = np.asarray(Y_rank, dtype=int)
    Yrel = downgrade(Y_rank)
    return fit_multilabel(
        X,
        Yrel,
        cfg,
        task="labelranking",
        label_names=label_names,
        domain_names=domain_names,
        dataset_manifest=dataset_manifest,
        Y_rank=Y_rank,
    )


def fit(
    X: np.ndarray,
    Y: np.ndarray,
    cfg: PolygridConfig,
    task: str,
    **kwargs,
) -> PolygridInstance:
    """Task dispatcher; multiclass assignments must already be one-hot."""
    if task == "labelranking":
        return fit_labelranking(X, Y, cfg, **kwargs)
    return fit_multilabel(X, Y, cfg, task=task, **kwargs)


def predict(instance: PolygridInstance, x: np.ndarray) -> Prediction:
    """Score one prepared assessment row against a fitted instance."""
    x = np.asarray(x, dtype=float).ravel()
    if len(x) != instance.d:
        raise ValueError(f"expected {instance.d} scores, got {len(x)}")
    x_ord = x[instance.vertex_order]
    Z, _ = uh_to_ud(x_ord[np.newaxis, :])
    poly = Z[0]
    area = float(polygon_area(poly))
    s = cell_coverage(poly, instance.partition)
    s_eff = s / s.sum() if (instance.config.solver.normalises_rows and s.sum() > 0) else s

    contributions = instance.W * s_eff[np.newaxis, :]
    scores = contributions.sum(axis=1)
    if instance.intercepts is not None:
        scores = scores + instance.intercepts
    labels = (scores >= instance.thresholds).astype(int)

    if instance.task == "multiclass" and labels.sum() == 0:
        labels = np.zeros_like(labels)
        labels[int(np.argmax(scores))] = 1

    ranking = None
    membership_scores = None
    if instance.task == "labelranking" and instance.membership_weights is not None:
        membership_scores = instance.membership_weights @ s_eff
        present = np.nonzero(labels == 1)[0]
        # descending membership, ties towards the lower label index
        order = sorted(present, key=lambda j: (-membership_scores[j], j))
        ranking = np.array(order, dtype=int)

    return Prediction(
        scores=scores,
        labels=labels,
        per_cell_contributions=contributions,
        coverages=s_eff,
        polygon=poly,
        area=area,
        ranking=ranking,
        membership_scores=membership_scores,
    )


def predict_batch(instance: PolygridInstance, X: np.ndarray) -> list[Prediction]:
    return [predict(instance, row) for row in np.atleast_2d(X)]


def encode_ranking(ranking: np.ndarray | None, n: int) -> np.ndarray:
    """Pad an ordered label list with -1 fillers to the standard encoding."""
    out = np.full(n, -1, dtype=int)
    if ranking is not None:
        out[: len(ranking)] = ranking
    return out
