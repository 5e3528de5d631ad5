"""Dataset ingestion, unit-hypercube preparation, and synthetic generation.

Assessment scores must be nonnegative with positively correlated domains
(the structure produced by one-factor measurement instruments). Preparation
scales every column by its maximum so scores land in (0, 1]; exact zeros
are nudged by a small epsilon because a zero score would degenerate the
assessment polygon.

The synthetic generator draws scores from the one-factor linear model
score = loading * latent + error, with a truncated-positive latent, which
reproduces the positive-covariance structure of real instruments. Synthetic
assignments come either from a sum-score cutoff or from fuzzy c-means
memberships with a calibrated lambda-cut.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import downgrade

TASKS = ("multiclass", "multilabel", "labelranking")
DEFAULT_EPSILON = 1e-6


@dataclass
class Dataset:
    name: str
    X_raw: np.ndarray
    X: np.ndarray
    Y: np.ndarray | None
    task: str | None
    domain_names: list[str]
    label_names: list[str]
    ranges: list[tuple[float, float]]
    manifest: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n_labels(self) -> int:
        return 0 if self.Y is None else self.Y.shape[1]

    def with_assignment(self, Y, task, label_names=None) -> "Dataset":
        return Dataset(
            name=self.name,
            X_raw=self.X_raw,
            X=self.X,
            Y=np.asarray(Y, dtype=int),
            task=task,
            domain_names=self.domain_names,
            label_names=label_names or [f"label {j}" for j in range(Y.shape[1])],
            ranges=self.ranges,
            manifest=dict(self.manifest),
        )

    def presence_matrix(self) -> np.ndarray:
        """0/1 matrix regardless of task (rankings are downgraded)."""
        if self.Y is None:
            raise ValueError("dataset has no assignment")
        if self.task == "labelranking":
            return downgrade(self.Y)
        return self.Y


def prepare_scores(
    X_raw: np.ndarray, epsilon: float = DEFAULT_EPSILON
) -> tuple[np.ndarray, dict]:
    """Scale columns to (0, 1] by their maxima; epsilon-shift exact zeros."""
    X_raw = np.asarray(X_raw, dtype=float)
    if np.any(~np.isfinite(X_raw)):
        i, k = np.argwhere(~np.isfinite(X_raw))[0]
        raise ValueError(f"non-finite score at row {i}, column {k}")
    if np.any(X_raw < 0):
        i, k = np.argwhere(X_raw < 0)[0]
        raise ValueError(f"negative score at row {i}, column {k}: {X_raw[i, k]}")
    maxima = X_raw.max(axis=0)
    if np.any(maxima <= 0):
        k = int(np.argwhere(maxima <= 0)[0])
        raise ValueError(f"column {k} has no positive score to scale by")
    X = X_raw / maxima
    shifted = int(np.count_nonzero(X == 0.0))
    if shifted:
        X = np.where(X == 0.0, epsilon, X)
    manifest = {
        "scaling_maxima": [float(v) for v in maxima],
        "epsilon": epsilon,
        "zeros_shifted": shifted,
    }
    return X, manifest


def make_dataset(
    name: str,
    X_raw: np.ndarray,
    Y: np.ndarray | None = None,
    task: str | None = None,
    domain_names: list[str] | None = None,
    label_names: list[str] | None = None,
    ranges: list[tuple[float, float]] | None = None,
    epsilon: float = DEFAULT_EPSILON,
) -> Dataset:
    X_raw = np.asarray(X_raw, dtype=float)
    X, manifest = prepare_scores(X_raw, epsilon)
    d = X.shape[1]
    domain_names = domain_names or [f"domain {k}" for k in range(d)]
    ranges = ranges or [(float(X_raw[:, k].min()), float(X_raw[:, k].max())) for k in range(d)]
    n = 0 if Y is None else np.asarray(Y).shape[1]
    return Dataset(
        name=name,
        X_raw=X_raw,
        X=X,
        Y=None if Y is None else np.asarray(Y, dtype=int),
        task=task,
        domain_names=domain_names,
        label_names=label_names or [f"label {j}" for j in range(n)],
        ranges=[(float(lo), float(hi)) for lo, hi in ranges],
        manifest=manifest,
    )


def load_csv(path, task: str | None = None, name: str | None = None,
             epsilon: float = DEFAULT_EPSILON) -> Dataset:
    """Read a dataset from CSV.

    Header conventions: columns prefixed "domain:" hold scores, columns
    prefixed "label:" hold the assignment (0/1 for multilabel, the ranking
    encoding with -1 fillers for label ranking), and a single "class:"
    column holds categorical classes that are one-hot expanded. Missing
    values are rejected.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader if row]

    domain_idx = [i for i, h in enumerate(header) if h.startswith("domain:")]
    label_idx = [i for i, h in enumerate(header) if h.startswith("label:")]
    class_idx = [i for i, h in enumerate(header) if h.startswith("class:")]
    if not domain_idx:
        raise ValueError("no 'domain:' columns in header")
    if label_idx and class_idx:
        raise ValueError("use either 'label:' columns or a 'class:' column, not both")
    if len(class_idx) > 1:
        raise ValueError("at most one 'class:' column is supported")

    domain_names = [header[i].split(":", 1)[1] for i in domain_idx]

    def parse_cell(row_no, col, text):
        text = text.strip()
        if text == "":
            raise ValueError(f"missing value at row {row_no}, column {header[col]!r}")
        try:
            return float(text)
        except ValueError:
            raise ValueError(
                f"non-numeric value {text!r} at row {row_no}, column {header[col]!r}"
            ) from None

    X_raw = np.array(
        [[parse_cell(r, i, row[i]) for i in domain_idx] for r, row in enumerate(rows)]
    )

    Y = None
    label_names: list[str] | None = None
    if class_idx:
        col = class_idx[0]
        values = [row[col].strip() for row in rows]
        if any(v == "" for v in values):
            r = values.index("")
            raise ValueError(f"missing class at row {r}")
        label_names = sorted(set(values))
        lut = {v: j for j, v in enumerate(label_names)}
        Y = np.zeros((len(rows), len(label_names)), dtype=int)
        for r, v in enumerate(values):
            Y[r, lut[v]] = 1
        task = task or "multiclass"
    elif label_idx:
        label_names = [header[i].split(":", 1)[1] for i in label_idx]
        Y = np.array(
            [[int(parse_cell(r, i, row[i])) for i in label_idx] for r, row in enumerate(rows)]
        )
        task = task or ("labelranking" if (Y == -1).any() else "multilabel")
        if task == "labelranking":
            downgrade(Y)  # validates duplicates and ranges
        elif not np.isin(Y, (0, 1)).all():
            raise ValueError("multilabel assignment cells must be 0 or 1")

    ds = make_dataset(
        name=name or str(path),
        X_raw=X_raw,
        Y=Y,
        task=task,
        domain_names=domain_names,
        label_names=label_names,
        epsilon=epsilon,
    )
    return ds


def save_csv(ds: Dataset, path) -> None:
    """Write a dataset back out in the load_csv header convention."""
    header = [f"domain:{nm}" for nm in ds.domain_names]
    if ds.Y is not None:
        header += [f"label:{nm}" for nm in ds.label_names]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(ds.m):
            row = [repr(float(v)) for v in ds.X_raw[i]]
            if ds.Y is not None:
                row += [str(int(v)) for v in ds.Y[i]]
            writer.writerow(row)


@dataclass(frozen=True)
class CongenericSpec:
    """One-factor generator: score = loading * latent + error, clipped."""

    d: int
    m: int
    loadings: tuple[float, ...]
    eta_mean: float = 14.0
    eta_std: float = 3.0
    error_std: tuple[float, ...] | float = 0.8
    score_range: tuple[float, float] = (4.0, 20.0)

    def __post_init__(self):
        if len(self.loadings) != self.d:
            raise ValueError("need one loading per domain")
        if any(l <= 0 for l in self.loadings):
            raise ValueError("loadings must be positive")

    def error_stds(self) -> np.ndarray:
        if np.isscalar(self.error_std):
            return np.full(self.d, float(self.error_std))
        return np.asarray(self.error_std, dtype=float)


WHOQOL_LIKE_LOADINGS = (0.84, 1.0, 0.85, 0.77)


def synth_congeneric(spec: CongenericSpec, seed: int = 0, name: str = "synthetic") -> Dataset:
    """Draw assessments from the one-factor model (no assignment yet)."""
    rng = np.random.default_rng(seed)
    a = (0.0 - spec.eta_mean) / spec.eta_std
    eta = stats.truncnorm.rvs(
        a, np.inf, loc=spec.eta_mean, scale=spec.eta_std, size=spec.m, random_state=rng
    )
    lam = np.asarray(spec.loadings)
    errors = rng.normal(0.0, 1.0, size=(spec.m, spec.d)) * spec.error_stds()[np.newaxis, :]
    X_raw = lam[np.newaxis, :] * eta[:, np.newaxis] + errors
    lo, hi = spec.score_range
    X_raw = np.clip(X_raw, lo, hi)
    ds = make_dataset(
        name=name,
        X_raw=X_raw,
        ranges=[(lo, hi)] * spec.d,
    )
    ds.manifest["synthesis"] = {
        "loadings": [float(v) for v in lam],
        "eta_mean": spec.eta_mean,
        "eta_std": spec.eta_std,
        "error_std": [float(v) for v in spec.error_stds()],
        "score_range": [lo, hi],
        "seed": seed,
    }
    return ds


def mcdonald_omega(loadings, error_variances) -> float:
    """Reliability of a one-factor scale: (sum l)^2 / ((sum l)^2 + sum var)."""
    lam = np.asarray(loadings, dtype=float)
    var = np.asarray(error_variances, dtype=float)
    if np.any(lam < 0) or not np.any(lam > 0):
        raise ValueError("loadings must be nonnegative with at least one positive")
    if np.any(var < 0):
        raise ValueError("error variances must be nonnegative")
    s = lam.sum() ** 2
    return float(s / (s + var.sum()))


# ---------------------------------------------------------------------------
# fuzzy c-means and assignment synthesis


def fuzzy_c_means(
    X: np.ndarray,
    c: int,
    fuzzifier: float = 2.0,
    max_iter: int = 300,
    tol: float = 1e-6,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Standard fuzzy c-means; returns (memberships m x c, centroids c x d)."""
    X = np.asarray(X, dtype=float)
    m = len(X)
    rng = np.random.default_rng(seed)
    centroids = X[rng.choice(m, size=c, replace=False)].copy()
    power = 2.0 / (fuzzifier - 1.0)
    U = np.zeros((m, c))
    for _ in range(max_iter):
        dist = np.linalg.norm(X[:, None, :] - centroids[None, :, :], axis=2)
        zero = dist < 1e-12
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = (dist[:, :, None] / dist[:, None, :]) ** power
            U = 1.0 / ratio.sum(axis=2)
        if zero.any():
            rows = zero.any(axis=1)
            U[rows] = 0.0
            U[rows, np.argmax(zero[rows], axis=1)] = 1.0
        Um = U**fuzzifier
        new_centroids = (Um.T @ X) / Um.sum(axis=0)[:, None]
        shift = np.linalg.norm(new_centroids - centroids)
        centroids = new_centroids
        if shift < tol:
            break
    return U, centroids


@dataclass(frozen=True)
class AssignmentSynthSpec:
    mode: str                       # sumscore-cutoff | fuzzy-multilabel | fuzzy-ranking
    n_labels: int = 2
    cutoff: float | None = None
    target_cardinality: float | None = None
    cardinality_tolerance: float = 0.02
    top_k: int = 2
    fuzzifier: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("sumscore-cutoff", "fuzzy-multilabel", "fuzzy-ranking"):
            raise ValueError(f"unknown assignment mode {self.mode!r}")
        if self.target_cardinality is not None and not (
            1.0 <= self.target_cardinality <= self.n_labels
        ):
            raise ValueError("target cardinality must lie in [1, n_labels]")


def lambda_cut(U: np.ndarray, lam: float) -> np.ndarray:
    return (U >= lam).astype(int)


def calibrate_lambda_cut(
    U: np.ndarray, target: float, tolerance: float = 0.02, max_iter: int = 200
) -> tuple[float, float]:
    """Bisect the membership threshold until mean labels/row hits the target.

    Cardinality is non-increasing in the threshold, which makes bisection
    sound. Raises with the achievable range when the target cannot be met.
    """
    lo, hi = 0.0, 1.0 + 1e-9

    def card(lam):
        return float(lambda_cut(U, lam).sum(axis=1).mean())

    c_lo, c_hi = card(lo), card(hi)
    if not (c_hi - tolerance <= target <= c_lo + tolerance):
        raise ValueError(
            f"cardinality target {target} unreachable; achievable range "
            f"[{c_hi:.3f}, {c_lo:.3f}]"
        )
    lam = 0.5
    for _ in range(max_iter):
        lam = (lo + hi) / 2.0
        c = card(lam)
        if abs(c - target) <= tolerance:
            return lam, c
        if c > target:
            lo = lam
        else:
            hi = lam
    c = card(lam)
    if abs(c - target) <= tolerance:
        return lam, c
    raise ValueError(
        f"lambda-cut bisection failed: target {target}, closest achieved {c:.4f}"
    )


def synth_assignment(ds: Dataset, spec: AssignmentSynthSpec) -> Dataset:
    """Attach a synthetic assignment to a dataset of assessments."""
    if spec.mode == "sumscore-cutoff":
        sums = ds.X_raw.sum(axis=1)
        cutoff = float(np.median(sums)) if spec.cutoff is None else spec.cutoff
        high = (sums >= cutoff).astype(int)
        Y = np.stack([high, 1 - high], axis=1)
        out = ds.with_assignment(Y, "multiclass", ["high", "low"])
        out.manifest["assignment"] = {"mode": spec.mode, "cutoff": cutoff}
        return out

    U, _ = fuzzy_c_means(ds.X, spec.n_labels, fuzzifier=spec.fuzzifier, seed=spec.seed)
    if spec.mode == "fuzzy-multilabel":
        if spec.target_cardinality is None:
            raise ValueError("fuzzy-multilabel needs a target cardinality")
        lam, achieved = calibrate_lambda_cut(
            U, spec.target_cardinality, spec.cardinality_tolerance
        )
        Y = lambda_cut(U, lam)
        out = ds.with_assignment(Y, "multilabel")
        out.manifest["assignment"] = {
            "mode": spec.mode,
            "lambda": lam,
            "achieved_cardinality": achieved,
            "seed": spec.seed,
        }
        return out

    # fuzzy-ranking: keep the top_k labels ordered by descending membership
    order = np.argsort(-U, axis=1, kind="stable")
    Y = np.full((ds.m, spec.n_labels), -1, dtype=int)
    Y[:, : spec.top_k] = order[:, : spec.top_k]
    out = ds.with_assignment(Y, "labelranking")
    out.manifest["assignment"] = {"mode": spec.mode, "top_k": spec.top_k, "seed": spec.seed}
    return out


# ---------------------------------------------------------------------------
# descriptive statistics and validation


def dataset_stats(ds: Dataset) -> dict:
    """Standard descriptors of the assignment matrix."""
    Y = ds.presence_matrix()
    m, n = Y.shape
    counts = Y.sum(axis=0)
    cardinality = float(Y.sum(axis=1).mean())
    density = cardinality / n
    most = counts.max()
    least = counts.min()
    if most == 0:
        imbalance = 0.0
    elif least == 0:
        imbalance = 1.0
    else:
        imbalance = float(1.0 - least / most)
    rows = [tuple(r) for r in Y]
    unique = set(rows)
    single = sum(1 for r in unique if rows.count(r) == 1)
    return {
        "instances": m,
        "features": ds.d,
        "labels": n,
        "cardinality": cardinality,
        "density": density,
        "imbalance": imbalance,
        "labelsets": len(unique),
        "single_labelsets": single,
        "max_labels_per_instance": int(Y.sum(axis=1).max()),
    }


def area_scores(X: np.ndarray, arrangement) -> np.ndarray:
    """Polygon areas of the rows under a given domain arrangement."""
    X = np.asarray(X, dtype=float)
    d = X.shape[1]
    nu = np.sin(2.0 * np.pi / d) / 2.0
    Xa = X[:, list(arrangement)]
    return nu * (Xa * np.roll(Xa, -1, axis=1)).sum(axis=1)


def is_sum_area_violation(s_a, s_b, sigma_a, sigma_b) -> bool:
    """True when the area ordering contradicts the sum-score ordering."""
    return bool(np.sign(sigma_a - sigma_b) != np.sign(s_a - s_b))


def sum_area_violation_test(ds: Dataset, max_pairs: int | None = None, seed: int = 0) -> dict:
    """Check the monotone link between sum-scores and polygon areas.

    For every cyclic arrangement of the domains and every subject pair with
    distinct unit-scaled sum-scores, the pair is a violation when the area
    ordering disagrees with the sum ordering. Pairs with equal sums are
    discarded. Optionally subsample pairs for large datasets.
    """
    from .core import cyclic_arrangements

    X = ds.X
    m, d = X.shape
    if d < 3:
        raise ValueError("need at least 3 domains")
    sums = X.sum(axis=1)

    pairs = list(itertools.combinations(range(m), 2))
    sampled = False
    if max_pairs is not None and len(pairs) > max_pairs:
        rng = np.random.default_rng(seed)
        idx = rng.choice(len(pairs), size=max_pairs, replace=False)
        pairs = [pairs[i] for i in idx]
        sampled = True
    ia = np.array([p[0] for p in pairs])
    ib = np.array([p[1] for p in pairs])
    ds_mask = sums[ia] != sums[ib]
    discarded_per_arr = int(np.count_nonzero(~ds_mask))
    sign_s = np.sign(sums[ia[ds_mask]] - sums[ib[ds_mask]])

    arrangements = cyclic_arrangements(d)
    per_arrangement = []
    total_violations = 0
    total_tested = 0
    for arr in arrangements:
        sigma = area_scores(X, arr)
        sign_sigma = np.sign(sigma[ia[ds_mask]] - sigma[ib[ds_mask]])
        violations = int(np.count_nonzero(sign_sigma != sign_s))
        tested = int(ds_mask.sum())
        per_arrangement.append(
            {
                "arrangement": list(arr),
                "violations": violations,
                "tested_pairs": tested,
                "violation_rate": violations / tested if tested else 0.0,
            }
        )
        total_violations += violations
        total_tested += tested
    return {
        "dataset": ds.name,
        "arrangements": len(arrangements),
        "pairs_per_arrangement": len(pairs),
        "discarded_per_arrangement": discarded_per_arr,
        "sampled": sampled,
        "per_arrangement": per_arrangement,
        "total_violations": total_violations,
        "weighted_violation_rate": total_violations / total_tested if total_tested else 0.0,
    }


# ---------------------------------------------------------------------------
# ready-made benchmark datasets


def make_benchmark_assessments(kind: str = "whoqol-like", m: int = 100, seed: int = 0,
                               error_std: float = 0.8) -> Dataset:
    """Congeneric assessments shaped like the instruments studied here."""
    if kind == "whoqol-like":
        spec = CongenericSpec(
            d=4, m=m, loadings=WHOQOL_LIKE_LOADINGS,
            eta_mean=16.0, eta_std=3.0, error_std=error_std, score_range=(4.0, 20.0),
        )
    elif kind == "capacity-like":
        spec = CongenericSpec(
            d=5, m=m, loadings=(0.45, 0.64, 0.59, 0.95, 0.7),
            eta_mean=16.0, eta_std=3.0, error_std=error_std, score_range=(0.0, 20.0),
        )
    elif kind == "deficit-like":
        spec = CongenericSpec(
            d=5, m=m, loadings=(0.7, 0.9, 0.8, 0.6, 0.75),
            eta_mean=6.0, eta_std=2.0, error_std=error_std, score_range=(0.0, 10.0),
        )
    else:
        raise ValueError(f"unknown benchmark kind {kind!r}")
    return synth_congeneric(spec, seed=seed, name=f"{kind}-{m}-{seed}")


def make_separable_dataset(m: int = 100, d: int = 4, seed: int = 0,
                           error_std: float = 0.6) -> Dataset:
    """Congeneric assessments with a balanced sum-score-cutoff assignment."""
    spec = CongenericSpec(
        d=d, m=m, loadings=tuple(np.linspace(0.8, 1.0, d)),
        eta_mean=14.0, eta_std=3.0, error_std=error_std, score_range=(1.0, 20.0),
    )
    ds = synth_congeneric(spec, seed=seed, name=f"separable-{m}-{seed}")
    return synth_assignment(ds, AssignmentSynthSpec(mode="sumscore-cutoff"))


def make_nested_multilabel_dataset(seed: int = 0, m: int = 100,
                                   margin: float = 2.0) -> Dataset:
    """Separable two-label data from nested sum-score cutoffs.

    Label 0 marks sums above a low cutoff, label 1 sums above a high one,
    so both labels grow with the latent score and every regression-style
    learner can represent them. Borderline subjects are screened out.
    """
    spec = CongenericSpec(
        d=4, m=6 * m, loadings=WHOQOL_LIKE_LOADINGS,
        eta_mean=15.0, eta_std=3.0, error_std=0.5, score_range=(4.0, 20.0),
    )
    big = synth_congeneric(spec, seed=seed)
    sums = big.X_raw.sum(axis=1)
    c1 = float(np.percentile(sums, 40))
    c2 = float(np.percentile(sums, 70))
    keep = (np.abs(sums - c1) >= margin) & (np.abs(sums - c2) >= margin)
    idx = np.where(keep)[0][:m]
    if len(idx) < m:
        raise ValueError("margin too wide for the requested cohort size")
    X_raw = big.X_raw[idx]
    s = sums[idx]
    Y = np.stack([(s >= c1).astype(int), (s >= c2).astype(int)], axis=1)
    ds = make_dataset(f"nested-{seed}", X_raw, Y=Y, task="multilabel",
                      label_names=["above-low", "above-high"],
                      ranges=[(4.0, 20.0)] * 4)
    ds.manifest["synthesis"] = dict(
        big.manifest["synthesis"], cutoffs=[c1, c2], screened_margin=margin
    )
    return ds


def make_goodpoor_dataset(seed: int = 0, n_below: int = 59, n_above: int = 41,
                          margin: float = 2.0) -> Dataset:
    """Two-class cohort split by a sum-score cutoff, borderline cases screened.

    Draws a larger congeneric sample, places the cutoff at the 59th sum
    percentile, and keeps only subjects at least `margin` away from it,
    mirroring cohorts recruited around an established clinical cutoff.
    """
    m = n_below + n_above
    spec = CongenericSpec(
        d=4, m=4 * m, loadings=WHOQOL_LIKE_LOADINGS,
        eta_mean=15.0, eta_std=3.0, error_std=0.5, score_range=(4.0, 20.0),
    )
    big = synth_congeneric(spec, seed=seed)
    sums = big.X_raw.sum(axis=1)
    cutoff = float(np.percentile(sums, 100.0 * n_below / m))
    below = np.where(sums <= cutoff - margin)[0][:n_below]
    above = np.where(sums >= cutoff + margin)[0][:n_above]
    if len(below) < n_below or len(above) < n_above:
        raise ValueError("margin too wide for the requested cohort size")
    X_raw = np.vstack([big.X_raw[below], big.X_raw[above]])
    ds = make_dataset(f"goodpoor-{seed}", X_raw, ranges=[(4.0, 20.0)] * 4)
    out = synth_assignment(ds, AssignmentSynthSpec(mode="sumscore-cutoff", cutoff=cutoff))
    out.label_names = ["good", "poor"]
    out.manifest["synthesis"] = dict(big.manifest["synthesis"], screened_margin=margin)
    return out
