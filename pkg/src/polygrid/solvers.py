"""Linear-system solvers for the per-label weight fits and the baselines.

Four variants are supported. "lstsq" is a plain minimum-norm least-squares
fit on 0/1 targets. "lstsqsym" refits on targets recoded to -1/+1 and maps
predictions back onto the 0/1 scale by folding the affine recoding into the
returned weights and intercept. "lstsquni" normalises feature rows to unit
sum before fitting (area shares instead of absolute areas); callers must
apply the same normalisation at prediction time. "ridge" adds an intercept
column and an L2 penalty on the non-intercept weights.

All variants factorise with column-pivoted QR (LAPACK gelsy), which stays
stable on the small, frequently rank-deficient systems produced by fine
disc partitions.

Note: the exact meaning of "lstsquni" and the ridge regularisation strength
are interpretation choices; both are configurable and called out in the
documentation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

SOLVER_VARIANTS = ("lstsq", "ridge", "lstsqsym", "lstsquni")


@dataclass(frozen=True)
class SolverKind:
    variant: str = "lstsq"
    ridge_lambda: float = 1.0

    def __post_init__(self):
        if self.variant not in SOLVER_VARIANTS:
            raise ValueError(f"unknown solver variant {self.variant!r}")
        if self.variant == "ridge" and self.ridge_lambda <= 0:
            raise ValueError("ridge_lambda must be positive")

    @property
    def fits_intercept(self) -> bool:
        # lstsqsym carries a fixed +0.5 intercept from the -1/+1 -> 0/1 map
        return self.variant in ("ridge", "lstsqsym")

    @property
    def normalises_rows(self) -> bool:
        return self.variant == "lstsquni"


def _min_norm_lstsq(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    sol, _, _, _ = scipy.linalg.lstsq(A, b, lapack_driver="gelsy")
    return sol


def normalise_rows(S: np.ndarray) -> np.ndarray:
    """Scale each feature row to unit sum; zero rows are left untouched."""
    sums = S.sum(axis=1, keepdims=True)
    safe = np.where(sums == 0.0, 1.0, sums)
    return S / safe


def solve_weights(
    S: np.ndarray,
    y: np.ndarray,
    kind: SolverKind,
    fit_intercept: bool | None = None,
) -> tuple[np.ndarray, float | None]:
    """Solve for the weight vector that reconstructs y from the features S.

    Returns (weights, intercept); intercept is None for variants that do
    not use one. Set fit_intercept=False to force an intercept-free fit
    (used for membership weights, which only feed an ordering).
    """
    S = np.asarray(S, dtype=float)
    y = np.asarray(y, dtype=float)
    if S.ndim != 2:
        raise ValueError("feature matrix must be 2-d")
    m, f = S.shape
    if m < 1 or f < 1:
        raise ValueError(f"need at least one row and one feature, got {S.shape}")
    if y.shape != (m,):
        raise ValueError(f"target length {y.shape} does not match {m} rows")
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite entries in solver input")

    if fit_intercept is None:
        fit_intercept = kind.fits_intercept

    if kind.variant == "lstsq":
        return _min_norm_lstsq(S, y), None

    if kind.variant == "lstsquni":
        return _min_norm_lstsq(normalise_rows(S), y), None

    if kind.variant == "lstsqsym":
        w_sym = _min_norm_lstsq(S, 2.0 * y - 1.0)
        if not fit_intercept:
            # intercept-free callers still want predictions on the 0/1 scale;
            # only the slope can be kept, so fold the 1/2 into the weights.
            return w_sym / 2.0, None
        return w_sym / 2.0, 0.5

    # ridge: augmented least squares with an unpenalised intercept column
    lam = np.sqrt(kind.ridge_lambda)
    if fit_intercept:
        A = np.hstack([S, np.ones((m, 1))])
        A_aug = np.vstack([A, np.hstack([lam * np.eye(f), np.zeros((f, 1))])])
        b_aug = np.concatenate([y, np.zeros(f)])
        sol = _min_norm_lstsq(A_aug, b_aug)
        return sol[:f], float(sol[f])
    A_aug = np.vstack([S, lam * np.eye(f)])
    b_aug = np.concatenate([y, np.zeros(f)])
    return _min_norm_lstsq(A_aug, b_aug), None


def predict_linear(
    S_row: np.ndarray, weights: np.ndarray, intercept: float | None = None
) -> float:
    """Inner product of a feature row with the weights, plus any intercept."""
    S_row = np.asarray(S_row, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if S_row.shape != weights.shape:
        raise ValueError(f"dimension mismatch: {S_row.shape} vs {weights.shape}")
    value = float(S_row @ weights)
    if intercept is not None:
        value += intercept
    return value
