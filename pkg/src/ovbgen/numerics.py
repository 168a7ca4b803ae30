"""Regression kernels built directly on numpy array arithmetic.

Least squares goes through a Householder QR of the design (never the normal
equations), logistic fits use Newton/IRLS with step halving, and the partial
R-squared helpers implement the incremental-variance-explained formula used
throughout the sensitivity machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidR2, NumericError, RankDeficient, SingleClass

__all__ = [
    "LinearFit",
    "LogisticFit",
    "add_intercept",
    "ols_fit",
    "ridge_fit",
    "logistic_fit",
    "logistic_pseudo_r2",
    "r2_of_fit",
    "partial_r2",
    "independent_columns",
]

RANK_TOL = 1e-10          # relative pivot threshold for rank failure
ORTHO_TOL = 1e-8          # |X'r|_inf <= ORTHO_TOL * ||y||
SCORE_TOL = 1e-6          # logistic convergence: max |score|
SEPARATION_NORM = 30.0    # coefficient norm treated as separation


@dataclass(frozen=True)
class LinearFit:
    """Least-squares fit: coefficients are ordered as the design columns
    (intercept first when one was prepended)."""

    coefficients: np.ndarray
    residuals: np.ndarray
    r_squared: float
    residual_variance: float

    def predict(self, design: np.ndarray) -> np.ndarray:
        return np.asarray(design, dtype=float) @ self.coefficients


@dataclass(frozen=True)
class LogisticFit:
    coefficients: np.ndarray
    converged: bool
    iterations: int

    def predict_proba(self, design: np.ndarray) -> np.ndarray:
        return _sigmoid(np.asarray(design, dtype=float) @ self.coefficients)


def add_intercept(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return np.column_stack([np.ones(x.shape[0]), x])


def _householder_solve(design: np.ndarray, response: np.ndarray) -> np.ndarray:
    """Solve min ||design @ b - response|| by Householder QR on [design | y]."""
    n, k = design.shape
    m = np.column_stack([design, response]).astype(float)
    for j in range(k):
        col = m[j:, j]
        nrm = np.sqrt(col @ col)
        if nrm == 0.0:
            continue  # zero pivot; rejected by the rank check below
        v = col.copy()
        v[0] += nrm if col[0] >= 0 else -nrm
        vn = np.sqrt(v @ v)
        if vn == 0.0:
            continue
        v /= vn
        m[j:, j:] -= np.outer(2.0 * v, v @ m[j:, j:])
    pivots = np.abs(np.diagonal(m)[:k])
    largest = pivots.max() if k else 0.0
    if largest == 0.0 or pivots.min() < RANK_TOL * largest:
        raise RankDeficient(
            f"pivot {pivots.min():.3e} below {RANK_TOL:g} x largest "
            f"(column {int(np.argmin(pivots))})"
        )
    beta = np.zeros(k)
    for i in range(k - 1, -1, -1):
        beta[i] = (m[i, k] - m[i, i + 1 : k] @ beta[i + 1 :]) / m[i, i]
    return beta


def ols_fit(design: np.ndarray, response: np.ndarray) -> LinearFit:
    """Ordinary least squares; the design should carry its intercept column.

    Raises ``RankDeficient`` when a pivot falls below 1e-10 times the largest,
    or when there are not strictly more rows than columns.  R-squared of a
    zero-variance response is 0 by convention.
    """
    design = np.asarray(design, dtype=float)
    response = np.asarray(response, dtype=float)
    n, k = design.shape
    if n <= k:
        raise RankDeficient(f"{n} rows cannot identify {k} coefficients")
    beta = _householder_solve(design, response)
    residuals = response - design @ beta

    y_norm = np.sqrt(response @ response)
    worst = np.abs(design.T @ residuals).max()
    if worst > ORTHO_TOL * max(y_norm, 1e-300):
        raise NumericError(
            f"residual orthogonality violated: {worst:.3e} > {ORTHO_TOL:g} * ||y||"
        )

    ssr = float(residuals @ residuals)
    centered = response - response.mean()
    sst = float(centered @ centered)
    r2 = 1.0 - ssr / sst if sst > 0.0 else 0.0
    r2 = min(max(r2, 0.0), 1.0)
    return LinearFit(
        coefficients=beta,
        residuals=residuals,
        r_squared=r2,
        residual_variance=ssr / (n - k),
    )


def ridge_fit(design: np.ndarray, response: np.ndarray, penalty: float = 1.0) -> LinearFit:
    """Ridge-penalized least squares with standardized, non-intercept columns.

    The first design column is treated as the (unpenalized) intercept.  The
    penalty makes the system full rank, so collinear designs never fail.
    Reported R-squared and residual variance use the same conventions as
    ``ols_fit`` (residual variance divides by n - k for comparability, even
    though ridge degrees of freedom are smaller).
    """
    design = np.asarray(design, dtype=float)
    response = np.asarray(response, dtype=float)
    n, k = design.shape
    x = design[:, 1:]
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    xs = (x - mu) / sd
    yc = response - response.mean()

    augmented = np.vstack([xs, np.sqrt(penalty) * np.eye(k - 1)])
    target = np.concatenate([yc, np.zeros(k - 1)])
    slope_s = _householder_solve(augmented, target)

    slope = slope_s / sd
    intercept = response.mean() - mu @ slope
    beta = np.concatenate([[intercept], slope])
    residuals = response - design @ beta
    ssr = float(residuals @ residuals)
    sst = float(yc @ yc)
    r2 = min(max(1.0 - ssr / sst if sst > 0 else 0.0, 0.0), 1.0)
    return LinearFit(beta, residuals, r2, ssr / max(n - k, 1))


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t, dtype=float)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    et = np.exp(t[~pos])
    out[~pos] = et / (1.0 + et)
    return out


def _log_likelihood(design, labels, beta) -> float:
    eta = design @ beta
    return float(labels @ eta - np.logaddexp(0.0, eta).sum())


def logistic_fit(design: np.ndarray, labels: np.ndarray, max_iter: int = 50) -> LogisticFit:
    """Binomial-logit fit by Newton iterations with step halving.

    Converged means max |score| <= 1e-6.  If the coefficient norm passes 30
    before that, the data are treated as separated and the current bounded
    coefficients are returned with ``converged=False``; weighting code can
    still use the fitted probabilities.
    """
    design = np.asarray(design, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if labels.min() == labels.max():
        raise SingleClass("labels contain a single class")

    beta = np.zeros(design.shape[1])
    ll = _log_likelihood(design, labels, beta)
    for iteration in range(1, max_iter + 1):
        mu = _sigmoid(design @ beta)
        score = design.T @ (labels - mu)
        if np.abs(score).max() <= SCORE_TOL:
            return LogisticFit(beta, True, iteration - 1)
        w = np.clip(mu * (1.0 - mu), 1e-10, None)
        sw = np.sqrt(w)
        z = design @ beta + (labels - mu) / w
        proposal = _householder_solve(design * sw[:, None], z * sw)
        for _ in range(30):  # step halving on likelihood decrease
            ll_new = _log_likelihood(design, labels, proposal)
            if ll_new >= ll - 1e-12:
                break
            proposal = 0.5 * (proposal + beta)
        beta, ll = proposal, _log_likelihood(design, labels, proposal)
        if np.sqrt(beta @ beta) > SEPARATION_NORM:
            return LogisticFit(beta, False, iteration)
    mu = _sigmoid(design @ beta)
    converged = bool(np.abs(design.T @ (labels - mu)).max() <= SCORE_TOL)
    return LogisticFit(beta, converged, max_iter)


def logistic_pseudo_r2(design: np.ndarray, labels: np.ndarray, fit: LogisticFit) -> float:
    """McFadden pseudo R-squared: 1 - ll(model) / ll(intercept-only)."""
    labels = np.asarray(labels, dtype=float)
    pbar = labels.mean()
    ll0 = len(labels) * (pbar * np.log(pbar) + (1 - pbar) * np.log(1 - pbar))
    ll = _log_likelihood(np.asarray(design, dtype=float), labels, fit.coefficients)
    return min(max(1.0 - ll / ll0, 0.0), 1.0)


def r2_of_fit(fit: LinearFit) -> float:
    return fit.r_squared


def partial_r2(r2_full: float, r2_reduced: float) -> float:
    """Incremental share of residual variance: (full - reduced) / (1 - reduced).

    Tiny negative increments from nested fits computed in floating point are
    clamped to zero; genuinely reversed inputs raise ``InvalidR2``.
    """
    for name, v in (("r2_full", r2_full), ("r2_reduced", r2_reduced)):
        if not 0.0 <= v <= 1.0:
            raise InvalidR2(f"{name} must be in [0, 1], got {v!r}")
    if r2_reduced == 1.0:
        raise InvalidR2("r2_reduced = 1 leaves no residual variance to explain")
    diff = r2_full - r2_reduced
    if diff < -1e-8:
        raise InvalidR2(f"r2_full {r2_full!r} below r2_reduced {r2_reduced!r}")
    diff = max(diff, 0.0)
    return min(diff / (1.0 - r2_reduced), 1.0)


def independent_columns(x: np.ndarray, tol: float = 1e-8) -> list[int]:
    """Greedy left-to-right maximal set of numerically independent columns.

    A column is dropped when its residual after projecting out the columns
    already kept falls below ``tol`` times its own norm; duplicates therefore
    keep only their first occurrence.
    """
    x = np.asarray(x, dtype=float)
    basis: list[np.ndarray] = []
    kept: list[int] = []
    for j in range(x.shape[1]):
        v = x[:, j].copy()
        nrm0 = np.sqrt(v @ v)
        if nrm0 == 0.0:
            continue
        for _ in range(2):  # second pass re-orthogonalizes
            for q in basis:
                v -= (q @ v) * q
        nrm = np.sqrt(v @ v)
        if nrm > tol * nrm0:
            basis.append(v / nrm)
            kept.append(j)
    return kept
