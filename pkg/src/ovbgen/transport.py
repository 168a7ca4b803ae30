"""Baseline transported-effect estimators and their bootstrap intervals.

The g-formula route fits one outcome regression per trial arm and averages
the implied effect predictions over the target covariate rows; the IPW route
reweights trial outcomes by inverse odds of trial membership fitted on the
pooled covariates.  Both target the covariate-adjusted transported effect,
which equals the target-population effect only when no unobserved moderator
is imbalanced; quantifying that gap is the sensitivity module's job.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DegenerateWeights,
    EmptyArm,
    InvalidInput,
    OvbError,
    ResampleFailure,
    SchemaMismatch,
)
from .model import (
    EstimatorMethod,
    PooledDesign,
    TargetDataset,
    TransportEstimate,
    TrialDataset,
    pool,
)
from .numerics import LinearFit, add_intercept, logistic_fit, ols_fit
from .streams import substream

__all__ = [
    "OutcomeModels",
    "fit_outcome_models",
    "gformula_tate",
    "ipw_tate",
    "sate",
    "gformula_estimator",
    "ipw_estimator",
    "bootstrap_ci",
]

logger = logging.getLogger(__name__)

DEFAULT_WEIGHT_CLIP = 50.0


@dataclass(frozen=True)
class OutcomeModels:
    """Per-arm outcome regressions fitted on the trial.

    Each arm's fit is trained only on that arm's rows; the residual variances
    feed the conservative upper bound for residual effect heterogeneity.
    """

    mu0: LinearFit
    mu1: LinearFit
    residual_var0: float
    residual_var1: float

    @property
    def p(self) -> int:
        return len(self.mu1.coefficients) - 1

    def predict_cate(self, covariates: np.ndarray) -> np.ndarray:
        """Predicted treatment effect mu1(x) - mu0(x) for each row."""
        covariates = np.asarray(covariates, dtype=float)
        if covariates.shape[1] != self.p:
            raise SchemaMismatch(
                f"models were fitted on {self.p} covariates, got {covariates.shape[1]}"
            )
        design = add_intercept(covariates)
        return design @ (self.mu1.coefficients - self.mu0.coefficients)


def fit_outcome_models(trial: TrialDataset) -> OutcomeModels:
    """Fit the two arm-specific outcome regressions on (1, X)."""
    fits = {}
    for a in (0, 1):
        x, y = trial.arm(a)
        if x.shape[0] == 0:
            raise EmptyArm(f"treatment arm {a} has no rows")
        fits[a] = ols_fit(add_intercept(x), y)
    return OutcomeModels(
        mu0=fits[0],
        mu1=fits[1],
        residual_var0=fits[0].residual_variance,
        residual_var1=fits[1].residual_variance,
    )


def gformula_tate(models: OutcomeModels, target: TargetDataset) -> float:
    """Average the trial-fitted effect predictions over the target rows."""
    return float(models.predict_cate(target.covariates).mean())


def _hajek_difference(y: np.ndarray, a: np.ndarray, w: np.ndarray) -> float:
    """Weighted treated mean minus weighted control mean, each self-normalized."""
    wt = w * a
    wc = w * (1.0 - a)
    sum_t, sum_c = wt.sum(), wc.sum()
    if sum_t == 0.0 or sum_c == 0.0:
        raise DegenerateWeights("a treatment arm carries zero weight")
    return float(wt @ y / sum_t - wc @ y / sum_c)


def ipw_tate(
    trial: TrialDataset,
    pooled: PooledDesign,
    weight_clip: float = DEFAULT_WEIGHT_CLIP,
) -> float:
    """Inverse-odds-of-trial-membership estimator on the trial rows.

    The selection model is a logistic fit of the pooled membership indicator
    on the covariates; trial rows get weight (1 - e(x)) / e(x), clipped at
    ``weight_clip`` before normalization.  A non-converged (separated)
    selection fit still yields usable bounded probabilities.
    """
    if pooled.n_trial != trial.n or not np.array_equal(
        pooled.covariates[: trial.n], trial.covariates
    ):
        raise SchemaMismatch("pooled design does not start with the trial rows")
    fit = logistic_fit(add_intercept(pooled.covariates), pooled.selection)
    e_trial = fit.predict_proba(add_intercept(trial.covariates))
    weights = (1.0 - e_trial) / e_trial
    n_clipped = int((weights > weight_clip).sum())
    if n_clipped:
        logger.debug("clipped %d of %d inverse-odds weights at %g",
                     n_clipped, trial.n, weight_clip)
    weights = np.minimum(weights, weight_clip)
    return _hajek_difference(trial.outcome, trial.treatment, weights)


def sate(trial: TrialDataset) -> float:
    """Unweighted difference of arm means inside the trial."""
    _, y1 = trial.arm(1)
    _, y0 = trial.arm(0)
    return float(y1.mean() - y0.mean())


def gformula_estimator(trial: TrialDataset, target: TargetDataset) -> float:
    return gformula_tate(fit_outcome_models(trial), target)


def ipw_estimator(
    trial: TrialDataset,
    target: TargetDataset,
    weight_clip: float = DEFAULT_WEIGHT_CLIP,
) -> float:
    return ipw_tate(trial, pool(trial, target), weight_clip)


_BUILTIN_ESTIMATORS: dict[EstimatorMethod, Callable] = {
    EstimatorMethod.GFORMULA: gformula_estimator,
    EstimatorMethod.IPW: ipw_estimator,
}


def bootstrap_ci(
    estimator: Callable[[TrialDataset, TargetDataset], float] | str | EstimatorMethod,
    trial: TrialDataset,
    target: TargetDataset,
    n_boot: int = 1000,
    alpha: float = 0.05,
    seed: int = 0,
    method: EstimatorMethod | None = None,
) -> TransportEstimate:
    """Percentile bootstrap interval for a transported-effect estimator.

    Trial and target rows are resampled independently with replacement,
    preserving the two sample sizes, and the whole estimation pipeline is
    re-run inside each resample.  Each resample draws from its own random
    substream keyed by (seed, resample index), so the interval is identical
    for a given seed no matter how resamples are scheduled.  Resamples whose
    estimator raises a package error are counted and tolerated up to 1% of
    ``n_boot``; beyond that the bootstrap fails.
    """
    if n_boot < 100:
        raise InvalidInput(f"n_boot must be >= 100, got {n_boot}")
    if not 0.0 < alpha < 1.0:
        raise InvalidInput(f"alpha must be in (0, 1), got {alpha!r}")
    if isinstance(estimator, (str, EstimatorMethod)):
        method = EstimatorMethod(estimator)
        estimator = _BUILTIN_ESTIMATORS[method]
    elif method is None:
        method = EstimatorMethod.GFORMULA

    point = float(estimator(trial, target))

    estimates = np.empty(n_boot)
    n_ok = 0
    n_failed = 0
    for b in range(n_boot):
        rng = substream(seed, b)
        idx_trial = rng.integers(0, trial.n, trial.n)
        idx_target = rng.integers(0, target.n, target.n)
        try:
            boot_trial = TrialDataset(
                covariates=trial.covariates[idx_trial],
                treatment=trial.treatment[idx_trial],
                outcome=trial.outcome[idx_trial],
                covariate_names=trial.covariate_names,
            )
            boot_target = TargetDataset(
                covariates=target.covariates[idx_target],
                covariate_names=target.covariate_names,
            )
            estimates[n_ok] = estimator(boot_trial, boot_target)
        except OvbError:
            n_failed += 1
            continue
        n_ok += 1

    if n_failed > 0.01 * n_boot:
        raise ResampleFailure(f"{n_failed} of {n_boot} bootstrap resamples failed")
    if n_failed:
        logger.warning("%d of %d bootstrap resamples failed and were skipped",
                       n_failed, n_boot)
    lower, upper = np.quantile(estimates[:n_ok], [alpha / 2.0, 1.0 - alpha / 2.0])
    return TransportEstimate(
        tau_x_hat=point,
        ci_lower=float(lower),
        ci_upper=float(upper),
        method=method,
        n_boot=n_boot,
        alpha=alpha,
    )
