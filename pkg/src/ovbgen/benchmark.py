"""Leave-one-covariate-out benchmarking of sensitivity parameters.

Each observed covariate is treated, in turn, as if it were the unobserved
moderator: its partial R-squared with trial membership and with the fitted
treatment-effect function calibrate how strong a real unobserved moderator
would have to be, relative to variables we can actually see, before the
robustness value is exceeded.
"""

from __future__ import annotations

import numpy as np

from .errors import SingleCovariate
from .model import BenchmarkEntry, PooledDesign, TrialDataset
from .numerics import add_intercept, independent_columns, ols_fit, partial_r2

__all__ = ["selection_partial_r2", "effect_partial_r2", "benchmark_table"]


def _guarded_partial_r2(r2_full: float, r2_reduced: float) -> float:
    """partial_r2 with the degenerate perfect-reduced-fit case mapped to 0.

    When the remaining covariates already explain everything (noiseless
    designs), the candidate column has no residual variance left to claim.
    """
    if r2_reduced >= 1.0 - 1e-12:
        return 0.0
    return partial_r2(r2_full, r2_reduced)


def _r2_on_columns(x: np.ndarray, y: np.ndarray, columns: list[int]) -> float:
    """R-squared of y on an intercept plus the given covariate columns.

    Collinear columns are filtered to a maximal independent set first (keeping
    earlier columns), so duplicated covariates contribute nothing instead of
    breaking the fit.
    """
    design = add_intercept(x[:, columns]) if columns else add_intercept(x[:, :0])
    kept = independent_columns(design)
    return ols_fit(design[:, kept], y).r_squared


def selection_partial_r2(pooled: PooledDesign, z_index: int) -> float:
    """Partial R-squared of trial membership explained by covariate ``z_index``
    beyond the remaining covariates (linear probability fits)."""
    p = pooled.covariates.shape[1]
    if p < 2:
        raise SingleCovariate("benchmarking needs at least two covariates")
    others = [j for j in range(p) if j != z_index]
    r2_full = _r2_on_columns(pooled.covariates, pooled.selection, list(range(p)))
    r2_reduced = _r2_on_columns(pooled.covariates, pooled.selection, others)
    return _guarded_partial_r2(r2_full, r2_reduced)


def _pseudo_effects(trial: TrialDataset) -> np.ndarray:
    """Unit-level pseudo effect values from the fully interacted regression.

    Fits Y ~ (1, X, A, A*X) and evaluates the implied effect at each trial
    row, then adds the unit's own inverse-probability-weighted residual:

        tau~_i = cate_hat(X_i) + (A_i - pbar) / (pbar (1 - pbar)) * r_i

    The fitted effect function alone is an exact linear function of X (its
    regression on X would have R-squared identically 1), so the residual
    term is what keeps the second-stage R-squareds informative: covariates
    that modify nothing explain only noise.  Collinear columns are dropped
    from the design; their interaction coefficients count as zero.
    """
    x, a, y = trial.covariates, trial.treatment, trial.outcome
    design = np.column_stack([np.ones(trial.n), x, a, a[:, None] * x])
    kept = independent_columns(design)
    fit = ols_fit(design[:, kept], y)
    coef = np.zeros(design.shape[1])
    coef[kept] = fit.coefficients
    residuals = y - design @ coef
    p = trial.p
    cate = coef[p + 1] + x @ coef[p + 2 :]
    pbar = a.mean()
    return cate + (a - pbar) / (pbar * (1.0 - pbar)) * residuals


def effect_partial_r2(trial: TrialDataset, z_index: int) -> float:
    """Partial R-squared of the treatment effect explained by covariate
    ``z_index`` beyond the remaining covariates.

    Two-stage construction: the interacted fit gives unit-level pseudo
    effect values, which are then regressed on all covariates versus
    all-but-z.  Sampling noise in the first stage is not propagated into
    the reported value.
    """
    p = trial.p
    if p < 2:
        raise SingleCovariate("benchmarking needs at least two covariates")
    tau_tilde = _pseudo_effects(trial)
    others = [j for j in range(p) if j != z_index]
    r2_full = _r2_on_columns(trial.covariates, tau_tilde, list(range(p)))
    r2_reduced = _r2_on_columns(trial.covariates, tau_tilde, others)
    return _guarded_partial_r2(r2_full, r2_reduced)


def benchmark_table(
    trial: TrialDataset, pooled: PooledDesign, rv_reference: float
) -> list[BenchmarkEntry]:
    """One benchmark entry per covariate, strongest product first.

    ``exceeds_rv`` flags covariates whose product reaches the reference
    robustness value.  Ties are broken by original column order.
    """
    entries = []
    for j, name in enumerate(trial.covariate_names):
        r2_s_z = selection_partial_r2(pooled, j)
        r2_tau_z = effect_partial_r2(trial, j)
        product = r2_s_z * r2_tau_z
        entries.append(
            (j, BenchmarkEntry(
                covariate=name,
                r2_s_z=r2_s_z,
                r2_tau_z=r2_tau_z,
                product=product,
                exceeds_rv=bool(product >= rv_reference),
            ))
        )
    entries.sort(key=lambda item: (-item[1].product, item[0]))
    return [entry for _, entry in entries]
