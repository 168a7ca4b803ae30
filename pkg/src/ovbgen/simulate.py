"""Synthetic data-generating processes with known oracles, plus the Monte
Carlo drivers that reproduce the coverage and benchmarking experiments.

Every generator is bit-deterministic given (config, seed): all randomness
flows through counter-based substreams, and replication drivers key each
rep's data and bootstrap streams by (seed, rep index), so results do not
depend on worker count or scheduling.  Population-level oracle moments that
lack a closed form are computed once per configuration by brute-force
simulation on a fixed internal stream and cached.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .benchmark import effect_partial_r2, selection_partial_r2
from .errors import InvalidConfig, OvbError
from .model import SensitivityParamsR2, TargetDataset, TrialDataset, pool
from .numerics import add_intercept, ols_fit, ridge_fit
from .sensitivity import r2_bias_bound, sigma_tau_upper
from .streams import derive_seed, substream
from .transport import (
    bootstrap_ci,
    fit_outcome_models,
    gformula_tate,
    ipw_estimator,
)

__all__ = [
    "Dgp1Config",
    "Dgp2Config",
    "Dgp3Config",
    "HideOneConfig",
    "DgpOracle",
    "CoverageCurve",
    "RepRecord",
    "HideOneReport",
    "gen_dgp1",
    "gen_dgp2",
    "gen_dgp3",
    "gen_hide_one",
    "drop_covariate",
    "ridge_gformula",
    "replication_study",
    "coverage_from_records",
    "coverage_experiment",
    "hide_one_benchmark",
]

_ORACLE_MC_N = 1_000_000
_ORACLE_STREAM_TAG = 9090  # fixed internal stream: oracles are config-level constants


# ----------------------------------------------------------------------
# configurations and oracles


@dataclass(frozen=True)
class Dgp1Config:
    """Linear-Gaussian two-population design with a latent moderator.

    Trial covariates are standard normal; target covariates share the same
    unit covariance but every coordinate's mean is shifted by ``mu_shift``.
    The latent moderator tracks the first covariate with population-specific
    slopes (``gamma_r`` in the trial, ``gamma_o`` in the target), and enters
    outcomes only through the treatment interaction with strength ``beta_u``.
    """

    n_trial: int = 2000
    n_target: int = 5000
    p: int = 5
    mu_shift: float = 0.5
    gamma_r: float = 0.0
    gamma_o: float = 0.5
    beta_u: float = 0.5
    tau0: float = 1.0
    sigma: float = 1.0
    beta_x: tuple[float, ...] | None = None
    beta0: float = 0.0

    def __post_init__(self):
        if self.n_trial < 4 or self.n_target < 1 or self.p < 1:
            raise InvalidConfig("need n_trial >= 4, n_target >= 1, p >= 1")
        if not self.sigma > 0:
            raise InvalidConfig(f"sigma must be > 0, got {self.sigma!r}")
        if self.beta_x is None:
            object.__setattr__(self, "beta_x", (0.5,) * self.p)
        elif len(self.beta_x) != self.p:
            raise InvalidConfig(f"beta_x needs {self.p} entries")


@dataclass(frozen=True)
class Dgp2Config:
    """Nonlinear variant: sinusoidal/quadratic baseline in the first two
    covariates and moderation strength that varies linearly with the first."""

    n_trial: int = 2000
    n_target: int = 5000
    p: int = 5
    mu_shift: float = 0.5
    gamma_r: float = 0.0
    gamma_o: float = 0.5
    beta_base: float = 0.5
    beta_x_mod: float = 0.3
    tau0: float = 1.0
    sigma: float = 1.0
    beta0: float = 0.0

    def __post_init__(self):
        if self.n_trial < 4 or self.n_target < 1 or self.p < 2:
            raise InvalidConfig("need n_trial >= 4, n_target >= 1, p >= 2")
        if not self.sigma > 0:
            raise InvalidConfig(f"sigma must be > 0, got {self.sigma!r}")


@dataclass(frozen=True)
class Dgp3Config:
    """High-dimensional variant: 50 covariates of which only the first 10
    drive selection and outcomes; trial membership follows a logistic model
    on the relevant block rather than a fixed two-population split."""

    n_trial: int = 2000
    n_target: int = 5000
    p: int = 50
    n_relevant: int = 10
    gamma_r: float = 0.0
    gamma_o: float = 0.5
    beta_u: float = 0.5
    tau0: float = 1.0
    sigma: float = 1.0
    beta0: float = 0.0
    select_intercept: float = -1.0
    select_slope: float = 0.3

    def __post_init__(self):
        if not 2 <= self.n_relevant <= self.p:
            raise InvalidConfig("need 2 <= n_relevant <= p")
        if self.n_trial < 4 or self.n_target < 1:
            raise InvalidConfig("need n_trial >= 4, n_target >= 1")
        if not self.sigma > 0:
            raise InvalidConfig(f"sigma must be > 0, got {self.sigma!r}")


@dataclass(frozen=True)
class HideOneConfig:
    """Five observed effect modifiers; one is later treated as unobserved.

    The hidden coordinate is deliberately both the strongest modifier and the
    most selection-relevant (largest mean shift), so its benchmark product
    ranks first among the observed covariates.
    """

    n_trial: int = 2000
    n_target: int = 5000
    shift: tuple[float, ...] = (0.8, 0.4, 0.3, 0.2, 0.1)
    theta: tuple[float, ...] = (0.8, 0.3, 0.2, 0.1, 0.05)
    beta_x: tuple[float, ...] = (0.8, 0.8, 0.8, 0.8, 0.8)
    tau0: float = 1.0
    sigma: float = 0.5
    beta0: float = 0.0
    hidden_index: int = 0

    def __post_init__(self):
        p = len(self.shift)
        if len(self.theta) != p or len(self.beta_x) != p:
            raise InvalidConfig("shift, theta, beta_x must share one length")
        if not 0 <= self.hidden_index < p:
            raise InvalidConfig("hidden_index out of range")
        if not self.sigma > 0:
            raise InvalidConfig(f"sigma must be > 0, got {self.sigma!r}")

    @property
    def p(self) -> int:
        return len(self.shift)


@dataclass(frozen=True)
class DgpOracle:
    """Ground-truth quantities for a simulated design.

    ``bias`` is the gap between the target-population effect and the
    covariate-adjusted transported estimand, and always factors as
    moderation strength times average imbalance.  For designs whose
    moderation strength varies with covariates, ``gamma_star`` is the
    effective (bias / imbalance) value rather than a structural constant.
    """

    tau_star: float
    tau_x: float
    gamma_star: float
    delta_u_star: float
    bias: float

    def __post_init__(self):
        if not math.isclose(self.bias, self.tau_star - self.tau_x,
                            rel_tol=1e-9, abs_tol=1e-9):
            raise InvalidConfig("oracle bias must equal tau_star - tau_x")
        if not math.isclose(self.bias, self.gamma_star * self.delta_u_star,
                            rel_tol=1e-9, abs_tol=1e-9):
            raise InvalidConfig("oracle bias must equal gamma_star * delta_u_star")


def _covariate_names(p: int) -> tuple[str, ...]:
    return tuple(f"x{j + 1}" for j in range(p))


def gen_dgp1(config: Dgp1Config, seed: int) -> tuple[TrialDataset, TargetDataset, DgpOracle]:
    """Sample the linear-Gaussian design; the oracle is closed form.

    Draw order (fixed for reproducibility): trial covariates, target
    covariates, latent moderator, treatment, outcome noise.
    """
    rng = substream(seed)
    beta_x = np.asarray(config.beta_x)
    x_trial = rng.standard_normal((config.n_trial, config.p))
    x_target = config.mu_shift + rng.standard_normal((config.n_target, config.p))
    u = config.gamma_r * x_trial[:, 0] + rng.standard_normal(config.n_trial)
    a = (rng.random(config.n_trial) < 0.5).astype(float)
    eps = config.sigma * rng.standard_normal(config.n_trial)
    y = (config.beta0 + x_trial @ beta_x
         + a * (config.tau0 + config.beta_u * u) + eps)

    names = _covariate_names(config.p)
    trial = TrialDataset(x_trial, a, y, names)
    target = TargetDataset(x_target, names)

    delta = (config.gamma_o - config.gamma_r) * config.mu_shift
    oracle = DgpOracle(
        tau_star=config.tau0 + config.beta_u * config.gamma_o * config.mu_shift,
        tau_x=config.tau0 + config.beta_u * config.gamma_r * config.mu_shift,
        gamma_star=config.beta_u,
        delta_u_star=delta,
        bias=config.beta_u * delta,
    )
    return trial, target, oracle


_oracle_cache: dict[object, DgpOracle] = {}


def _dgp2_oracle(config: Dgp2Config) -> DgpOracle:
    """Population moments by brute-force simulation of the target covariate."""
    if config not in _oracle_cache:
        rng = substream(_ORACLE_STREAM_TAG)
        x1 = config.mu_shift + rng.standard_normal(_ORACLE_MC_N)
        moment = float(np.mean((config.beta_base + config.beta_x_mod * x1) * x1))
        delta = (config.gamma_o - config.gamma_r) * config.mu_shift
        bias = (config.gamma_o - config.gamma_r) * moment
        if delta != 0.0:
            gamma_star = bias / delta
        else:
            gamma_star = config.beta_base + config.beta_x_mod * config.mu_shift
        _oracle_cache[config] = DgpOracle(
            tau_star=config.tau0 + config.gamma_o * moment,
            tau_x=config.tau0 + config.gamma_r * moment,
            gamma_star=gamma_star,
            delta_u_star=delta,
            bias=bias,
        )
    return _oracle_cache[config]


def _dgp2_baseline(x: np.ndarray, beta0: float) -> np.ndarray:
    return beta0 + np.sin(np.pi * x[:, 0] / 2.0) + 0.5 * x[:, 1] ** 2


def gen_dgp2(config: Dgp2Config, seed: int) -> tuple[TrialDataset, TargetDataset, DgpOracle]:
    """Same two-population skeleton as the linear design, with a nonlinear
    baseline and covariate-varying moderation strength."""
    rng = substream(seed)
    x_trial = rng.standard_normal((config.n_trial, config.p))
    x_target = config.mu_shift + rng.standard_normal((config.n_target, config.p))
    u = config.gamma_r * x_trial[:, 0] + rng.standard_normal(config.n_trial)
    a = (rng.random(config.n_trial) < 0.5).astype(float)
    eps = config.sigma * rng.standard_normal(config.n_trial)
    beta_of_x = config.beta_base + config.beta_x_mod * x_trial[:, 0]
    y = (_dgp2_baseline(x_trial, config.beta0)
         + a * (config.tau0 + beta_of_x * u) + eps)

    names = _covariate_names(config.p)
    return (
        TrialDataset(x_trial, a, y, names),
        TargetDataset(x_target, names),
        _dgp2_oracle(config),
    )


def _dgp3_selection_prob(x: np.ndarray, config: Dgp3Config) -> np.ndarray:
    score = config.select_intercept + config.select_slope * x[:, : config.n_relevant].sum(axis=1)
    return 1.0 / (1.0 + np.exp(-score))


def _dgp3_baseline(x: np.ndarray, config: Dgp3Config) -> np.ndarray:
    linear = 0.5 * x[:, 2 : config.n_relevant].sum(axis=1)
    return config.beta0 + np.sin(np.pi * x[:, 0] / 2.0) + 0.5 * x[:, 1] ** 2 + linear


def _dgp3_oracle(config: Dgp3Config) -> DgpOracle:
    """Brute-force target-population mean of the moderated coordinate.

    Only the relevant block matters: selection weights 1 - e(X) identify the
    target distribution without sampling the indicator.
    """
    if config not in _oracle_cache:
        rng = substream(_ORACLE_STREAM_TAG, 3)
        x = rng.standard_normal((_ORACLE_MC_N, config.n_relevant))
        score = config.select_intercept + config.select_slope * x.sum(axis=1)
        w_target = 1.0 - 1.0 / (1.0 + np.exp(-score))
        mean_x1_target = float((x[:, 0] * w_target).sum() / w_target.sum())
        delta = (config.gamma_o - config.gamma_r) * mean_x1_target
        _oracle_cache[config] = DgpOracle(
            tau_star=config.tau0 + config.beta_u * config.gamma_o * mean_x1_target,
            tau_x=config.tau0 + config.beta_u * config.gamma_r * mean_x1_target,
            gamma_star=config.beta_u,
            delta_u_star=delta,
            bias=config.beta_u * delta,
        )
    return _oracle_cache[config]


def gen_dgp3(config: Dgp3Config, seed: int) -> tuple[TrialDataset, TargetDataset, DgpOracle]:
    """High-dimensional design with logistic selection on the relevant block.

    Candidates are drawn in fixed-size blocks and assigned to trial or target
    by a logistic draw until both quotas fill; the first ``n_trial`` trial
    rows and first ``n_target`` target rows are kept, so output is
    deterministic given the seed.
    """
    rng = substream(seed)
    trial_rows, target_rows = [], []
    block = config.n_trial + config.n_target
    while (sum(len(b) for b in trial_rows) < config.n_trial
           or sum(len(b) for b in target_rows) < config.n_target):
        x = rng.standard_normal((block, config.p))
        s = rng.random(block) < _dgp3_selection_prob(x, config)
        trial_rows.append(x[s])
        target_rows.append(x[~s])
    x_trial = np.vstack(trial_rows)[: config.n_trial]
    x_target = np.vstack(target_rows)[: config.n_target]

    u = config.gamma_r * x_trial[:, 0] + rng.standard_normal(config.n_trial)
    a = (rng.random(config.n_trial) < 0.5).astype(float)
    eps = config.sigma * rng.standard_normal(config.n_trial)
    y = (_dgp3_baseline(x_trial, config)
         + a * (config.tau0 + config.beta_u * u) + eps)

    names = _covariate_names(config.p)
    return (
        TrialDataset(x_trial, a, y, names),
        TargetDataset(x_target, names),
        _dgp3_oracle(config),
    )


def gen_hide_one(config: HideOneConfig, seed: int) -> tuple[TrialDataset, TargetDataset, DgpOracle]:
    """Fully observed effect-modifier design for the hide-one benchmark.

    All moderation runs through observed covariates, so the returned oracle
    describes the analysis *after* hiding ``config.hidden_index``: ``tau_x``
    is the estimand targeted on the remaining covariates and ``bias`` is the
    gap opened by hiding.
    """
    rng = substream(seed)
    p = config.p
    shift = np.asarray(config.shift)
    theta = np.asarray(config.theta)
    beta_x = np.asarray(config.beta_x)
    x_trial = rng.standard_normal((config.n_trial, p))
    x_target = shift + rng.standard_normal((config.n_target, p))
    a = (rng.random(config.n_trial) < 0.5).astype(float)
    eps = config.sigma * rng.standard_normal(config.n_trial)
    y = (config.beta0 + x_trial @ beta_x
         + a * (config.tau0 + x_trial @ theta) + eps)

    names = _covariate_names(p)
    k = config.hidden_index
    tau_star = config.tau0 + float(theta @ shift)
    bias = float(theta[k] * shift[k])
    oracle = DgpOracle(
        tau_star=tau_star,
        tau_x=tau_star - bias,
        gamma_star=float(theta[k]),
        delta_u_star=float(shift[k]),
        bias=bias,
    )
    return TrialDataset(x_trial, a, y, names), TargetDataset(x_target, names), oracle


def drop_covariate(
    trial: TrialDataset, target: TargetDataset, index: int
) -> tuple[TrialDataset, TargetDataset]:
    """Datasets with one covariate column removed from both tables."""
    keep = [j for j in range(trial.p) if j != index]
    names = tuple(trial.covariate_names[j] for j in keep)
    return (
        TrialDataset(trial.covariates[:, keep], trial.treatment, trial.outcome, names),
        TargetDataset(target.covariates[:, keep], names),
    )


def ridge_gformula(trial: TrialDataset, target: TargetDataset, penalty: float = 1.0) -> float:
    """Transported estimate with ridge-penalized per-arm outcome models."""
    fits = {}
    for arm in (0, 1):
        x, y = trial.arm(arm)
        fits[arm] = ridge_fit(add_intercept(x), y, penalty)
    design = add_intercept(target.covariates)
    return float((fits[1].predict(design) - fits[0].predict(design)).mean())


# ----------------------------------------------------------------------
# replication drivers


@dataclass(frozen=True)
class RepRecord:
    """Per-replication estimates feeding coverage and calibration summaries."""

    tau_hat: float
    ci_lower: float
    ci_upper: float
    sigma_tau_upper: float


@dataclass(frozen=True)
class CoverageCurve:
    """Coverage of the bias envelope and the inflated CI along a grid of
    moderation bounds."""

    gamma_grid: tuple[float, ...]
    coverage_envelope: tuple[float, ...]
    coverage_full_ci: tuple[float, ...]
    n_reps: int
    n_failures: int = 0

    def __post_init__(self):
        k = len(self.gamma_grid)
        if len(self.coverage_envelope) != k or len(self.coverage_full_ci) != k:
            raise InvalidConfig("coverage vectors must match the gamma grid")
        for env, full in zip(self.coverage_envelope, self.coverage_full_ci):
            if not (0.0 <= env <= 1.0 and 0.0 <= full <= 1.0):
                raise InvalidConfig("coverages must lie in [0, 1]")
            if full < env:
                raise InvalidConfig("full-CI coverage cannot fall below envelope coverage")


def _run_rep(args) -> tuple[int, RepRecord | None, DgpOracle | None]:
    (generator, rep_index, data_seed, boot_seed, estimator,
     n_boot, alpha, compute_ci, weight_clip) = args
    try:
        trial, target, oracle = generator(data_seed)
        models = fit_outcome_models(trial)
        if estimator == "ipw":
            tau_hat = ipw_estimator(trial, target, weight_clip)
        else:
            tau_hat = gformula_tate(models, target)
        if compute_ci:
            est = bootstrap_ci(estimator, trial, target,
                               n_boot=n_boot, alpha=alpha, seed=boot_seed)
            ci_lower, ci_upper = est.ci_lower, est.ci_upper
        else:
            ci_lower = ci_upper = math.nan
        record = RepRecord(
            tau_hat=float(tau_hat),
            ci_lower=ci_lower,
            ci_upper=ci_upper,
            sigma_tau_upper=sigma_tau_upper(models).value,
        )
        return rep_index, record, oracle
    except OvbError:
        return rep_index, None, None


def replication_study(
    generator: Callable[[int], tuple[TrialDataset, TargetDataset, DgpOracle]],
    n_reps: int,
    seed: int,
    *,
    estimator: str = "gformula",
    n_boot: int = 1000,
    alpha: float = 0.05,
    compute_ci: bool = True,
    threads: int = 1,
    weight_clip: float = 50.0,
) -> tuple[list[RepRecord], DgpOracle, int]:
    """Run ``n_reps`` independent replications of generate-then-estimate.

    Returns the per-rep records (in rep order), the design oracle, and the
    number of failed reps.  Rep r draws its data from stream (seed, r, 0)
    and its bootstrap from (seed, r, 1), so any worker count gives the same
    records.
    """
    tasks = [
        (generator, r, derive_seed(seed, r, 0), derive_seed(seed, r, 1),
         estimator, n_boot, alpha, compute_ci, weight_clip)
        for r in range(n_reps)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool_:
            raw = list(pool_.map(_run_rep, tasks, chunksize=max(1, n_reps // (4 * threads))))
    else:
        raw = [_run_rep(t) for t in tasks]
    raw.sort(key=lambda item: item[0])

    records = [rec for _, rec, _ in raw if rec is not None]
    n_failures = n_reps - len(records)
    oracle = next((orc for _, rec, orc in raw if rec is not None), None)
    if oracle is None:
        raise OvbError(f"all {n_reps} replications failed")
    return records, oracle, n_failures


def coverage_from_records(
    records: list[RepRecord],
    oracle: DgpOracle,
    gamma_grid,
    n_failures: int = 0,
) -> CoverageCurve:
    """Coverage of the true target effect by envelope and inflated CI.

    The envelope half-width at moderation bound gamma is gamma times the
    oracle imbalance scale |delta_u_star|; the full interval widens the
    bootstrap CI by the same amount.
    """
    gamma_grid = tuple(float(g) for g in gamma_grid)
    scale = abs(oracle.delta_u_star)
    tau_hat = np.array([r.tau_hat for r in records])
    ci_lo = np.array([r.ci_lower for r in records])
    ci_hi = np.array([r.ci_upper for r in records])
    env_cov, full_cov = [], []
    for gamma in gamma_grid:
        b = gamma * scale
        env_cov.append(float(np.mean(
            (tau_hat - b <= oracle.tau_star) & (oracle.tau_star <= tau_hat + b))))
        full_cov.append(float(np.mean(
            (ci_lo - b <= oracle.tau_star) & (oracle.tau_star <= ci_hi + b))))
    return CoverageCurve(
        gamma_grid=gamma_grid,
        coverage_envelope=tuple(env_cov),
        coverage_full_ci=tuple(full_cov),
        n_reps=len(records),
        n_failures=n_failures,
    )


def coverage_experiment(
    generator: Callable[[int], tuple[TrialDataset, TargetDataset, DgpOracle]],
    gamma_grid,
    n_reps: int,
    seed: int,
    *,
    n_boot: int = 1000,
    alpha: float = 0.05,
    threads: int = 1,
    estimator: str = "gformula",
) -> CoverageCurve:
    """Monte Carlo coverage of envelope and inflated CI along a gamma grid."""
    if n_reps < 100:
        warnings.warn(
            f"{n_reps} replications is below the 100-rep reporting threshold",
            stacklevel=2,
        )
    records, oracle, n_failures = replication_study(
        generator, n_reps, seed,
        estimator=estimator, n_boot=n_boot, alpha=alpha,
        compute_ci=True, threads=threads,
    )
    return coverage_from_records(records, oracle, gamma_grid, n_failures)


# ----------------------------------------------------------------------
# hide-one-moderator benchmark


@dataclass(frozen=True)
class HideOneReport:
    """Aggregate results of the hide-one-moderator study."""

    n_reps: int
    n_failures: int
    coverage: float
    mean_bound: float
    mean_tau_hat: float
    tau_star: float
    hidden_index: int
    mean_products: tuple[float, ...]


def _hide_one_rep(args) -> tuple[int, tuple | None]:
    config, rep_index, data_seed = args
    try:
        trial, target, oracle = gen_hide_one(config, data_seed)
        k = config.hidden_index
        pooled = pool(trial, target)
        products = tuple(
            selection_partial_r2(pooled, j) * effect_partial_r2(trial, j)
            for j in range(config.p)
        )
        r2_s_z = selection_partial_r2(pooled, k)
        r2_tau_z = effect_partial_r2(trial, k)

        hid_trial, hid_target = drop_covariate(trial, target, k)
        models = fit_outcome_models(hid_trial)
        tau_hat = gformula_tate(models, hid_target)
        hid_pooled = pool(hid_trial, hid_target)
        r2_s_x = ols_fit(
            add_intercept(hid_pooled.covariates), hid_pooled.selection
        ).r_squared
        bound = r2_bias_bound(SensitivityParamsR2(
            r2_tau_u=r2_tau_z,
            r2_s_u=r2_s_z,
            sigma_tau=sigma_tau_upper(models).value,
            var_s=hid_pooled.var_s,
            r2_s_x=r2_s_x,
        ))
        covered = abs(tau_hat - oracle.tau_star) <= bound
        return rep_index, (covered, bound, tau_hat, products)
    except OvbError:
        return rep_index, None


def hide_one_benchmark(
    seed: int,
    n_reps: int,
    config: HideOneConfig | None = None,
    threads: int = 1,
) -> HideOneReport:
    """Hide the designated covariate, bound the damage with its pre-hiding
    benchmark partial R-squareds, and measure envelope coverage of the truth.

    Per rep: estimate the hidden covariate's two partial R-squareds while it
    is still observed; drop it; re-estimate the transported effect on the
    remaining covariates; evaluate the bias bound with the pre-hiding values
    and the post-hiding heterogeneity and selection scales; record whether
    the envelope covers the oracle target effect.
    """
    if n_reps < 100:
        warnings.warn(
            f"{n_reps} replications is below the 100-rep reporting threshold",
            stacklevel=2,
        )
    config = config or HideOneConfig()
    tasks = [(config, r, derive_seed(seed, r, 0)) for r in range(n_reps)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool_:
            raw = list(pool_.map(_hide_one_rep, tasks, chunksize=max(1, n_reps // (4 * threads))))
    else:
        raw = [_hide_one_rep(t) for t in tasks]
    raw.sort(key=lambda item: item[0])
    results = [res for _, res in raw if res is not None]
    if not results:
        raise OvbError(f"all {n_reps} replications failed")

    covered = np.array([r[0] for r in results], dtype=float)
    bounds = np.array([r[1] for r in results])
    tau_hats = np.array([r[2] for r in results])
    products = np.array([r[3] for r in results])
    oracle = gen_hide_one(config, derive_seed(seed, 0, 0))[2]
    return HideOneReport(
        n_reps=len(results),
        n_failures=n_reps - len(results),
        coverage=float(covered.mean()),
        mean_bound=float(bounds.mean()),
        mean_tau_hat=float(tau_hats.mean()),
        tau_star=oracle.tau_star,
        hidden_index=config.hidden_index,
        mean_products=tuple(float(v) for v in products.mean(axis=0)),
    )
