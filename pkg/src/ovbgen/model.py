"""Typed datasets and shared result containers.

Raw tabular input is validated once, up front, into immutable dataset
objects; every downstream module can then assume clean numeric arrays.
Covariates must already be numeric: categorical encoding is a CLI-layer
concern, not a math-core one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    EmptyArm,
    InvalidInput,
    InvalidR2,
    MissingColumn,
    NonBinaryTreatment,
    NonFiniteValue,
    SchemaMismatch,
    TooFewRows,
)

__all__ = [
    "TrialDataset",
    "TargetDataset",
    "PooledDesign",
    "SensitivityParamsRaw",
    "SensitivityParamsR2",
    "TransportEstimate",
    "SensitivityReport",
    "BenchmarkEntry",
    "EstimatorMethod",
    "IngestResult",
    "validate_ingest",
    "pool",
]


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_finite(arr: np.ndarray, names: Sequence[str]) -> None:
    """Raise NonFiniteValue naming the first offending column/row."""
    cols = np.atleast_2d(arr.T)
    for j, col in enumerate(cols):
        bad = np.flatnonzero(~np.isfinite(col))
        if bad.size:
            raise NonFiniteValue(
                f"column '{names[j]}' has a non-finite value at row {int(bad[0])}"
            )


@dataclass(frozen=True)
class TrialDataset:
    """Randomized-trial rows: covariates, binary treatment, outcome."""

    covariates: np.ndarray
    treatment: np.ndarray
    outcome: np.ndarray
    covariate_names: tuple[str, ...]

    def __post_init__(self):
        x = _frozen_array(self.covariates)
        if x.ndim != 2:
            raise InvalidInput("covariates must be a 2-d matrix")
        a = _frozen_array(self.treatment)
        y = _frozen_array(self.outcome)
        names = tuple(str(n) for n in self.covariate_names)
        object.__setattr__(self, "covariates", x)
        object.__setattr__(self, "treatment", a)
        object.__setattr__(self, "outcome", y)
        object.__setattr__(self, "covariate_names", names)

        n, p = x.shape
        if len(names) != p:
            raise SchemaMismatch(f"{len(names)} covariate names for {p} columns")
        if a.shape != (n,) or y.shape != (n,):
            raise SchemaMismatch("treatment/outcome length must match covariate rows")
        _check_finite(x, names)
        _check_finite(y, ["outcome"])
        bad = np.flatnonzero(~np.isin(a, (0.0, 1.0)))
        if bad.size:
            raise NonBinaryTreatment(
                f"treatment has value {a[bad[0]]!r} at row {int(bad[0])}"
            )
        n1 = int(a.sum())
        if n1 == 0 or n1 == n:
            raise EmptyArm(f"treatment arm {'1' if n1 == 0 else '0'} has no rows")
        if n < p + 2:
            raise TooFewRows(f"{n} rows cannot support {p} covariates (need >= p + 2)")

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]

    def arm(self, a: int) -> tuple[np.ndarray, np.ndarray]:
        """Covariates and outcomes of the rows with treatment == a."""
        mask = self.treatment == a
        return self.covariates[mask], self.outcome[mask]


@dataclass(frozen=True)
class TargetDataset:
    """Target-population rows: covariates only, no treatment or outcome."""

    covariates: np.ndarray
    covariate_names: tuple[str, ...]

    def __post_init__(self):
        x = _frozen_array(self.covariates)
        if x.ndim != 2:
            raise InvalidInput("covariates must be a 2-d matrix")
        names = tuple(str(n) for n in self.covariate_names)
        object.__setattr__(self, "covariates", x)
        object.__setattr__(self, "covariate_names", names)
        if len(names) != x.shape[1]:
            raise SchemaMismatch(
                f"{len(names)} covariate names for {x.shape[1]} columns"
            )
        _check_finite(x, names)

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]


@dataclass(frozen=True)
class PooledDesign:
    """Stacked trial + target covariates with a trial-membership indicator."""

    covariates: np.ndarray
    selection: np.ndarray

    def __post_init__(self):
        x = _frozen_array(self.covariates)
        s = _frozen_array(self.selection)
        object.__setattr__(self, "covariates", x)
        object.__setattr__(self, "selection", s)
        if s.shape != (x.shape[0],):
            raise SchemaMismatch("selection length must match covariate rows")
        if not np.isin(s, (0.0, 1.0)).all():
            raise InvalidInput("selection entries must be 0 or 1")
        if s.sum() in (0, len(s)):
            raise InvalidInput("pooled design needs both trial and target rows")

    @property
    def n_trial(self) -> int:
        return int(self.selection.sum())

    @property
    def n_target(self) -> int:
        return int(len(self.selection) - self.selection.sum())

    @property
    def pi(self) -> float:
        """Trial membership probability P(S = 1) under the pooled sample."""
        return self.n_trial / len(self.selection)

    @property
    def var_s(self) -> float:
        """Var(S) = pi * (1 - pi); always in (0, 0.25]."""
        return self.pi * (1.0 - self.pi)


class EstimatorMethod(str, enum.Enum):
    GFORMULA = "gformula"
    IPW = "ipw"


@dataclass(frozen=True)
class SensitivityParamsRaw:
    """Raw sensitivity parameters: moderation strength and imbalance bounds.

    ``gamma`` bounds how much a one-unit change in the unobserved moderator
    can move the treatment effect; ``lam`` bounds the moderator's
    covariate-adjusted mean imbalance between target and trial.
    """

    gamma: float
    lam: float

    def __post_init__(self):
        for name, v in (("gamma", self.gamma), ("lam", self.lam)):
            if not math.isfinite(v) or v < 0:
                raise InvalidInput(f"{name} must be finite and >= 0, got {v!r}")


@dataclass(frozen=True)
class SensitivityParamsR2:
    """Scale-free sensitivity parameters on the partial R-squared scale."""

    r2_tau_u: float
    r2_s_u: float
    sigma_tau: float
    var_s: float
    r2_s_x: float

    def __post_init__(self):
        for name in ("r2_tau_u", "r2_s_u"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidR2(f"{name} must be in [0, 1], got {v!r}")
        if not 0.0 <= self.r2_s_x < 1.0:
            raise InvalidR2(f"r2_s_x must be in [0, 1), got {self.r2_s_x!r}")
        if not (math.isfinite(self.sigma_tau) and self.sigma_tau >= 0):
            raise InvalidInput(f"sigma_tau must be >= 0, got {self.sigma_tau!r}")
        if not 0.0 < self.var_s <= 0.25:
            raise InvalidInput(f"var_s must be in (0, 0.25], got {self.var_s!r}")


@dataclass(frozen=True)
class TransportEstimate:
    """Point estimate of the covariate-adjusted transported effect with CI.

    The percentile bootstrap does not guarantee the point estimate lies
    inside its own interval in pathological small samples, so only the
    endpoint ordering is enforced here.
    """

    tau_x_hat: float
    ci_lower: float
    ci_upper: float
    method: EstimatorMethod
    n_boot: int
    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InvalidInput(f"alpha must be in (0, 1), got {self.alpha!r}")
        if self.ci_lower > self.ci_upper:
            raise InvalidInput("ci_lower must not exceed ci_upper")


@dataclass(frozen=True)
class SensitivityReport:
    """Bias bound plus the two derived intervals of the reporting workflow.

    envelope = point estimate +/- bias bound (bias only);
    full interval = bootstrap CI widened by the bias bound on each side.
    """

    estimate: TransportEstimate
    bias_bound: float
    envelope_lower: float
    envelope_upper: float
    full_lower: float
    full_upper: float
    rv_sign_reversal: float | None = None

    def __post_init__(self):
        if self.bias_bound < 0:
            raise InvalidInput("bias_bound must be >= 0")
        width = self.envelope_upper - self.envelope_lower
        if not math.isclose(width, 2.0 * self.bias_bound, rel_tol=1e-9, abs_tol=1e-12):
            raise InvalidInput("envelope width must equal twice the bias bound")
        if self.rv_sign_reversal is not None and self.rv_sign_reversal < 0:
            raise InvalidInput("rv_sign_reversal must be >= 0")


@dataclass(frozen=True)
class BenchmarkEntry:
    """One observed covariate's strength as a hypothetical unobserved moderator."""

    covariate: str
    r2_s_z: float
    r2_tau_z: float
    product: float
    exceeds_rv: bool

    def __post_init__(self):
        if not 0.0 <= self.product <= 1.0:
            raise InvalidR2(f"benchmark product must be in [0, 1], got {self.product!r}")


class IngestResult(NamedTuple):
    trial: TrialDataset
    target: TargetDataset
    n_dropped_trial: int
    n_dropped_target: int


def _require_columns(table: Mapping[str, Sequence], needed, where: str) -> None:
    for name in needed:
        if name not in table:
            raise MissingColumn(f"column '{name}' not found in {where} table")


def _to_float(value, column: str, row: int) -> float:
    """Parse a cell; missing markers become NaN, garbage raises."""
    if value is None:
        return math.nan
    if isinstance(value, str):
        s = value.strip()
        if s == "" or s.upper() in ("NA", "NAN"):
            return math.nan
        try:
            return float(s)
        except ValueError:
            raise NonFiniteValue(
                f"column '{column}' has unparseable value {value!r} at row {row}"
            ) from None
    return float(value)


def _columns_to_matrix(table, names) -> np.ndarray:
    lengths = {len(table[n]) for n in names}
    if len(lengths) > 1:
        raise SchemaMismatch(f"ragged columns: lengths {sorted(lengths)}")
    n_rows = lengths.pop() if lengths else 0
    out = np.empty((n_rows, len(names)))
    for j, name in enumerate(names):
        col = table[name]
        for i in range(n_rows):
            out[i, j] = _to_float(col[i], name, i)
    return out


def validate_ingest(
    trial_table: Mapping[str, Sequence],
    target_table: Mapping[str, Sequence],
    column_roles: Mapping[str, object],
) -> IngestResult:
    """Validate raw column-major tables into typed datasets.

    ``column_roles`` maps 'covariates' to an ordered list of column names and
    'treatment'/'outcome' to the trial-table column names for those roles.
    Rows containing a missing value (None, empty string, NaN) are dropped and
    counted; infinities and unparseable cells raise ``NonFiniteValue``.
    """
    covs = list(column_roles.get("covariates") or [])
    treat = column_roles.get("treatment")
    outc = column_roles.get("outcome")
    if not covs:
        raise MissingColumn("column_roles must name at least one covariate")
    if not treat:
        raise MissingColumn("column_roles must name the treatment column")
    if not outc:
        raise MissingColumn("column_roles must name the outcome column")

    _require_columns(trial_table, [*covs, treat, outc], "trial")
    _require_columns(target_table, covs, "target")

    trial_mat = _columns_to_matrix(trial_table, [*covs, treat, outc])
    target_mat = _columns_to_matrix(target_table, covs)

    keep_trial = ~np.isnan(trial_mat).any(axis=1)
    keep_target = ~np.isnan(target_mat).any(axis=1)
    n_dropped_trial = int((~keep_trial).sum())
    n_dropped_target = int((~keep_target).sum())
    trial_mat = trial_mat[keep_trial]
    target_mat = target_mat[keep_target]

    trial = TrialDataset(
        covariates=trial_mat[:, : len(covs)],
        treatment=trial_mat[:, len(covs)],
        outcome=trial_mat[:, len(covs) + 1],
        covariate_names=tuple(covs),
    )
    target = TargetDataset(covariates=target_mat, covariate_names=tuple(covs))
    return IngestResult(trial, target, n_dropped_trial, n_dropped_target)


def pool(trial: TrialDataset, target: TargetDataset) -> PooledDesign:
    """Stack trial rows over target rows with a selection indicator.

    Trial rows come first with selection 1, so downstream weighting can slice
    the first ``trial.n`` fitted probabilities.
    """
    if trial.covariate_names != target.covariate_names:
        raise SchemaMismatch(
            f"covariate names differ: {trial.covariate_names} vs {target.covariate_names}"
        )
    covariates = np.vstack([trial.covariates, target.covariates])
    selection = np.concatenate([np.ones(trial.n), np.zeros(target.n)])
    return PooledDesign(covariates=covariates, selection=selection)
