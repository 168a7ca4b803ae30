"""Bias bounds, robustness values, and interval inflation.

The core quantity is a bound on how far the covariate-adjusted transported
effect can sit from the true target effect when an unobserved effect
modifier is imbalanced between populations.  Two parameterizations are
supported: a raw product of moderation-strength and imbalance bounds, and a
scale-free version on the partial R-squared scale

    bound = sigma_tau * sqrt( r2_tau_u * r2_s_u / (var_s * (1 - r2_s_x)) )

whose inversion at a target bias magnitude gives the robustness value: the
minimum product of the two partial R-squareds able to produce that bias.
The R-squared route additionally assumes the moderator's covariate-adjusted
imbalance is constant; the raw bound does not need that and stays valid
when it fails.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, InvalidR2
from .model import SensitivityParamsR2, SensitivityParamsRaw, SensitivityReport, TransportEstimate
from .transport import OutcomeModels

__all__ = [
    "SigmaTauMode",
    "SigmaTauEstimate",
    "ContourGrid",
    "raw_bias_bound",
    "r2_bias_bound",
    "robustness_value",
    "sigma_tau_upper",
    "inflate_interval",
    "contour_grid",
]


class SigmaTauMode(str, enum.Enum):
    USER_SUPPLIED = "user-supplied"
    UPPER_BOUND = "upper-bound"


@dataclass(frozen=True)
class SigmaTauEstimate:
    """Residual effect-heterogeneity scale, in outcome units."""

    value: float
    mode: SigmaTauMode

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise InvalidInput(f"sigma_tau must be finite and >= 0, got {self.value!r}")


@dataclass(frozen=True)
class ContourGrid:
    """Bias bound evaluated over the unit square of partial R-squared pairs."""

    r2_tau_axis: np.ndarray
    r2_s_axis: np.ndarray
    bound: np.ndarray
    reversal_mask: np.ndarray

    def __post_init__(self):
        if self.bound.shape != (len(self.r2_tau_axis), len(self.r2_s_axis)):
            raise InvalidInput("bound matrix shape must match the two axes")
        if self.reversal_mask.shape != self.bound.shape:
            raise InvalidInput("reversal mask shape must match the bound matrix")


def raw_bias_bound(params: SensitivityParamsRaw) -> float:
    """Worst-case bias: moderation-strength bound times imbalance bound."""
    return params.gamma * params.lam


def r2_bias_bound(params: SensitivityParamsR2) -> float:
    """Closed-form bias bound on the partial R-squared scale."""
    denom = params.var_s * (1.0 - params.r2_s_x)
    if denom <= 0.0:
        raise InvalidR2("var_s * (1 - r2_s_x) must be positive")
    return params.sigma_tau * math.sqrt(params.r2_tau_u * params.r2_s_u / denom)


def robustness_value(
    bias_target: float, sigma_tau: float, var_s: float, r2_s_x: float
) -> float:
    """Minimum product of the two partial R-squareds inducing ``bias_target``.

    Returns the threshold on r2_tau_u * r2_s_u; values above 1 mean the bias
    is unattainable for any moderator.  With sigma_tau = 0 and a positive
    target the supremum does not exist, reported as +inf.
    """
    if not (math.isfinite(bias_target) and bias_target >= 0):
        raise InvalidInput(f"bias_target must be finite and >= 0, got {bias_target!r}")
    if sigma_tau < 0:
        raise InvalidInput(f"sigma_tau must be >= 0, got {sigma_tau!r}")
    if not 0.0 < var_s <= 0.25:
        raise InvalidInput(f"var_s must be in (0, 0.25], got {var_s!r}")
    if not 0.0 <= r2_s_x < 1.0:
        raise InvalidR2(f"r2_s_x must be in [0, 1), got {r2_s_x!r}")
    if bias_target == 0.0:
        return 0.0
    if sigma_tau == 0.0:
        return math.inf
    return var_s * (1.0 - r2_s_x) * (bias_target / sigma_tau) ** 2


def sigma_tau_upper(models: OutcomeModels) -> SigmaTauEstimate:
    """Conservative heterogeneity scale: sqrt of summed arm residual variances.

    This upper bound ignores any within-person correlation of potential
    outcomes, so it typically overstates the residual effect heterogeneity by
    a sizeable factor; the resulting intervals are conservative.
    """
    value = math.sqrt(models.residual_var0 + models.residual_var1)
    return SigmaTauEstimate(value=value, mode=SigmaTauMode.UPPER_BOUND)


def inflate_interval(
    base: TransportEstimate,
    bias_bound: float,
    *,
    sigma_tau: float | None = None,
    var_s: float | None = None,
    r2_s_x: float | None = None,
) -> SensitivityReport:
    """Widen the baseline interval by the bias bound on each side.

    The envelope is the point estimate plus/minus the bound (systematic bias
    only); the full interval additionally keeps the bootstrap sampling
    uncertainty.  When the scale inputs are supplied, the sign-reversal
    robustness value at the point estimate's magnitude is attached.
    """
    if not (math.isfinite(bias_bound) and bias_bound >= 0):
        raise InvalidInput(f"bias_bound must be finite and >= 0, got {bias_bound!r}")
    rv = None
    if sigma_tau is not None and var_s is not None and r2_s_x is not None:
        rv = robustness_value(abs(base.tau_x_hat), sigma_tau, var_s, r2_s_x)
    return SensitivityReport(
        estimate=base,
        bias_bound=bias_bound,
        envelope_lower=base.tau_x_hat - bias_bound,
        envelope_upper=base.tau_x_hat + bias_bound,
        full_lower=base.ci_lower - bias_bound,
        full_upper=base.ci_upper + bias_bound,
        rv_sign_reversal=rv,
    )


def contour_grid(
    sigma_tau: float,
    var_s: float,
    r2_s_x: float,
    tau_x_hat: float,
    resolution: int = 101,
) -> ContourGrid:
    """Evaluate the bias bound on a uniform grid over [0, 1]^2.

    The reversal mask marks cells whose bound reaches the point estimate's
    magnitude, i.e. parameter pairs that could flip the sign.
    """
    if resolution < 2:
        raise InvalidInput(f"resolution must be >= 2, got {resolution}")
    axis = np.linspace(0.0, 1.0, resolution)
    denom = var_s * (1.0 - r2_s_x)
    if denom <= 0.0 or var_s > 0.25 or not 0.0 <= r2_s_x < 1.0:
        raise InvalidR2("need var_s in (0, 0.25] and r2_s_x in [0, 1)")
    if sigma_tau < 0:
        raise InvalidInput(f"sigma_tau must be >= 0, got {sigma_tau!r}")
    bound = sigma_tau * np.sqrt(np.outer(axis, axis) / denom)
    mask = bound >= abs(tau_x_hat)
    bound.setflags(write=False)
    mask.setflags(write=False)
    frozen_axis = axis.copy()
    frozen_axis.setflags(write=False)
    return ContourGrid(
        r2_tau_axis=frozen_axis,
        r2_s_axis=frozen_axis,
        bound=bound,
        reversal_mask=mask,
    )
