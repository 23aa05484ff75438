"""Local Lipschitz-smoothness of a column log-likelihood in natural parameters.

L_i = sum_j |d2A / d eta_j d eta_i| at the fitted point, 1-norm throughout.
"""

import math
import logging
from dataclasses import dataclass

import numpy as np

from src.expfam.expfam import (
    FamilyKind,
    NaturalParams,
    check_natural,
    expected_statistics,
    family_variance,
    from_natural,
    natural_bounds,
    scale_natural,
    scaling_law,
    to_natural,
)
from src.expfam.special import digamma, log_gamma, trigamma
from src.utils.errors import StepUnderflowError, UnsupportedFamilyError

logger = logging.getLogger(__name__)

RELATIVE_STEP = 1e-4
BOUNDARY_MARGIN = 10.0
MAX_STEP_HALVINGS = 8


@dataclass(frozen=True)
class SmoothnessEstimate:
    per_param: tuple
    total: float
    at_params: NaturalParams

    @classmethod
    def from_constants(cls, constants, at_params):
        per_param = tuple(float(c) for c in constants)
        total = 0.0
        for value in per_param:
            total += value
        return cls(per_param=per_param, total=total, at_params=at_params)


def _require_continuous(family):
    if not family.is_continuous:
        raise UnsupportedFamilyError(f"smoothness of {family} is measured after a trick converts it")


################################################ closed forms ################################################

def estimate(family, nat):
    _require_continuous(family)
    check_natural(nat)
    kind = family.kind
    theta = from_natural(family, nat).values

    if kind in (FamilyKind.NORMAL, FamilyKind.LOGNORMAL):
        mu, sigma2 = theta
        constants = (
            sigma2 + 2.0 * abs(mu) * sigma2,
            2.0 * sigma2 * (abs(mu) + sigma2 + 2.0 * mu * mu),
        )
    elif kind is FamilyKind.GAMMA:
        alpha, beta = theta
        constants = (
            abs(1.0 + (1.0 - alpha) * trigamma(alpha)) + 1.0 / beta,
            alpha / beta**2 + 1.0 / beta,
        )
    elif kind is FamilyKind.INVERSE_GAMMA:
        alpha, beta = theta
        constants = (
            abs(1.0 - (alpha + 1.0) * trigamma(alpha)) + 1.0 / beta,
            1.0 / beta + alpha / beta**2,
        )
    elif kind is FamilyKind.INVERSE_GAUSSIAN:
        mu, lam = theta
        constants = (
            mu**3 / lam + mu / lam,
            mu / lam + (2.0 * mu + lam) / (mu * lam * lam),
        )
    elif kind is FamilyKind.EXPONENTIAL:
        constants = (1.0 / theta[0] ** 2,)
    else:
        constants = (theta[0] ** 4,)

    result = SmoothnessEstimate.from_constants(constants, nat)
    logger.debug(f"{family} smoothness at {nat.values}: {result.per_param}")
    return result


################################################ finite differences ################################################

def smoothness_mean_map(family, eta):
    """The map whose Jacobian the closed forms are built from.

    It is the exact gradient of the log-partition except for the log-statistic
    component of the gamma and inverse-gamma families.
    """
    kind = family.kind
    nat = NaturalParams(family, eta)

    if kind is FamilyKind.GAMMA:
        eta1, eta2 = eta
        alpha = eta1 + 1.0
        first = alpha - math.log(-eta2) + log_gamma(alpha) - eta1 * digamma(alpha)
        return np.array([first, alpha / -eta2])
    if kind is FamilyKind.INVERSE_GAMMA:
        eta1, eta2 = eta
        alpha = -eta1 - 1.0
        first = -eta1 - 1.0 - math.log(-eta2) + log_gamma(alpha) + eta1 * digamma(alpha)
        return np.array([first, alpha / -eta2])
    return expected_statistics(family, nat)


def _initial_steps(family, eta):
    steps = RELATIVE_STEP * np.maximum(np.abs(eta), 1.0)

    def too_close(steps_):
        for index, (lower, upper) in enumerate(natural_bounds(family)):
            for bound in (lower, upper):
                if bound is not None and abs(eta[index] - bound) < BOUNDARY_MARGIN * steps_[index]:
                    return True
        return False

    halvings = 0
    while too_close(steps):
        if halvings == MAX_STEP_HALVINGS:
            raise StepUnderflowError(
                f"{family} parameters {tuple(eta)} are too close to the domain boundary for a finite-difference step"
            )
        steps = steps / 2.0
        halvings += 1
    return steps


def _central_difference(family, eta, index, step):
    forward = eta.copy()
    backward = eta.copy()
    forward[index] += step
    backward[index] -= step
    return (smoothness_mean_map(family, forward) - smoothness_mean_map(family, backward)) / (2.0 * step)


def estimate_fd(family, nat):
    _require_continuous(family)
    check_natural(nat)
    eta = nat.array
    steps = _initial_steps(family, eta)

    jacobian = np.empty((len(eta), len(eta)))
    for j in range(len(eta)):
        coarse = _central_difference(family, eta, j, steps[j])
        fine = _central_difference(family, eta, j, steps[j] / 2.0)
        # Richardson: cancels the h^2 error term
        jacobian[:, j] = (4.0 * fine - coarse) / 3.0

    constants = np.abs(jacobian).sum(axis=1)
    return SmoothnessEstimate.from_constants(constants, nat)


################################################ scaling ################################################

def scaled_smoothness(family, base, omega):
    """Smoothness after scaling by omega: |f_i| * sum_j |f_j| * L_i."""
    law = scaling_law(family)
    factors = np.abs(law.factors(omega))
    constants = factors * factors.sum() * np.array(base.per_param)
    return SmoothnessEstimate.from_constants(constants, scale_natural(family, base.at_params, omega))


def standardizing_omega(family, canon):
    """Scale factor that gives the column unit variance under the model."""
    _require_continuous(family)
    return 1.0 / math.sqrt(family_variance(family, canon))


def smoothness_after_standardization(family, canon):
    omega = standardizing_omega(family, canon)
    nat = scale_natural(family, to_natural(family, canon), omega)
    return estimate(family, nat)
