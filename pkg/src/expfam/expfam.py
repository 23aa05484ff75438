"""Exponential-family likelihoods in natural-parameter form.

Every family is written as p(x; η) = h(x) exp[ηᵀT(x) - A(η)]. The continuous
families also carry the law by which their natural parameters move when the
data is rescaled: T_i(x̃) = f_i(ω) T_i(x) + g_i(ω), so η̃_i = η_i / f_i(ω).
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.expfam.special import digamma, log_gamma
from src.utils.errors import (
    DegenerateColumnError,
    InvalidParameterError,
    InvalidScaleError,
    SupportError,
    UnsupportedFamilyError,
)

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
SIMPLEX_TOLERANCE = 1e-12


class FamilyKind(str, Enum):
    NORMAL = "normal"
    LOGNORMAL = "lognormal"
    GAMMA = "gamma"
    INVERSE_GAUSSIAN = "inverse_gaussian"
    INVERSE_GAMMA = "inverse_gamma"
    EXPONENTIAL = "exponential"
    RAYLEIGH = "rayleigh"
    BERNOULLI = "bernoulli"
    POISSON = "poisson"
    CATEGORICAL = "categorical"


CONTINUOUS_KINDS = (
    FamilyKind.NORMAL,
    FamilyKind.LOGNORMAL,
    FamilyKind.GAMMA,
    FamilyKind.INVERSE_GAUSSIAN,
    FamilyKind.INVERSE_GAMMA,
    FamilyKind.EXPONENTIAL,
    FamilyKind.RAYLEIGH,
)

_PARAM_NAMES = {
    FamilyKind.NORMAL: ("mu", "sigma2"),
    FamilyKind.LOGNORMAL: ("mu", "sigma2"),
    FamilyKind.GAMMA: ("alpha", "beta"),
    FamilyKind.INVERSE_GAUSSIAN: ("mu", "lam"),
    FamilyKind.INVERSE_GAMMA: ("alpha", "beta"),
    FamilyKind.EXPONENTIAL: ("lam",),
    FamilyKind.RAYLEIGH: ("sigma",),
    FamilyKind.BERNOULLI: ("p",),
    FamilyKind.POISSON: ("lam",),
}


@dataclass(frozen=True)
class Family:
    kind: FamilyKind
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        if self.kind is FamilyKind.CATEGORICAL:
            if self.k is None or int(self.k) != self.k or self.k < 2:
                raise InvalidParameterError(f"categorical family needs K >= 2, got {self.k}", field="k")
            object.__setattr__(self, "k", int(self.k))
        elif self.k is not None:
            raise InvalidParameterError(f"{self.kind.value} does not take K", field="k")

    @property
    def is_continuous(self):
        return self.kind in CONTINUOUS_KINDS

    @property
    def n_natural(self):
        if self.kind is FamilyKind.CATEGORICAL:
            return self.k - 1
        return len(_PARAM_NAMES[self.kind])

    @property
    def param_names(self):
        if self.kind is FamilyKind.CATEGORICAL:
            return tuple(f"pi_{index}" for index in range(self.k))
        return _PARAM_NAMES[self.kind]

    @classmethod
    def parse(cls, text):
        text = text.strip().lower()
        if text.startswith("categorical"):
            inside = text[len("categorical"):].strip("() ")
            if not inside.isdigit():
                raise InvalidParameterError(f"categorical family needs an integer K: {text!r}", field="k")
            return cls(FamilyKind.CATEGORICAL, int(inside))
        try:
            return cls(FamilyKind(text))
        except ValueError:
            raise InvalidParameterError(f"unknown family {text!r}", field="family")

    def __str__(self):
        if self.kind is FamilyKind.CATEGORICAL:
            return f"categorical({self.k})"
        return self.kind.value


NORMAL = Family(FamilyKind.NORMAL)
LOGNORMAL = Family(FamilyKind.LOGNORMAL)
GAMMA = Family(FamilyKind.GAMMA)
INVERSE_GAUSSIAN = Family(FamilyKind.INVERSE_GAUSSIAN)
INVERSE_GAMMA = Family(FamilyKind.INVERSE_GAMMA)
EXPONENTIAL = Family(FamilyKind.EXPONENTIAL)
RAYLEIGH = Family(FamilyKind.RAYLEIGH)
BERNOULLI = Family(FamilyKind.BERNOULLI)
POISSON = Family(FamilyKind.POISSON)


def categorical(k):
    return Family(FamilyKind.CATEGORICAL, k)


@dataclass(frozen=True)
class CanonicalParams:
    family: Family
    values: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in np.ravel(self.values))
        if len(values) != len(self.family.param_names):
            raise InvalidParameterError(
                f"{self.family} takes {len(self.family.param_names)} parameters, got {len(values)}",
                field="values",
            )
        object.__setattr__(self, "values", values)

    @property
    def array(self):
        return np.array(self.values)

    def as_dict(self):
        return dict(zip(self.family.param_names, self.values))

    def __getitem__(self, name):
        return self.as_dict()[name]


@dataclass(frozen=True)
class NaturalParams:
    family: Family
    values: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in np.ravel(self.values))
        if len(values) != self.family.n_natural:
            raise InvalidParameterError(
                f"{self.family} has {self.family.n_natural} natural parameters, got {len(values)}",
                field="values",
            )
        object.__setattr__(self, "values", values)

    @property
    def array(self):
        return np.array(self.values)


@dataclass(frozen=True)
class ScalingLaw:
    f: tuple
    g: tuple
    data_transform: str

    def factors(self, omega):
        return np.array([fn(omega) for fn in self.f])

    def offsets(self, omega):
        return np.array([fn(omega) for fn in self.g])


################################################ scaling laws ################################################

def _one(_):
    return 1.0


def _zero(_):
    return 0.0


def _identity(omega):
    return omega


def _square(omega):
    return omega * omega


def _reciprocal(omega):
    return 1.0 / omega


_SCALING_LAWS = {
    FamilyKind.NORMAL: ScalingLaw((_identity, _square), (_zero, _zero), "linear"),
    FamilyKind.LOGNORMAL: ScalingLaw((_identity, _square), (_zero, _zero), "power"),
    FamilyKind.GAMMA: ScalingLaw((_one, _identity), (math.log, _zero), "linear"),
    FamilyKind.INVERSE_GAUSSIAN: ScalingLaw((_identity, _reciprocal), (_zero, _zero), "linear"),
    FamilyKind.INVERSE_GAMMA: ScalingLaw((_one, _reciprocal), (math.log, _zero), "linear"),
    FamilyKind.EXPONENTIAL: ScalingLaw((_identity,), (_zero,), "linear"),
    FamilyKind.RAYLEIGH: ScalingLaw((_square,), (_zero,), "linear"),
}


def scaling_law(family):
    if not family.is_continuous:
        raise UnsupportedFamilyError(f"{family} has no scaling law; convert it with a trick first")
    return _SCALING_LAWS[family.kind]


def _check_omega(omega):
    if not (omega > 0 and math.isfinite(omega)):
        raise InvalidScaleError(f"scale factor must be a finite positive number, got {omega}", omega=omega)


def scale_natural(family, nat, omega):
    _check_omega(omega)
    law = scaling_law(family)
    return NaturalParams(family, nat.array / law.factors(omega))


def unscale_natural(family, nat_scaled, omega):
    _check_omega(omega)
    law = scaling_law(family)
    return NaturalParams(family, nat_scaled.array * law.factors(omega))


def transform_data(family, data, omega):
    """Rescale present values (NaN marks missing): ωx, or x^ω for the log-normal."""
    _check_omega(omega)
    law = scaling_law(family)
    data = np.asarray(data, dtype=float)

    if law.data_transform == "power":
        present = data[~np.isnan(data)]
        if np.any(present <= 0):
            raise SupportError("log-normal data must be strictly positive to apply x^omega")
        return np.power(data, omega)
    return data * omega


################################################ supports ################################################

def _support_violation(family, x):
    """Return a boolean mask of present values outside the family support."""
    kind = family.kind
    if kind is FamilyKind.NORMAL:
        return ~np.isfinite(x)
    if kind is FamilyKind.EXPONENTIAL:
        return ~(x >= 0) | ~np.isfinite(x)
    if kind in CONTINUOUS_KINDS:
        return ~(x > 0) | ~np.isfinite(x)
    if kind is FamilyKind.BERNOULLI:
        return ~((x == 0) | (x == 1))
    if kind is FamilyKind.POISSON:
        return ~((x >= 0) & (np.floor(x) == x))
    return ~((x >= 0) & (x < family.k) & (np.floor(x) == x))


def check_support(family, values):
    values = np.asarray(values, dtype=float)
    bad = _support_violation(family, values)
    if np.any(bad):
        first = values[bad][0]
        raise SupportError(f"value {first} lies outside the support of {family}")


################################################ parameter maps ################################################

def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise InvalidParameterError(f"{name} must be finite and positive, got {value}", field=name)


def _finite(name, value):
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value}", field=name)


def check_canonical(canon):
    family = canon.family
    kind = family.kind
    params = canon.as_dict()

    if kind in (FamilyKind.NORMAL, FamilyKind.LOGNORMAL):
        _finite("mu", params["mu"])
        _positive("sigma2", params["sigma2"])
    elif kind is FamilyKind.BERNOULLI:
        p = params["p"]
        if not 0.0 <= p <= 1.0:
            raise InvalidParameterError(f"p must lie in [0, 1], got {p}", field="p")
    elif kind is FamilyKind.CATEGORICAL:
        pi = canon.array
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > SIMPLEX_TOLERANCE:
            raise InvalidParameterError(f"pi must lie on the simplex, got {list(pi)}", field="pi")
    else:
        for name, value in params.items():
            _positive(name, value)


_NATURAL_BOUNDS = {
    FamilyKind.NORMAL: ((None, None), (None, 0.0)),
    FamilyKind.LOGNORMAL: ((None, None), (None, 0.0)),
    FamilyKind.GAMMA: ((-1.0, None), (None, 0.0)),
    FamilyKind.INVERSE_GAUSSIAN: ((None, 0.0), (None, 0.0)),
    FamilyKind.INVERSE_GAMMA: ((None, -1.0), (None, 0.0)),
    FamilyKind.EXPONENTIAL: ((None, 0.0),),
    FamilyKind.RAYLEIGH: ((None, 0.0),),
}


def natural_bounds(family):
    """(lower, upper) of the open natural domain per component; None is unbounded."""
    return _NATURAL_BOUNDS.get(family.kind, ((None, None),) * family.n_natural)


def check_natural(nat):
    family = nat.family
    kind = family.kind
    eta = nat.values
    for index, value in enumerate(eta):
        _finite(f"eta_{index + 1}", value)

    def below(index, bound):
        if not eta[index] < bound:
            raise InvalidParameterError(
                f"eta_{index + 1} must be < {bound} for {family}, got {eta[index]}", field=f"eta_{index + 1}"
            )

    if kind in (FamilyKind.NORMAL, FamilyKind.LOGNORMAL):
        below(1, 0.0)
    elif kind is FamilyKind.GAMMA:
        if not eta[0] > -1.0:
            raise InvalidParameterError(f"eta_1 must be > -1 for gamma, got {eta[0]}", field="eta_1")
        below(1, 0.0)
    elif kind is FamilyKind.INVERSE_GAUSSIAN:
        below(0, 0.0)
        below(1, 0.0)
    elif kind is FamilyKind.INVERSE_GAMMA:
        below(0, -1.0)
        below(1, 0.0)
    elif kind in (FamilyKind.EXPONENTIAL, FamilyKind.RAYLEIGH):
        below(0, 0.0)


def to_natural(family, canon):
    if canon.family != family:
        raise InvalidParameterError(f"parameters belong to {canon.family}, not {family}", field="family")
    check_canonical(canon)
    kind = family.kind
    theta = canon.values

    if kind in (FamilyKind.NORMAL, FamilyKind.LOGNORMAL):
        mu, sigma2 = theta
        eta = (mu / sigma2, -0.5 / sigma2)
    elif kind is FamilyKind.GAMMA:
        alpha, beta = theta
        eta = (alpha - 1.0, -beta)
    elif kind is FamilyKind.INVERSE_GAUSSIAN:
        mu, lam = theta
        eta = (-lam / (2.0 * mu * mu), -lam / 2.0)
    elif kind is FamilyKind.INVERSE_GAMMA:
        alpha, beta = theta
        eta = (-alpha - 1.0, -beta)
    elif kind is FamilyKind.EXPONENTIAL:
        eta = (-theta[0],)
    elif kind is FamilyKind.RAYLEIGH:
        eta = (-1.0 / (theta[0] * theta[0]),)
    elif kind is FamilyKind.BERNOULLI:
        p = theta[0]
        if p in (0.0, 1.0):
            raise InvalidParameterError(f"p = {p} has no finite natural parameter", field="p")
        eta = (math.log(p / (1.0 - p)),)
    elif kind is FamilyKind.POISSON:
        eta = (math.log(theta[0]),)
    else:
        pi = canon.array
        if np.any(pi == 0):
            raise InvalidParameterError("a zero class probability has no finite natural parameter", field="pi")
        eta = tuple(np.log(pi[:-1] / pi[-1]))
    return NaturalParams(family, eta)


def from_natural(family, nat):
    if nat.family != family:
        raise InvalidParameterError(f"parameters belong to {nat.family}, not {family}", field="family")
    check_natural(nat)
    kind = family.kind
    eta = nat.values

    if kind in (FamilyKind.NORMAL, FamilyKind.LOGNORMAL):
        theta = (-eta[0] / (2.0 * eta[1]), -0.5 / eta[1])
    elif kind is FamilyKind.GAMMA:
        theta = (eta[0] + 1.0, -eta[1])
    elif kind is FamilyKind.INVERSE_GAUSSIAN:
        theta = (math.sqrt(eta[1] / eta[0]), -2.0 * eta[1])
    elif kind is FamilyKind.INVERSE_GAMMA:
        theta = (-eta[0] - 1.0, -eta[1])
    elif kind is FamilyKind.EXPONENTIAL:
        theta = (-eta[0],)
    elif kind is FamilyKind.RAYLEIGH:
        theta = (math.sqrt(-1.0 / eta[0]),)
    elif kind is FamilyKind.BERNOULLI:
        theta = (1.0 / (1.0 + math.exp(-eta[0])),)
    elif kind is FamilyKind.POISSON:
        theta = (math.exp(eta[0]),)
    else:
        theta = tuple(_softmax_with_reference(nat.array))
    return CanonicalParams(family, theta)


def _softmax_with_reference(eta):
    logits = np.append(eta, 0.0)
    logits = logits - logits.max()
    weights = np.exp(logits)
    return weights / weights.sum()


################################################ densities ################################################

def sufficient_statistics(family, x):
    """T(x) as an array of shape (n, I); a scalar x gives shape (I,)."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    kind = family.kind

    if kind is FamilyKind.NORMAL:
        stats = np.column_stack([x, x * x])
    elif kind is FamilyKind.LOGNORMAL:
        log_x = np.log(x)
        stats = np.column_stack([log_x, log_x * log_x])
    elif kind is FamilyKind.GAMMA:
        stats = np.column_stack([np.log(x), x])
    elif kind is FamilyKind.INVERSE_GAUSSIAN:
        stats = np.column_stack([x, 1.0 / x])
    elif kind is FamilyKind.INVERSE_GAMMA:
        stats = np.column_stack([np.log(x), 1.0 / x])
    elif kind is FamilyKind.RAYLEIGH:
        stats = (0.5 * x * x).reshape(-1, 1)
    elif kind is FamilyKind.CATEGORICAL:
        codes = x.astype(int)
        stats = np.zeros((len(x), family.k - 1))
        rows = np.flatnonzero(codes < family.k - 1)
        stats[rows, codes[rows]] = 1.0
    else:
        stats = x.reshape(-1, 1)
    return stats[0] if scalar else stats


def log_base_measure(family, x):
    x = np.asarray(x, dtype=float)
    kind = family.kind

    if kind is FamilyKind.NORMAL:
        return np.full_like(x, -HALF_LOG_2PI)
    if kind is FamilyKind.LOGNORMAL:
        return -np.log(x) - HALF_LOG_2PI
    if kind is FamilyKind.INVERSE_GAUSSIAN:
        return -HALF_LOG_2PI - 1.5 * np.log(x)
    if kind is FamilyKind.RAYLEIGH:
        return np.log(x)
    if kind is FamilyKind.POISSON:
        return -np.vectorize(log_gamma, otypes=[float])(x + 1.0)
    return np.zeros_like(x)


def log_partition(family, nat):
    kind = family.kind
    eta = nat.values

    if kind in (FamilyKind.NORMAL, FamilyKind.LOGNORMAL):
        return -eta[0] * eta[0] / (4.0 * eta[1]) - 0.5 * math.log(-2.0 * eta[1])
    if kind is FamilyKind.GAMMA:
        return log_gamma(eta[0] + 1.0) - (eta[0] + 1.0) * math.log(-eta[1])
    if kind is FamilyKind.INVERSE_GAUSSIAN:
        return -2.0 * math.sqrt(eta[0] * eta[1]) - 0.5 * math.log(-2.0 * eta[1])
    if kind is FamilyKind.INVERSE_GAMMA:
        return log_gamma(-eta[0] - 1.0) + (eta[0] + 1.0) * math.log(-eta[1])
    if kind in (FamilyKind.EXPONENTIAL, FamilyKind.RAYLEIGH):
        return -math.log(-eta[0])
    if kind is FamilyKind.BERNOULLI:
        return float(np.logaddexp(0.0, eta[0]))
    if kind is FamilyKind.POISSON:
        return math.exp(eta[0])
    return float(np.logaddexp.reduce(np.append(nat.array, 0.0)))


def expected_statistics(family, nat):
    """E[T(x)] = ∇A(η), the mean parameters."""
    kind = family.kind
    eta = nat.values

    if kind in (FamilyKind.NORMAL, FamilyKind.LOGNORMAL):
        mu, sigma2 = -eta[0] / (2.0 * eta[1]), -0.5 / eta[1]
        return np.array([mu, mu * mu + sigma2])
    if kind is FamilyKind.GAMMA:
        alpha, beta = eta[0] + 1.0, -eta[1]
        return np.array([digamma(alpha) - math.log(beta), alpha / beta])
    if kind is FamilyKind.INVERSE_GAUSSIAN:
        mu, lam = math.sqrt(eta[1] / eta[0]), -2.0 * eta[1]
        return np.array([mu, 1.0 / mu + 1.0 / lam])
    if kind is FamilyKind.INVERSE_GAMMA:
        alpha, beta = -eta[0] - 1.0, -eta[1]
        return np.array([math.log(beta) - digamma(alpha), alpha / beta])
    if kind in (FamilyKind.EXPONENTIAL, FamilyKind.RAYLEIGH):
        return np.array([-1.0 / eta[0]])
    if kind is FamilyKind.BERNOULLI:
        return np.array([1.0 / (1.0 + math.exp(-eta[0]))])
    if kind is FamilyKind.POISSON:
        return np.array([math.exp(eta[0])])
    return _softmax_with_reference(nat.array)[:-1]


def log_pdf(family, nat, x):
    check_natural(nat)
    check_support(family, [x])
    stats = sufficient_statistics(family, x)
    return float(log_base_measure(family, x) + stats @ nat.array - log_partition(family, nat))


################################################ fitting ################################################

def _present_values(data, mask):
    data = np.asarray(data, dtype=float)
    if mask is None:
        mask = ~np.isnan(data)
    mask = np.asarray(mask, dtype=bool)
    return data[mask]


def gamma_shape(mean, mean_log):
    """Closed-form shape estimate from s = log(mean) - mean(log x)."""
    s = math.log(mean) - mean_log
    if not s > 0:
        raise DegenerateColumnError("gamma shape statistic must be positive (data is constant)", statistic=s)
    return (3.0 - s + math.sqrt((s - 3.0) ** 2 + 24.0 * s)) / (12.0 * s)


def fit_empirical(family, data, mask=None):
    x = _present_values(data, mask)
    if len(x) < 2:
        raise DegenerateColumnError(f"need at least 2 present values to fit {family}, got {len(x)}", statistic=len(x))
    check_support(family, x)
    kind = family.kind

    if kind in (FamilyKind.NORMAL, FamilyKind.LOGNORMAL):
        values = np.log(x) if kind is FamilyKind.LOGNORMAL else x
        mu = values.mean()
        variance = np.mean((values - mu) ** 2)
        if not variance > 0:
            raise DegenerateColumnError("zero variance", statistic=float(variance))
        theta = (mu, variance)
    elif kind is FamilyKind.EXPONENTIAL:
        mean = x.mean()
        if not mean > 0:
            raise DegenerateColumnError("zero mean", statistic=float(mean))
        theta = (1.0 / mean,)
    elif kind is FamilyKind.RAYLEIGH:
        theta = (math.sqrt(np.mean(x * x) / 2.0),)
    elif kind is FamilyKind.INVERSE_GAUSSIAN:
        mean = x.mean()
        spread = np.mean(1.0 / x) - 1.0 / mean
        if not spread > 0:
            raise DegenerateColumnError("mean(1/x) - 1/mean(x) must be positive", statistic=float(spread))
        theta = (mean, 1.0 / spread)
    elif kind is FamilyKind.GAMMA:
        mean = x.mean()
        alpha = gamma_shape(mean, np.log(x).mean())
        theta = (alpha, alpha / mean)
    elif kind is FamilyKind.INVERSE_GAMMA:
        inverse = 1.0 / x
        mean = inverse.mean()
        alpha = gamma_shape(mean, np.log(inverse).mean())
        theta = (alpha, alpha / mean)
    elif kind in (FamilyKind.BERNOULLI, FamilyKind.POISSON):
        mean = x.mean()
        if kind is FamilyKind.POISSON and not mean > 0:
            raise DegenerateColumnError("all counts are zero", statistic=float(mean))
        theta = (mean,)
    else:
        counts = np.bincount(x.astype(int), minlength=family.k)
        theta = tuple(counts / counts.sum())
    return CanonicalParams(family, theta)


def family_variance(family, canon):
    """Variance under the model (of log x for the log-normal)."""
    kind = family.kind
    theta = canon.values

    if kind in (FamilyKind.NORMAL, FamilyKind.LOGNORMAL):
        return theta[1]
    if kind is FamilyKind.GAMMA:
        return theta[0] / theta[1] ** 2
    if kind is FamilyKind.INVERSE_GAUSSIAN:
        return theta[0] ** 3 / theta[1]
    if kind is FamilyKind.INVERSE_GAMMA:
        alpha, beta = theta
        if not alpha > 2:
            raise InvalidParameterError(f"inverse gamma variance needs alpha > 2, got {alpha}", field="alpha")
        return beta * beta / ((alpha - 1.0) ** 2 * (alpha - 2.0))
    if kind is FamilyKind.EXPONENTIAL:
        return 1.0 / theta[0] ** 2
    if kind is FamilyKind.RAYLEIGH:
        return (4.0 - math.pi) / 2.0 * theta[0] ** 2
    raise UnsupportedFamilyError(f"no standardizing variance for {family}")


################################################ sampling ################################################

def sample(family, canon, n, rng):
    check_canonical(canon)
    kind = family.kind
    theta = canon.values

    if kind is FamilyKind.NORMAL:
        return rng.normal(theta[0], math.sqrt(theta[1]), n)
    if kind is FamilyKind.LOGNORMAL:
        return rng.lognormal(theta[0], math.sqrt(theta[1]), n)
    if kind is FamilyKind.GAMMA:
        return rng.gamma(theta[0], 1.0 / theta[1], n)
    if kind is FamilyKind.INVERSE_GAUSSIAN:
        return rng.wald(theta[0], theta[1], n)
    if kind is FamilyKind.INVERSE_GAMMA:
        return 1.0 / rng.gamma(theta[0], 1.0 / theta[1], n)
    if kind is FamilyKind.EXPONENTIAL:
        return rng.exponential(1.0 / theta[0], n)
    if kind is FamilyKind.RAYLEIGH:
        return rng.rayleigh(theta[0], n)
    if kind is FamilyKind.BERNOULLI:
        return rng.binomial(1, theta[0], n).astype(float)
    if kind is FamilyKind.POISSON:
        return rng.poisson(theta[0], n).astype(float)
    return rng.choice(family.k, size=n, p=canon.array).astype(float)
