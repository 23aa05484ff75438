"""Discrete columns made continuous for scaling, and the way back.

The gamma trick adds Beta noise to a natural-number column so it can be
modeled as a gamma variable. The bernoulli trick one-hot expands a
categorical column. Both record what they did so parameters learned on the
expanded columns can be mapped back to the original likelihood.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from src.dataio.frame import ColumnSpec, make_column
from src.expfam.expfam import (
    BERNOULLI,
    GAMMA,
    FamilyKind,
    fit_empirical,
)
from src.utils.errors import (
    InvalidCategoryError,
    InvalidCountError,
    InvalidParameterError,
    LipstdError,
    UsageError,
)

logger = logging.getLogger(__name__)

TRICKS = ("none", "bern", "gamma")
RECORD_TRICKS = ("gamma", "bernoulli_then_gamma", "bernoulli")
DEFAULT_DELTA = 1e-6


@dataclass(frozen=True)
class NoiseConfig:
    beta_a: float = 1.1
    beta_b: float = 30.0
    seed: int = 0

    def __post_init__(self):
        for name in ("beta_a", "beta_b"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive, got {getattr(self, name)}", field=name)
        if self.seed < 0:
            raise InvalidParameterError(f"seed must be non-negative, got {self.seed}", field="seed")

    @property
    def expected(self):
        return self.beta_a / (self.beta_a + self.beta_b)

    def rng(self):
        return np.random.default_rng(self.seed)


@dataclass(frozen=True)
class TrickRecord:
    source_column: str
    trick: str
    group: tuple
    noise: NoiseConfig
    original_family: object
    categories: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "group", tuple(self.group))
        if self.trick not in RECORD_TRICKS:
            raise InvalidParameterError(f"unknown trick {self.trick!r}", field="trick")
        expected = self.original_family.k if self.original_family.kind is FamilyKind.CATEGORICAL else 1
        if len(self.group) != expected:
            raise InvalidParameterError(
                f"{self.original_family} produces {expected} columns, record lists {len(self.group)}", field="group"
            )


################################################ forward ################################################

def beta_noise(noise, n, rng=None):
    """Beta(a, b) draws built from two gamma draws, kept strictly inside (0, 1)."""
    rng = rng if rng is not None else noise.rng()
    first = rng.gamma(noise.beta_a, size=n)
    second = rng.gamma(noise.beta_b, size=n)
    draws = first / (first + second)
    return np.clip(draws, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))


def apply_gamma_trick(column, noise, rng=None):
    """Returns the noised column and its gamma fit; missing values (NaN) stay missing."""
    values = np.asarray(column, dtype=float)
    mask = ~np.isnan(values)
    present = values[mask]
    if np.any(present < 0) or np.any(np.floor(present) != present):
        bad = present[(present < 0) | (np.floor(present) != present)][0]
        raise InvalidCountError(f"gamma trick needs non-negative integers, got {bad}")

    # draws cover every row so a column's stream does not depend on its gaps
    noised = values + beta_noise(noise, len(values), rng)
    noised[~mask] = np.nan
    return noised, fit_empirical(GAMMA, noised, mask)


def apply_bernoulli_trick(column, k):
    """One-hot expansion into a (k, n) array; missing values stay missing in every output."""
    values = np.asarray(column, dtype=float)
    mask = ~np.isnan(values)
    present = values[mask]
    bad = (present < 0) | (present >= k) | (np.floor(present) != present)
    if np.any(bad):
        raise InvalidCategoryError(f"category {present[bad][0]} is outside 0..{k - 1}")

    expanded = np.full((k, len(values)), np.nan)
    codes = values[mask].astype(int)
    expanded[:, mask] = 0.0
    expanded[codes, np.flatnonzero(mask)] = 1.0
    return expanded


def _sub_name(name, index):
    return f"{name}#{index}"


def _gamma_column(values, noise, rng, name, source):
    noised, _ = apply_gamma_trick(values, noise, rng)
    sub_spec = ColumnSpec(name=name, kind="positive_real", family=GAMMA, source=source)
    return make_column(sub_spec, noised)


def expand_column(column, trick, noise, rng):
    """Columns and the trick record produced for one source column."""
    spec = column.spec
    kind = spec.family.kind
    if trick == "none" or spec.family.is_continuous:
        return [column], None
    if trick == "bern" and kind is not FamilyKind.CATEGORICAL:
        return [column], None

    if kind is FamilyKind.CATEGORICAL:
        k = spec.family.k
        names = [_sub_name(spec.name, index) for index in range(k)]
        expanded = apply_bernoulli_trick(column.values, k)
        if trick == "bern":
            record_trick = "bernoulli"
            columns = [
                make_column(ColumnSpec(name=name, kind="binary", family=BERNOULLI, source=spec.name), values)
                for name, values in zip(names, expanded)
            ]
        else:
            record_trick = "bernoulli_then_gamma"
            columns = [
                _gamma_column(values, noise, rng, name, spec.name) for name, values in zip(names, expanded)
            ]
    else:
        record_trick = "gamma"
        names = [spec.name]
        columns = [_gamma_column(column.values, noise, rng, spec.name, spec.name)]

    record = TrickRecord(spec.name, record_trick, tuple(names), noise, spec.family, spec.categories)
    columns = [replace(sub, spec=replace(sub.spec, trick=record)) for sub in columns]
    logger.debug(f"column '{spec.name}': {record_trick} trick produced {len(columns)} columns")
    return columns, record


def expand_frame(frame, trick, noise):
    """Apply a trick to every discrete column, one child seed per source column."""
    if trick not in TRICKS:
        raise UsageError(f"unknown trick {trick!r}; choose from {', '.join(TRICKS)}")

    children = np.random.SeedSequence(noise.seed).spawn(len(frame.columns))
    columns, records = [], []
    for column, child in zip(frame.columns, children):
        try:
            produced, record = expand_column(column, trick, noise, np.random.default_rng(child))
        except LipstdError as error:
            raise error.with_column(column.spec.name)
        columns.extend(produced)
        if record is not None:
            records.append(record)

    logger.info(f"Applied {trick} trick: {len(frame.columns)} columns became {len(columns)}")
    return frame.with_columns(columns), records


################################################ recovery ################################################

def gamma_mean(gamma_params):
    alpha, beta = gamma_params.values
    return alpha / beta


def recover_bernoulli(gamma_params, noise):
    return min(1.0, max(0.0, gamma_mean(gamma_params) - noise.expected))


def recover_poisson(gamma_params, noise, delta=DEFAULT_DELTA):
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}", field="delta")
    return max(delta, gamma_mean(gamma_params) - noise.expected)


def recover_categorical(per_class_means):
    """Normalized class probabilities and whether the means were all zero."""
    means = np.asarray(per_class_means, dtype=float)
    if len(means) < 2:
        raise InvalidParameterError(f"need at least 2 class means, got {len(means)}", field="per_class_means")
    total = means.sum()
    if total == 0:
        logger.warning("all recovered class means are zero; returning uniform probabilities")
        return np.full(len(means), 1.0 / len(means)), True
    return means / total, False


################################################ simulation ################################################

def bernoulli_grid():
    return np.arange(51) / 50.0


def poisson_grids():
    return np.arange(51, dtype=float), np.arange(51) / 50.0


def end_to_end_recovery_error(kind, param_grid, n, seed, noise=None, delta=DEFAULT_DELTA):
    """Mean |recovered - true| over the grid after draw, noise, gamma fit and recovery."""
    if kind not in ("bernoulli", "poisson"):
        raise UsageError(f"recovery simulation supports bernoulli and poisson, got {kind!r}")
    noise = noise or NoiseConfig(seed=seed)

    errors = []
    for value, child in zip(param_grid, np.random.SeedSequence(seed).spawn(len(param_grid))):
        rng = np.random.default_rng(child)
        if kind == "bernoulli":
            draws = rng.binomial(1, value, n).astype(float)
        else:
            draws = rng.poisson(value, n).astype(float)
        _, gamma_params = apply_gamma_trick(draws, noise, rng)
        if kind == "bernoulli":
            recovered = recover_bernoulli(gamma_params, noise)
        else:
            recovered = recover_poisson(gamma_params, noise, delta)
        errors.append(abs(recovered - value))

    error = float(np.mean(errors))
    logger.info(f"{kind} recovery over {len(param_grid)} cells: mean abs error {error:.4g}")
    return error

