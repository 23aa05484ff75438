"""Synthetic data, per-column gradient-ascent fitting and balance diagnostics.

Every column is fitted on its own natural parameters with one shared step
size, which is the data-dependent part of a model's gradient that scaling
controls. The traces show whether the columns learn at comparable rates.
"""

import os
import math
import logging
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from src.dataio.frame import ColumnSpec, DatasetFrame, kind_of_family, make_column
from src.expfam.expfam import (
    EXPONENTIAL,
    NORMAL,
    CanonicalParams,
    FamilyKind,
    NaturalParams,
    categorical,
    expected_statistics,
    log_base_measure,
    log_partition,
    natural_bounds,
    sample,
    sufficient_statistics,
    to_natural,
)
from src.scaler.scaler import ScalingTarget, apply_plan, plan_dataset
from src.tricks.tricks import NoiseConfig, expand_frame
from src.utils.errors import (
    DegenerateNormalizationError,
    DegenerateRangeError,
    DivergenceError,
    InvalidParameterError,
    MetadataMismatchError,
)

logger = logging.getLogger(__name__)

CONVERGENCE_PER_ROW = 1e-6
PROJECTION_OFFSET = 1e-6

DEMO_ROWS = 10_000
DEMO_SPECS = (
    ("normal", NORMAL, CanonicalParams(NORMAL, (50.0, 100.0**2))),
    ("exponential", EXPONENTIAL, CanonicalParams(EXPONENTIAL, (10.0,))),
    ("categorical", categorical(4), CanonicalParams(categorical(4), (0.1, 0.2, 0.3, 0.4))),
)
DEMO_PIPELINES = (("std", "none"), ("lip", "gamma"))
BASELINE_PIPELINE = "std-none"

# neutral starting points shared by every pipeline
_INITIAL_CANONICAL = {
    FamilyKind.NORMAL: (0.0, 1.0),
    FamilyKind.LOGNORMAL: (0.0, 1.0),
    FamilyKind.GAMMA: (1.0, 1.0),
    FamilyKind.INVERSE_GAUSSIAN: (1.0, 1.0),
    FamilyKind.INVERSE_GAMMA: (1.0, 1.0),
    FamilyKind.EXPONENTIAL: (1.0,),
    FamilyKind.RAYLEIGH: (1.0,),
    FamilyKind.BERNOULLI: (0.5,),
    FamilyKind.POISSON: (1.0,),
}


@dataclass(frozen=True)
class FitTrace:
    names: tuple
    log_likelihood: np.ndarray
    grad_norm: np.ndarray
    iterations_to_converge: tuple
    final: tuple
    n_present: tuple


@dataclass(frozen=True)
class BalanceReport:
    improvement_dispersion: np.ndarray
    gradient_norm_ratio: float
    convergence_spread: float


@dataclass(frozen=True)
class DemoRun:
    label: str
    trace: FitTrace
    report: BalanceReport
    plans: list


################################################ synthetic data ################################################

def generate_synthetic(specs, n_rows, seed, missing_rate=0.0, names=None):
    """Returns (frame with gaps, full truth frame); specs are (Family, CanonicalParams) pairs."""
    if not 0.0 <= missing_rate < 1.0:
        raise InvalidParameterError(f"missing_rate must lie in [0, 1), got {missing_rate}", field="missing_rate")
    names = names or [f"x{index}" for index in range(len(specs))]

    observed, truth = [], []
    for name, (family, canon), child in zip(names, specs, np.random.SeedSequence(seed).spawn(len(specs))):
        rng = np.random.default_rng(child)
        values = sample(family, canon, n_rows, rng)
        missing = rng.random(n_rows) < missing_rate
        categories = tuple(str(code) for code in range(family.k)) if family.k else None
        spec = ColumnSpec(name=name, kind=kind_of_family(family), family=family, categories=categories)
        truth.append(make_column(spec, values))
        observed.append(make_column(spec, values, ~missing))

    return DatasetFrame(observed, n_rows), DatasetFrame(truth, n_rows)


################################################ fitting ################################################

def initial_natural(family):
    if family.kind is FamilyKind.CATEGORICAL:
        return NaturalParams(family, np.zeros(family.n_natural))
    return to_natural(family, CanonicalParams(family, _INITIAL_CANONICAL[family.kind]))


def project(family, eta):
    """Pull components that left the natural domain back inside by a small offset."""
    eta = eta.copy()
    for index, (lower, upper) in enumerate(natural_bounds(family)):
        if lower is not None and not eta[index] > lower:
            eta[index] = lower + PROJECTION_OFFSET
        if upper is not None and not eta[index] < upper:
            eta[index] = upper - PROJECTION_OFFSET
    return eta


def fit_column(column, alpha, iters, initial=None):
    """Gradient ascent on one column; returns (log-likelihoods, gradient norms, final params)."""
    family = column.spec.family
    x = column.present
    n = len(x)
    mean_stats = sufficient_statistics(family, x).mean(axis=0)
    mean_log_base = float(np.mean(log_base_measure(family, x)))

    eta = (initial or initial_natural(family)).array
    log_likelihood = np.empty(iters + 1)
    grad_norm = np.empty(iters + 1)
    for t in range(iters + 1):
        nat = NaturalParams(family, eta)
        mean_grad = mean_stats - expected_statistics(family, nat)
        log_likelihood[t] = n * (mean_log_base + eta @ mean_stats - log_partition(family, nat))
        grad_norm[t] = n * np.abs(mean_grad).sum()
        if not (math.isfinite(log_likelihood[t]) and math.isfinite(grad_norm[t])):
            raise DivergenceError("log-likelihood is not finite", iteration=t, column=column.spec.name)
        if t < iters:
            eta = project(family, eta + alpha * mean_grad)

    return log_likelihood, grad_norm, NaturalParams(family, eta)


def fit_columns(frame, alpha, iters, initial=None):
    """Fit every column from the shared neutral start, or from initial[name] when given."""
    if not alpha > 0:
        raise InvalidParameterError(f"learning rate must be positive, got {alpha}", field="alpha")

    log_likelihoods, grad_norms, converged, finals, counts = [], [], [], [], []
    for column in frame.columns:
        start = (initial or {}).get(column.spec.name)
        log_likelihood, grad_norm, final = fit_column(column, alpha, iters, start)
        threshold = CONVERGENCE_PER_ROW * len(column.present)
        below = np.flatnonzero(grad_norm <= threshold)
        converged.append(int(below[0]) if len(below) else None)
        log_likelihoods.append(log_likelihood)
        grad_norms.append(grad_norm)
        finals.append(final)
        counts.append(len(column.present))
        logger.debug(f"column '{column.spec.name}': converged at {converged[-1]}, final grad {grad_norm[-1]:.3e}")

    logger.info(f"Fitted {len(frame.columns)} columns for {iters} iterations at alpha={alpha}")
    return FitTrace(
        names=tuple(frame.names),
        log_likelihood=np.column_stack(log_likelihoods),
        grad_norm=np.column_stack(grad_norms),
        iterations_to_converge=tuple(converged),
        final=tuple(finals),
        n_present=tuple(counts),
    )


################################################ diagnostics ################################################

def normalized_improvements(trace):
    start = trace.log_likelihood[0]
    for name, value in zip(trace.names, start):
        if value == 0:
            raise DegenerateNormalizationError("initial log-likelihood is zero", column=name)
    return np.diff(trace.log_likelihood, axis=0) / np.abs(start)


def _ratio(values):
    if any(value is None for value in values):
        return math.inf
    largest, smallest = max(values), min(values)
    if largest == smallest:
        return 1.0
    if smallest == 0:
        return math.inf
    return largest / smallest


def balance_report(trace):
    improvements = normalized_improvements(trace)
    if improvements.shape[0]:
        dispersion = np.abs(improvements - improvements.mean(axis=1, keepdims=True)).max(axis=1)
    else:
        dispersion = np.zeros(0)

    return BalanceReport(
        improvement_dispersion=dispersion,
        gradient_norm_ratio=_ratio(list(trace.grad_norm[0])),
        convergence_spread=_ratio(list(trace.iterations_to_converge)),
    )


################################################ imputation ################################################

NOMINAL_KINDS = ("binary", "categorical")


def imputation_metrics(truth, imputed):
    """Per-column error on the cells the imputed frame marks as originally missing, and their mean.

    Numeric columns use the range-normalized root mean squared error, nominal
    columns the misclassification rate.
    """
    if truth.names != imputed.names or truth.n_rows != imputed.n_rows:
        raise MetadataMismatchError("truth and imputed frames are not aligned")

    errors = {}
    for true_column, imputed_column in zip(truth.columns, imputed.columns):
        name = true_column.spec.name
        missing = ~imputed_column.mask
        n_missing = int(missing.sum())
        if n_missing == 0:
            errors[name] = 0.0
            continue
        expected = true_column.values[missing]
        guessed = imputed_column.values[missing]
        if np.any(np.isnan(guessed)):
            raise MetadataMismatchError("imputed frame leaves missing cells empty", column=name)

        if true_column.spec.kind in NOMINAL_KINDS:
            errors[name] = float(np.mean(expected != guessed))
        else:
            spread = np.nanmax(true_column.values) - np.nanmin(true_column.values)
            if spread == 0:
                raise DegenerateRangeError("true column is constant", column=name)
            errors[name] = float(np.linalg.norm(expected - guessed) / (n_missing * spread))

    return errors, float(np.mean(list(errors.values())))


def fill_missing(frame, values_by_name):
    """Frame with every gap filled from values_by_name; the mask still marks the original gaps."""
    columns = []
    for column in frame.columns:
        filled = np.where(column.mask, column.values, values_by_name[column.spec.name])
        columns.append(replace(column, values=filled))
    return frame.with_columns(columns)


################################################ demo ################################################

def run_demo(method, trick, alpha, iters, seed, n_rows=DEMO_ROWS, specs=DEMO_SPECS):
    names = [name for name, _, _ in specs]
    frame, _ = generate_synthetic([(family, canon) for _, family, canon in specs], n_rows, seed, names=names)
    target = ScalingTarget.from_learning_rate(alpha, len(frame.columns))

    expanded, _ = expand_frame(frame, trick, NoiseConfig(seed=seed))
    plans = plan_dataset([replace(spec, scaling_method=method) for spec in expanded.specs], expanded, target)
    scaled = apply_plan(expanded, plans)

    trace = fit_columns(scaled, alpha, iters)
    report = balance_report(trace)
    label = f"{method}-{trick}"
    logger.info(
        f"{label}: gradient ratio {report.gradient_norm_ratio:.4g}, convergence spread {report.convergence_spread:.4g}"
    )
    return DemoRun(label, trace, report, plans)


def write_trace(trace, path, delimiter=","):
    table = {"t": np.arange(trace.log_likelihood.shape[0])}
    for index, name in enumerate(trace.names):
        table[f"{name}_loglik"] = trace.log_likelihood[:, index]
        table[f"{name}_grad_norm"] = trace.grad_norm[:, index]
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    pd.DataFrame(table).to_csv(path, sep=delimiter, index=False, float_format="%.17g")


def _dispersion_t0(run):
    dispersion = run.report.improvement_dispersion
    return float(dispersion[0]) if len(dispersion) else 0.0


def report_table(runs):
    """One row per pipeline.

    dispersion_t0_below_std compares each run's t=0 dispersion with the
    std-none run; it is empty for that run and when no std-none run is given.
    """
    baseline = next((run for run in runs if run.label == BASELINE_PIPELINE), None)
    rows = []
    for run in runs:
        dispersion = run.report.improvement_dispersion
        below = None
        if baseline is not None and run is not baseline:
            below = _dispersion_t0(run) < _dispersion_t0(baseline)
        rows.append(
            {
                "pipeline": run.label,
                "gradient_norm_ratio": run.report.gradient_norm_ratio,
                "convergence_spread": run.report.convergence_spread,
                "dispersion_t0": _dispersion_t0(run),
                "dispersion_t0_below_std": below,
                "max_dispersion": float(dispersion.max()) if len(dispersion) else 0.0,
                "converged": all(step is not None for step in run.trace.iterations_to_converge),
            }
        )
    return pd.DataFrame(rows)


def write_report(runs, path, delimiter=","):
    """Summary rows per pipeline next to a per-iteration dispersion file."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    report_table(runs).to_csv(path, sep=delimiter, index=False, float_format="%.17g")

    root, extension = os.path.splitext(path)
    dispersion = pd.DataFrame({run.label: run.report.improvement_dispersion for run in runs})
    dispersion.insert(0, "t", np.arange(len(dispersion)))
    dispersion.to_csv(f"{root}_dispersion{extension}", sep=delimiter, index=False, float_format="%.17g")
