"""Per-column scale factors: Lipschitz standardization and the baseline scalers."""

import math
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import bisect, minimize_scalar

from src.expfam.expfam import (
    FamilyKind,
    fit_empirical,
    to_natural,
    transform_data,
)
from src.smoothness.smoothness import estimate, scaled_smoothness
from src.utils.errors import (
    DegenerateColumnError,
    InfeasibleTargetError,
    InvalidParameterError,
    LipstdError,
    NoRootError,
    UsageError,
)

logger = logging.getLogger(__name__)

METHODS = ("none", "std", "max", "iqr", "lip")
BASELINES = ("std", "max", "iqr")
# methods whose omega is meant to hit the target exactly
SOLVED_METHODS = ("closed_form", "bisection")

MAX_BRACKET_STEPS = 60
MAX_BISECTIONS = 200
OMEGA_TOLERANCE = 1e-12
SEARCH_RANGE = (1e-12, 1e12)
RESIDUAL_TOLERANCE = 1e-8


@dataclass(frozen=True)
class ScalingTarget:
    l_star: float
    alpha: float | None = None
    d_dims: int | None = None

    def __post_init__(self):
        if not (self.l_star > 0 and math.isfinite(self.l_star)):
            raise InvalidParameterError(f"target smoothness must be positive, got {self.l_star}", field="l_star")

    @classmethod
    def from_learning_rate(cls, alpha, d_dims):
        if not alpha > 0:
            raise InvalidParameterError(f"learning rate must be positive, got {alpha}", field="alpha")
        if d_dims < 1:
            raise InvalidParameterError(f"need at least one dimension, got {d_dims}", field="d_dims")
        return cls(l_star=1.0 / (d_dims * alpha), alpha=alpha, d_dims=d_dims)

    def share(self, group_size):
        """Budget for one member of a trick group of the given size."""
        return ScalingTarget(self.l_star / group_size, self.alpha, self.d_dims)


@dataclass(frozen=True)
class ScalingResult:
    omega: float
    achieved: object
    method: str
    residual: float
    target: float
    local: object = None
    warnings: tuple = ()


@dataclass(frozen=True)
class ColumnPlan:
    name: str
    family: object
    scaling_method: str
    omega: float = 1.0
    result: ScalingResult | None = None
    error: LipstdError | None = None
    warnings: tuple = field(default_factory=tuple)

    @property
    def ok(self):
        return self.error is None


################################################ quartic ################################################

def quartic(l1, l2, l_star, omega):
    return ((l2 * omega + l1 + l2) * omega + l1) * omega * omega - l_star


def solve_quartic_positive_root(l1, l2, l_star):
    """Unique positive root of L2 w^4 + (L1 + L2) w^3 + L1 w^2 - L*."""
    if not l1 >= 0:
        raise InvalidParameterError(f"l1 must be non-negative, got {l1}", field="l1")
    if not l2 > 0:
        raise InvalidParameterError(f"l2 must be positive, got {l2}", field="l2")
    if not l_star > 0:
        raise InvalidParameterError(f"l_star must be positive, got {l_star}", field="l_star")

    def q(omega):
        return quartic(l1, l2, l_star, omega)

    low, high = 0.0, 1.0
    while q(high) < 0:
        low, high = high, 2.0 * high
    if q(high) == 0:
        return high
    # the relative tolerance of bisect does the work near tiny roots
    return bisect(q, low, high, xtol=np.finfo(float).tiny, maxiter=MAX_BISECTIONS * 2)


################################################ bracketing ################################################

def _toward(omega, bound):
    if math.isinf(bound):
        return 2.0 * omega
    return bound + (omega - bound) / 2.0


def bracket_root(objective, start, increasing, lower=0.0, upper=math.inf):
    """Walk away from start until the objective changes sign; returns (low, high)."""
    value = objective(start)
    if value == 0:
        return start, start

    # an increasing objective above zero means the root sits below start
    go_down = (value > 0) == increasing
    current = start
    for _ in range(MAX_BRACKET_STEPS):
        step = _toward(current, lower if go_down else upper)
        step_value = objective(step)
        if (step_value > 0) != (value > 0) or step_value == 0:
            return (step, current) if go_down else (current, step)
        current = step
    raise NoRootError(f"no sign change found within {MAX_BRACKET_STEPS} steps from omega={start}")


def bisect_omega(objective, low, high):
    if low == high:
        return low
    try:
        omega, info = bisect(
            objective,
            low,
            high,
            xtol=OMEGA_TOLERANCE * min(1.0, high),
            maxiter=MAX_BISECTIONS,
            full_output=True,
            disp=False,
        )
    except ValueError as e:
        raise NoRootError(f"bisection on [{low}, {high}] failed: {e}")
    if not info.converged:
        raise NoRootError(f"bisection did not converge on [{low}, {high}]")
    return omega


################################################ solving ################################################

def _monotone_branch(family, base):
    """Direction and bounds of the branch of omega -> total scaled smoothness that contains omega = 1."""
    kind = family.kind
    if kind is FamilyKind.INVERSE_GAMMA:
        return False, 0.0, math.inf
    if kind is FamilyKind.INVERSE_GAUSSIAN:
        l1, l2 = base.per_param
        turning = (l2 / l1) ** 0.25
        if turning <= 1.0:
            return True, turning, math.inf
        return False, 0.0, turning
    return True, 0.0, math.inf


def _infimum(family, base):
    """Smallest total reachable by any omega, with the L1 that determines it."""
    kind = family.kind
    l1 = base.per_param[0]
    if kind in (FamilyKind.GAMMA, FamilyKind.INVERSE_GAMMA):
        return l1, l1
    if kind is FamilyKind.INVERSE_GAUSSIAN:
        l2 = base.per_param[1]
        return (math.sqrt(l1) + math.sqrt(l2)) ** 2, l1
    return 0.0, l1


def _check_feasible(family, base, l_star):
    infimum, l1 = _infimum(family, base)
    kind = family.kind
    strict = kind in (FamilyKind.GAMMA, FamilyKind.INVERSE_GAMMA)
    if l_star < infimum or (strict and l_star == infimum):
        raise InfeasibleTargetError(
            f"target {l_star} is not reachable for {family}; scaled smoothness never drops to {infimum}",
            l1=l1,
        )


def bisection_omega(family, base, l_star):
    _check_feasible(family, base, l_star)
    increasing, lower, upper = _monotone_branch(family, base)

    def objective(omega):
        return scaled_smoothness(family, base, omega).total - l_star

    start = min(max(1.0, lower), upper)
    if start in (lower, upper):
        start = _toward(start, upper if start == lower else lower)
    low, high = bracket_root(objective, start, increasing, lower, upper)
    return bisect_omega(objective, low, high)


def closed_form_omega(family, base, l_star):
    kind = family.kind
    if kind is FamilyKind.EXPONENTIAL:
        return math.sqrt(l_star / base.per_param[0])
    if kind is FamilyKind.GAMMA:
        _check_feasible(family, base, l_star)
        l1, l2 = base.per_param
        # root of L2 w^2 + (L1 + L2) w + L1 - L*, written without cancellation
        discriminant = (l1 - l2) ** 2 + 4.0 * l2 * l_star
        return 2.0 * (l_star - l1) / ((l1 + l2) + math.sqrt(discriminant))
    if kind in (FamilyKind.NORMAL, FamilyKind.LOGNORMAL):
        l1, l2 = base.per_param
        return solve_quartic_positive_root(l1, l2, l_star)
    return None


def solve_omega(family, nat, target, force_bisection=False):
    base = estimate(family, nat)
    l_star = target.l_star

    omega = None if force_bisection else closed_form_omega(family, base, l_star)
    method = "closed_form"
    if omega is None:
        omega = bisection_omega(family, base, l_star)
        method = "bisection"

    return _result(family, base, omega, method, l_star)


def minimize_omega(family, base, l_star):
    """Best omega in the search range when the target has no exact solution."""

    def squared_gap(log_omega):
        return (scaled_smoothness(family, base, math.exp(log_omega)).total - l_star) ** 2

    bounds = (math.log(SEARCH_RANGE[0]), math.log(SEARCH_RANGE[1]))
    found = minimize_scalar(squared_gap, bounds=bounds, method="bounded", options={"xatol": 1e-10})
    return math.exp(found.x)


def _result(family, base, omega, method, l_star, warnings=()):
    achieved = scaled_smoothness(family, base, omega)
    local = estimate(family, achieved.at_params)
    residual = abs(achieved.total - l_star)
    if method in SOLVED_METHODS and residual > RESIDUAL_TOLERANCE * max(l_star, 1.0):
        logger.warning(f"{family} solve left residual {residual:.3e} at omega={omega!r}")
    return ScalingResult(
        omega=omega,
        achieved=achieved,
        method=method,
        residual=residual,
        target=l_star,
        local=local,
        warnings=tuple(warnings),
    )


################################################ baselines ################################################

def baseline_omega(method, data, mask=None):
    """1/std, 1/max|x| or 1/iqr of the present values."""
    if method == "none":
        return 1.0
    if method not in BASELINES:
        raise UsageError(f"unknown baseline method {method!r}")

    data = np.asarray(data, dtype=float)
    if mask is None:
        mask = ~np.isnan(data)
    present = data[np.asarray(mask, dtype=bool)]
    if len(present) < 2:
        raise DegenerateColumnError(f"need at least 2 present values, got {len(present)}", statistic=len(present))

    if method == "std":
        statistic = present.std()
    elif method == "max":
        statistic = np.abs(present).max()
    else:
        q1, q3 = np.percentile(present, [25, 75], method="linear")
        statistic = q3 - q1

    if not statistic > 0:
        raise DegenerateColumnError(f"{method} statistic is zero", statistic=float(statistic))
    return 1.0 / float(statistic)


################################################ datasets ################################################

def _group_size(spec):
    record = spec.trick
    if record is None or record.trick != "bernoulli_then_gamma":
        return 1
    return len(record.group)


def plan_column(spec, values, mask, target):
    family = spec.family
    method = spec.scaling_method

    if not family.is_continuous:
        message = f"{family} column left unscaled"
        if method != "none":
            logger.warning(f"column '{spec.name}': {message}")
        return ColumnPlan(spec.name, family, "none", warnings=(message,) if method != "none" else ())

    canon = fit_empirical(family, values, mask)
    nat = to_natural(family, canon)
    column_target = target.share(_group_size(spec))

    if method == "lip":
        try:
            result = solve_omega(family, nat, column_target)
        except InfeasibleTargetError as error:
            base = estimate(family, nat)
            omega = minimize_omega(family, base, column_target.l_star)
            message = f"target {column_target.l_star:.6g} infeasible (L1={error.l1:.6g}); used closest omega"
            logger.warning(f"column '{spec.name}': {message}")
            result = _result(family, base, omega, "minimized", column_target.l_star, warnings=(message,))
    else:
        statistic_data = np.log(values) if family.kind is FamilyKind.LOGNORMAL else values
        omega = baseline_omega(method, statistic_data, mask)
        base = estimate(family, nat)
        result = _result(family, base, omega, method, column_target.l_star)

    logger.debug(f"column '{spec.name}': {method} omega={result.omega!r} achieved={result.achieved.total!r}")
    return ColumnPlan(spec.name, family, method, result.omega, result, warnings=result.warnings)


def plan_dataset(specs, frame, target):
    """Plan every column; a failing column records its error and the rest still run."""
    plans = []
    for spec in specs:
        column = frame.column(spec.name)
        try:
            plan = plan_column(spec, column.values, column.mask, target)
        except LipstdError as error:
            error.with_column(spec.name)
            logger.error(f"Planning failed: {error}")
            plan = ColumnPlan(spec.name, spec.family, spec.scaling_method, error=error)
        plans.append(plan)

    failed = sum(1 for plan in plans if not plan.ok)
    logger.info(f"Planned {len(plans)} columns ({failed} failed)")
    return plans


def apply_plan(frame, plans):
    """Scale each column by its planned omega; raises the first column error."""
    by_name = {plan.name: plan for plan in plans}
    columns = []
    for column in frame.columns:
        plan = by_name[column.spec.name]
        if not plan.ok:
            raise plan.error
        spec = replace(column.spec, scaling_method=plan.scaling_method, omega=plan.omega)
        values = column.values
        if column.spec.family.is_continuous:
            values = transform_data(column.spec.family, values, plan.omega)
        columns.append(replace(column, spec=spec, values=values))

    logger.info(f"Scaled {len(columns)} columns")
    return frame.with_columns(columns)
