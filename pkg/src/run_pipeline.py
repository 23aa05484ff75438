import logging
from dataclasses import dataclass, replace

from src.dataio.dataio import build_metadata, read_csv, write_scaled
from src.scaler.scaler import ScalingTarget, apply_plan, plan_dataset
from src.tricks.tricks import NoiseConfig, expand_frame
from src.utils.errors import LipstdError, UsageError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineOutcome:
    frame: object
    expanded: object
    plans: list
    target: ScalingTarget
    records: list
    scaled: object = None
    metadata: object = None

    @property
    def errors(self):
        return [plan.error for plan in self.plans if not plan.ok]


def check_discrete(frame, method, trick, allow_unscaled_discrete):
    discrete = [column.spec.name for column in frame.columns if not column.spec.family.is_continuous]
    if method == "lip" and trick == "none" and discrete and not allow_unscaled_discrete:
        raise UsageError(
            f"discrete columns {', '.join(discrete)} cannot be Lipschitz-scaled without a trick; "
            "choose --trick gamma or pass --allow-unscaled-discrete"
        )


def run_pipeline(config):
    """Read, apply tricks, plan, scale and write; returns the PipelineOutcome.

    Nothing is written when any column fails to plan.
    """
    logger.info("--- Starting Scaling Pipeline ---")

    try:
        frame = read_csv(config.input_path, config.hints, config.delimiter)
    except LipstdError as e:
        logger.error(f"Reading failed: {e}")
        raise

    try:
        check_discrete(frame, config.method, config.trick, config.allow_unscaled_discrete)
        expanded, records = expand_frame(frame, config.trick, NoiseConfig(seed=config.seed))
    except LipstdError as e:
        logger.error(f"Tricks failed: {e}")
        raise

    target = ScalingTarget.from_learning_rate(config.alpha, len(frame.columns))
    specs = [replace(spec, scaling_method=config.method) for spec in expanded.specs]
    plans = plan_dataset(specs, expanded, target)
    outcome = PipelineOutcome(frame, expanded, plans, target, records)
    if outcome.errors:
        logger.error(f"Planning failed for {len(outcome.errors)} columns, nothing written")
        return outcome

    try:
        scaled = apply_plan(expanded, plans)
        metadata = build_metadata(scaled, plans, records, target, config.method, config.trick)
        write_scaled(scaled, metadata, config.out_path, config.meta_path, config.delimiter)
    except LipstdError as e:
        logger.error(f"Writing failed: {e}")
        raise

    logger.info("--- Pipeline Finished ---")
    return replace(outcome, scaled=scaled, metadata=metadata)
