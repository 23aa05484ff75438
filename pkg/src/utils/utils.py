import os
import logging
from dataclasses import dataclass
from dotenv import load_dotenv

from src.utils.errors import UsageError

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


@dataclass(frozen=True)
class Settings:
    seed: int
    alpha: float
    log_level: str
    delimiter: str


def get_settings():
    # load .env defaults, real environment wins
    load_dotenv()

    seed = _read_env("LIPSTD_SEED", "0", int)
    alpha = _read_env("LIPSTD_ALPHA", "1e-3", float)
    log_level = os.getenv("LIPSTD_LOG_LEVEL", "INFO").upper()
    delimiter = os.getenv("LIPSTD_DELIMITER", ",")

    if seed < 0:
        raise UsageError(f"LIPSTD_SEED must be non-negative, got {seed}")
    if not alpha > 0:
        raise UsageError(f"LIPSTD_ALPHA must be positive, got {alpha}")
    # getLevelNamesMapping is 3.11+; fall back to the same mapping on older Pythons
    level_names = getattr(logging, "getLevelNamesMapping", lambda: dict(logging._nameToLevel))()
    if log_level not in level_names:
        raise UsageError(f"LIPSTD_LOG_LEVEL is not a logging level: {log_level}")

    return Settings(seed=seed, alpha=alpha, log_level=log_level, delimiter=delimiter)


def _read_env(name, default, cast):
    raw = os.getenv(name, default)
    try:
        return cast(raw)
    except ValueError:
        raise UsageError(f"{name} could not be read as {cast.__name__}: {raw!r}")


def configure_logging(level="INFO"):
    logging.basicConfig(level=level, format=LOG_FORMAT)
