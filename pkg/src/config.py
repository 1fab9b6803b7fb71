import logging
import os
from dataclasses import dataclass

from src.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass(frozen=True)
class Settings:
    """Process-level defaults; everything run-specific comes from CLI flags."""

    log_level: str = "WARNING"
    jobs: int = 1
    root_refine_bits: int = 32

    @classmethod
    def from_env(cls) -> "Settings":
        """
        Build settings from the environment.

        Call ``load_dotenv()`` first if a ``.env`` file should be honoured.
        """
        log_level = os.getenv("RBS_LOG_LEVEL", cls.log_level).upper()
        if not isinstance(logging.getLevelName(log_level), int):
            raise ConfigurationError(f"RBS_LOG_LEVEL: unknown level {log_level!r}")

        jobs = _int_from_env("RBS_JOBS", cls.jobs, minimum=1)
        bits = _int_from_env("RBS_ROOT_REFINE_BITS", cls.root_refine_bits, minimum=1)
        return cls(log_level=log_level, jobs=jobs, root_refine_bits=bits)


def _int_from_env(name: str, default: int, minimum: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigurationError(f"{name}: expected an integer, got {raw!r}") from e
    if value < minimum:
        raise ConfigurationError(f"{name}: must be >= {minimum}, got {value}")
    return value


def configure_logging(level: str) -> None:
    """Install the single stream handler used by the command-line tool."""
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logger.debug(f"Logging configured at {level}")
