import logging
from argparse import Namespace
from typing import Callable

from src.config import Settings
from src.exceptions import (
    ArtifactError,
    ConfigurationError,
    InvalidDensityError,
    NumericError,
    RbsError,
    UsageError,
)
from src.handlers.command_handler import (
    EXIT_FAILURE,
    EXIT_IO,
    EXIT_USAGE,
    CommandResult,
    cmd_demo_variance,
    cmd_embed,
    cmd_sample,
    cmd_stats,
    cmd_verify_gr,
)

logger = logging.getLogger(__name__)

Handler = Callable[[Namespace, Settings], CommandResult]


class BalancedSamplingToolkit:
    def __init__(self, settings: Settings):
        """Initialize the toolkit with process-level settings."""
        self.settings = settings
        self.handlers: dict[str, Handler] = {}

    def error_handler(self, command: str, error: Exception) -> CommandResult:
        """Map an exception raised by a command to its exit code."""
        if isinstance(error, (UsageError, ConfigurationError, InvalidDensityError)):
            code = EXIT_USAGE
        elif isinstance(error, ArtifactError):
            code = EXIT_IO
        elif isinstance(error, (NumericError, RbsError)):
            code = EXIT_FAILURE
        elif isinstance(error, OSError):
            code = EXIT_IO
        else:
            raise error
        logger.error(f"{command} failed: {error}")
        return CommandResult(code, {"error": str(error), "type": type(error).__name__})

    def setup_handlers(self) -> None:
        """Register the subcommand handlers."""
        self.handlers = {
            "sample": cmd_sample,
            "verify-gr": cmd_verify_gr,
            "stats": cmd_stats,
            "demo-variance": cmd_demo_variance,
            "embed": cmd_embed,
        }

    def run(self, command: str, args: Namespace) -> CommandResult:
        if not self.handlers:
            self.setup_handlers()
        handler = self.handlers.get(command)
        if handler is None:
            return CommandResult(EXIT_USAGE, {"error": f"unknown command {command!r}"})
        logger.debug(f"Running {command} with {vars(args)}")
        try:
            return handler(args, self.settings)
        except Exception as e:
            return self.error_handler(command, e)
