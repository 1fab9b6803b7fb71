import argparse
import json
import logging
import sys

from dotenv import load_dotenv

from src import __version__
from src.app.toolkit import BalancedSamplingToolkit
from src.config import Settings, configure_logging
from src.exceptions import ConfigurationError
from src.handlers.command_handler import EXIT_OK, EXIT_USAGE
from src.services.rng import SEED_BITS
from src.services.sampler_service import METHODS

logger = logging.getLogger(__name__)


def seed_value(text: str) -> int:
    """argparse type for --seed: an unsigned 64-bit integer."""
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= seed < 2**SEED_BITS:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2^{SEED_BITS}), got {seed}")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbs", description="Random balanced samples and Gerow-Robson density checks")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sample = sub.add_parser("sample", help="Draw balanced samples to CSV")
    sample.add_argument("--n", type=int, required=True)
    sample.add_argument("--method", choices=METHODS + ("gr",), default="auto")
    sample.add_argument("--count", type=int, required=True)
    sample.add_argument("--seed", type=seed_value, required=True)
    sample.add_argument("--out", required=True)
    sample.add_argument("--g", help="power:P or poly:c0,c1,... (gr method only)")

    verify = sub.add_parser("verify-gr", help="Classify max-norm densities for a range of n")
    verify.add_argument("--from", dest="from_", type=int, required=True)
    verify.add_argument("--to", type=int, required=True)
    verify.add_argument("--out", required=True)
    verify.add_argument("--jobs", type=int, default=None, help="worker processes (default: RBS_JOBS)")

    stats = sub.add_parser("stats", help="Uniformity, balance and covariance report for a sample CSV")
    stats.add_argument("--in", dest="input", required=True)
    stats.add_argument("--report", required=True)

    demo = sub.add_parser("demo-variance", help="Variance of f-means: i.i.d. against balanced samples")
    demo.add_argument("--n", type=int, required=True)
    demo.add_argument("--fn", required=True, help="poly:c0,c1,...")
    demo.add_argument("--trials", type=int, required=True)
    demo.add_argument("--seed", type=seed_value, required=True)
    demo.add_argument("--method", choices=METHODS + ("gr",), default="auto")
    demo.add_argument("--out")

    embed = sub.add_parser("embed", help="Append model coordinates to a sample CSV")
    embed.add_argument("--in", dest="input", required=True)
    embed.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    try:
        settings = Settings.from_env()
    except ConfigurationError as e:
        sys.stderr.write(f"configuration error: {e}\n")
        return EXIT_USAGE
    configure_logging(settings.log_level)

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    toolkit = BalancedSamplingToolkit(settings)
    toolkit.setup_handlers()
    result = toolkit.run(args.command, args)
    if result.exit_code == EXIT_OK:
        print(json.dumps(result.body, indent=2))
    else:
        sys.stderr.write(f"{args.command}: {result.body.get('error', json.dumps(result.body))}\n")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
