"""Main entry point for the heomkit package."""
import argparse
import logging
import logging.handlers
import sys
from pathlib import Path
from typing import List, Optional

from heomkit.config import Config
from heomkit.core.errors import ConfigError, NumericalError
from heomkit.scripts.compare import run_compare
from heomkit.scripts.decompose import run_decompose
from heomkit.scripts.propagate import run_propagate
from heomkit.scripts.scan_modes import run_scan_modes
from heomkit.scripts.verify_mpo import run_verify_mpo

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2


def configure_logging(config: Config) -> None:
    """Configure the root logger from the logging section."""
    settings = config.logging
    root = logging.getLogger()
    root.setLevel(str(settings.get("level", "INFO")).upper())
    formatter = logging.Formatter(settings.get("format", "%(asctime)s - %(name)s - %(levelname)s - %(message)s"))
    for handler in list(root.handlers):
        root.removeHandler(handler)
    console = logging.StreamHandler()
    console.setFormatter(formatter)
    root.addHandler(console)

    file_settings = settings.get("handlers", {}).get("file", {})
    if file_settings.get("enabled"):
        path = Path(file_settings["path"])
        path.parent.mkdir(parents=True, exist_ok=True)
        handler = logging.handlers.RotatingFileHandler(
            path,
            maxBytes=int(file_settings.get("max_bytes", 10485760)),
            backupCount=int(file_settings.get("backup_count", 5)),
        )
        handler.setFormatter(formatter)
        root.addHandler(handler)


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog="heomkit",
        description="Open quantum system dynamics from free-pole bath decompositions",
    )
    parser.add_argument("--config", type=str, help="Path to the run configuration file")
    parser.add_argument("--out", type=str, help="Output directory (overrides output.directory)")
    parser.add_argument("--seed", type=int, help="Master seed for stochastic methods")
    parser.add_argument("--threads", type=int, help="Worker threads for ensembles and scans")
    parser.add_argument("--tolerance", type=float, help="Comparison or verification tolerance")

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("decompose", help="Fit the bath correlation with exponential modes")
    commands.add_parser("propagate", help="Propagate the reduced dynamics with the configured method")
    compare = commands.add_parser("compare", help="Compare trajectory files or run configurations")
    compare.add_argument("inputs", nargs="*", help="Trajectory CSV or run configuration files")
    commands.add_parser("scan-modes", help="Scan the mode count against omega_min")
    commands.add_parser("verify-mpo", help="Check the MPO generator against the dense oracle")
    return parser.parse_args(argv)


def run(args: argparse.Namespace, config: Config) -> int:
    """Dispatch one subcommand; returns its exit code."""
    if args.command == "decompose":
        run_decompose(config)
    elif args.command == "propagate":
        path = run_propagate(config, args.seed, args.threads, args.tolerance)
        logger.info(f"Trajectory written to {path}")
    elif args.command == "compare":
        run_compare(config, args.inputs, args.tolerance, args.seed, args.threads)
    elif args.command == "scan-modes":
        run_scan_modes(config, args.threads)
    elif args.command == "verify-mpo":
        report, path = run_verify_mpo(config, args.tolerance)
        if not report["passed"]:
            logger.error(f"MPO verification failed, see {path}")
            return EXIT_NUMERICAL
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Execute one subcommand.

    Returns:
        int: Exit code (0 for success, 1 for a numerical failure, 2 for a
        configuration error)
    """
    args = parse_args(argv)
    try:
        config = Config(args.config) if args.config else Config()
        if args.out:
            config.set("output.directory", args.out)
        configure_logging(config)
        return run(args, config)
    except (ConfigError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {str(e)}")
        return EXIT_CONFIG
    except NumericalError as e:
        logger.error(f"{args.command} failed: {str(e)}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
