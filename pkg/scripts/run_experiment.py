#!/usr/bin/env python3
"""
Entry point script for federated Newton-sketch experiments.

Verbs:
    run              run the configured algorithm for every seed and write traces
    sweep-k          mean final gap of FedNS over a list of sketch sizes
    effdim           effective dimension at w0 and the sketch sizes it suggests
    validate-config  check a config file without computing anything

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.
"""
import argparse
import logging
import os
import sys

from dotenv import load_dotenv

# Add the project root to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from src.constants import (
    DEFAULT_OUTPUT_DIR,
    ENV_LOG_LEVEL,
    ENV_OUTPUT_DIR,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
)
from src.errors import FedSketchError
from src.experiment import (
    estimate_effective_dimension,
    load_config,
    run_experiment,
    sweep_sketch_size,
)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

# Configure logging
logging.basicConfig(
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s", level=logging.INFO
)
logger = logging.getLogger(__name__)


def int_list(text: str) -> list[int]:
    """Parses '1,2,3' or '1-10' (inclusive range)."""
    values = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            start, end = part.split("-", 1)
            values.extend(range(int(start), int(end) + 1))
        else:
            values.append(int(part))
    if not values:
        raise argparse.ArgumentTypeError(f"Empty list: {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Run federated Newton-sketch experiments (FedNewton, FedNS, FedNDES, FedAvg)"
    )
    parser.add_argument(
        "verb",
        choices=["run", "sweep-k", "effdim", "validate-config"],
        help="What to do with the config",
    )
    parser.add_argument("--config", type=str, required=True, help="Path to the JSON experiment config")
    parser.add_argument(
        "--out",
        type=str,
        default=None,
        help=f"Output directory (default: config 'output', ${ENV_OUTPUT_DIR}, "
        f"or {DEFAULT_OUTPUT_DIR}/<name>)",
    )
    parser.add_argument("--seeds", type=int_list, default=None, help="Seeds overriding the config, e.g. 1-10")
    parser.add_argument("--threads", type=int, default=1, help="Seeds run concurrently (default: 1)")
    parser.add_argument(
        "--k-values", type=int_list, default=None, help="Sketch sizes for sweep-k, e.g. 5,10,20,40"
    )
    parser.add_argument(
        "--env-file", type=str, default=".env", help="Path to the .env file (default: .env)"
    )
    parser.add_argument(
        "--log-level",
        type=str,
        default=None,
        choices=LOG_LEVELS,
        help=f"Set the logging level (default: ${ENV_LOG_LEVEL} or INFO)",
    )
    return parser


def resolve_out_dir(args, config) -> str:
    if args.out:
        return args.out
    if config.output:
        return config.output
    base = os.environ.get(ENV_OUTPUT_DIR, DEFAULT_OUTPUT_DIR)
    return os.path.join(base, config.name)


def main(argv: list[str] | None = None) -> int:
    """Runs one CLI invocation and returns its exit code."""
    args = build_parser().parse_args(argv)

    # Load environment variables (ambient defaults only)
    env_path = os.path.abspath(args.env_file)
    if os.path.exists(env_path):
        load_dotenv(dotenv_path=env_path)
        logger.debug(f"Loaded environment variables from {env_path}")

    level = args.log_level or os.environ.get(ENV_LOG_LEVEL, "INFO").upper()
    if level not in LOG_LEVELS:
        logger.warning(f"Ignoring invalid {ENV_LOG_LEVEL}={level!r}")
        level = "INFO"
    logging.getLogger().setLevel(getattr(logging, level))

    if args.threads < 1:
        logger.error(f"--threads must be at least 1, got {args.threads}")
        return EXIT_CONFIG_ERROR

    try:
        config = load_config(args.config)
        if args.verb == "validate-config":
            print(f"{args.config}: valid (hash {config.config_hash()})")
            return EXIT_OK

        if args.verb == "effdim":
            print(estimate_effective_dimension(config).format())
            return EXIT_OK

        out_dir = resolve_out_dir(args, config)
        if args.verb == "run":
            result = run_experiment(config, out_dir, seeds=args.seeds, threads=args.threads)
            logger.info(f"Wrote {len(result.files)} files to {out_dir}")
        else:
            summary = sweep_sketch_size(config, args.k_values, out_dir, seeds=args.seeds, threads=args.threads)
            for row in summary:
                print(f"k={row['sketch_size']}: mean final gap {row['mean_final_gap']:.3e}")
        return EXIT_OK
    except FedSketchError as e:
        logger.error(f"{type(e).__name__}: {e}", exc_info=True)
        return e.exit_code


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Experiment stopped by user")
        sys.exit(1)
