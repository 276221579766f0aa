# mypy: disallow-untyped-defs
from typing import Optional

import argparse
import logging
import sys
from collections.abc import Callable
from collections.abc import Sequence

from radical_jumps.foundation.exceptions import ErrorChainMessage
from radical_jumps.foundation.exceptions import RadicalJumpsError

from ._commands import BenchCommand
from ._commands import ConvergeCommand
from ._commands import RunCommand
from ._config import ConfigurationError
from ._config import ParseConfig
from ._config import RunMethod
from ._config import SimulationConfig
from ._outputs import RunManifest

log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s: %(message)s"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIGURATION = 2

_COMMANDS: dict[str, Callable[[SimulationConfig], RunManifest]] = {
    "run": RunCommand,
    "compare": lambda config: RunCommand(config, RunMethod.COMPARE),
    "converge": ConvergeCommand,
    "bench": BenchCommand,
}

_HELP = {
    "run": "run the method given by run.method (mcwf, me or compare)",
    "compare": "run both methods and report their RMS deviation",
    "converge": "measure the Monte-Carlo error against the master equation over sample sizes",
    "bench": "time both methods while adding protons to the configured system",
}


def BuildParser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radical-jumps",
        description="Spin dynamics of recombining radical pairs by quantum-jump trajectories"
        " and by the master equation.",
    )
    parser.add_argument("--verbose", action="store_true", help="log debug messages")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, text in _HELP.items():
        sub = subparsers.add_parser(name, help=text)
        sub.add_argument("config", help="YAML configuration or a manifest of a previous run")
        sub.add_argument("--seed", type=int, help="override run.master_seed")
        sub.add_argument("--samples", type=int, help="override run.n_samples")
        sub.add_argument("--workers", type=int, help="override run.worker_count")
        sub.add_argument("--out", help="override output.directory")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the ``radical-jumps`` command.

    Returns 0 on success, 2 for an invalid configuration and 1 when a run fails.
    """
    args = BuildParser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT
    )
    try:
        config = ParseConfig(args.config).WithOverrides(
            seed=args.seed, samples=args.samples, workers=args.workers, out=args.out
        )
        log.info("Running %s from %s", args.command, args.config)
        _COMMANDS[args.command](config)
    except ConfigurationError as e:
        print(f"Invalid configuration {args.config}: {e}", file=sys.stderr)
        return EXIT_CONFIGURATION
    except RadicalJumpsError as e:
        print(ErrorChainMessage(e), file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK
