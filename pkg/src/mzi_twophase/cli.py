"""
Command line entry point.

::

    mzi-twophase run fig2|fig3|custom [--config PATH] [--out DIR] [--seed U64] [--threads N]

Exit status: 0 success, 2 configuration error, 3 I/O error, 4 numerical
failure. ``fig2`` and ``fig3`` fall back to the figure defaults when no
config is given; ``custom`` requires one.
"""

import argparse
import logging
import sys

from . import __version__
from .config import fig2_defaults, fig3_defaults, load_config, ScenarioConfig
from .errors import ConfigurationError, MZIError
from .experiments import RUNNERS, write_table
from .plotting import emit_plots

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4

log = logging.getLogger("mzi_twophase")

DEFAULTS = {"fig2": fig2_defaults, "fig3": fig3_defaults, "custom": ScenarioConfig}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="mzi-twophase", description="Two-phase MZI estimation experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="action", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run an experiment and write CSV, metadata and plots")
    run.add_argument("experiment", choices=sorted(RUNNERS))
    run.add_argument("--config", help="TOML scenario file")
    run.add_argument("--out", help="output directory (overrides outputs.directory)")
    run.add_argument("--seed", type=int, help="64-bit seed (overrides run.seed)")
    run.add_argument("--threads", type=int, help="worker processes (overrides run.threads)")
    return parser


def resolve_config(args):
    base = DEFAULTS[args.experiment]()
    if args.config is None:
        if args.experiment == "custom":
            raise ConfigurationError("custom runs need --config", "config")
        config = base
    else:
        config = load_config(args.config, base)
    return config.with_overrides(seed=args.seed, directory=args.out, threads=args.threads)


def run(args):
    config = resolve_config(args)
    log.info("running %s with seed %d", args.experiment, config.run.seed)
    table = RUNNERS[args.experiment](config)
    directory = config.outputs.directory
    paths = list(write_table(table, directory))
    paths += emit_plots(table, directory, config.outputs.formats)
    for path in paths:
        print(path)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return run(args)
    except ConfigurationError as exc:
        print(f"configuration error [{exc.field}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (MZIError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
