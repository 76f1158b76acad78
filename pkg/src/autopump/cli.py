"""Command-line entry point: ``autopump <subcommand> --config <path> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import sys

from .analysis import NumericalFailure
from .config import ConfigError, load_config
from .experiments import COMMANDS
from .topology import GapClosureError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="autopump",
        description="Batch studies of the autonomously pumped spin-fermion ring.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, runner in COMMANDS.items():
        cmd = sub.add_parser(name, help=runner.__doc__.splitlines()[0])
        cmd.add_argument("--config", default=None, help="JSON config file (defaults apply otherwise)")
        cmd.add_argument("--out", default=None, help="output directory (overrides out_dir)")
        cmd.add_argument("--seed", type=int, default=None, help="override base_seed")
        cmd.add_argument("--workers", type=int, default=None, help="override worker count")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg, raw = load_config(args.config)
        if args.seed is not None:
            cfg.base_seed = args.seed
        if args.workers is not None:
            cfg.workers = args.workers
            cfg.validate()
        out_dir = args.out if args.out is not None else cfg.out_dir
        manifest = COMMANDS[args.command](cfg, out_dir, raw_config=raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, GapClosureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    for name in manifest["outputs"]:
        print(f"wrote {out_dir}/{name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
