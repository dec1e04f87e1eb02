"""Command line driver: ``shapig <task> [--config FILE] [--out DIR] [--key value ...]``.

Every :class:`~shapig.experiments.ExperimentConfig` field is also a flag
(``--traj-length 12``, ``--methods zero,sig``). Flags override the config
file. On failure a single JSON object ``{"error": ..., "type": ...}`` is
printed to stderr and the exit status is 2 (bad arguments) or 1.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import experiments as ex

RUNNERS = {
    "gridworld": ex.run_gridworld,
    "sweep": ex.run_sweep,
    "synthimage": ex.run_synthimage,
    "unbiasedness": ex.run_unbiasedness,
    "bench": ex.run_bench,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shapig", description="Shapley baseline attribution experiments")
    sub = parser.add_subparsers(dest="task", required=True, parser_class=_Parser)
    for task in RUNNERS:
        p = sub.add_parser(task)
        p.add_argument("--config", type=Path, help="INI file with [section] key = value lines")
        p.add_argument("--out", type=Path, default=None,
                       help="run directory (default: runs/<task>)")
        p.add_argument("-v", "--verbose", action="store_true")
        for f in dataclasses.fields(ex.ExperimentConfig):
            if f.name == "task":
                continue
            p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=None,
                           metavar="VALUE", help=f"default: {ex._fmt(f.default)}")
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        overrides = {k: v for k, v in vars(args).items()
                     if v is not None and k not in ("config", "out", "verbose")}
        cfg = ex.load_config(args.config, overrides)
    except (UsageError, KeyError, ValueError, OSError) as err:
        _report(err)
        return 2
    try:
        out = args.out or Path("runs") / args.task
        RUNNERS[args.task](cfg, out_dir=out)
    except Exception as err:  # noqa: BLE001 (surface every failure as one JSON line)
        _report(err)
        return 1
    print(json.dumps({"status": "ok", "task": args.task, "out": str(out)}))
    return 0


def _report(err: BaseException):
    msg = err.args[0] if isinstance(err, KeyError) and err.args else str(err)
    print(json.dumps({"error": msg, "type": type(err).__name__}), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
