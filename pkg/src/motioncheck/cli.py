"""Command line entry point: per-stage subcommands plus end-to-end run.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .config import load_config
from .errors import MotionCheckError
from .pipeline import (
    run_all,
    run_discrepancy,
    run_eval,
    run_flowlabel,
    run_fuse,
    run_transfer,
)
from .server import serve

PROTOCOL_ALIASES = {"all": "all", "both": "both", "table1": "all", "table2": "both"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="INI config file; flags override it")
    sub.add_argument("--data-root", help="sequence input directory")
    sub.add_argument("--out-root", help="output directory")
    sub.add_argument("--jobs", type=int, default=1, help="parallel frames")
    sub.add_argument("--max-range", type=float, dest="max_range_m")
    sub.add_argument("--range-metric", choices=["norm3d", "xy"])
    sub.add_argument("--fov", choices=["on", "off"])
    sub.add_argument("--ground", choices=["mask", "ransac", "off", "auto"])
    sub.add_argument("--downsample", type=int)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--class-table", dest="class_table")


def build_parser() -> _Parser:
    parser = _Parser(prog="motioncheck", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("fuse", "fuse semantic and supervised motion labels"),
        ("flowlabel", "derive predictive motion labels from scene flow"),
        ("discrepancy", "compare streams, extract contradiction clusters"),
        ("transfer", "turn 2D anomaly boxes into 3D point labels"),
        ("eval", "score contradictions against anomaly labels"),
        ("all", "run every stage in order"),
    ):
        sub = subs.add_parser(name, help=text)
        _add_common(sub)
        if name == "eval":
            sub.add_argument(
                "--protocol",
                default="all",
                choices=sorted(PROTOCOL_ALIASES),
                help="'all' scores every labeled point, 'both' only doubly-labeled ones",
            )

    sub = subs.add_parser("serve", help="serve flagged scenes to the review console")
    sub.add_argument("--data-root", required=True)
    sub.add_argument("--out-root", required=True)
    sub.add_argument("--verdict-log", default="verdicts.log")
    sub.add_argument("--port", type=int, default=8731)
    sub.add_argument("--host", default="127.0.0.1")
    sub.add_argument("--ui-dir", help="built browser console directory")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        if args.command == "serve":
            serve(
                args.data_root,
                args.out_root,
                args.verdict_log,
                args.port,
                args.host,
                args.ui_dir,
            )
            return 0

        cfg = load_config(
            args.config,
            data_root=args.data_root,
            out_root=args.out_root,
            max_range_m=args.max_range_m,
            range_metric=args.range_metric,
            fov=None if args.fov is None else args.fov == "on",
            ground=args.ground,
            downsample=args.downsample,
            seed=args.seed,
            class_table=args.class_table,
        )
        runner = {
            "fuse": run_fuse,
            "flowlabel": run_flowlabel,
            "discrepancy": run_discrepancy,
            "transfer": run_transfer,
            "all": run_all,
        }
        if args.command == "eval":
            summary = run_eval(cfg, PROTOCOL_ALIASES[args.protocol], args.jobs)
        else:
            summary = runner[args.command](cfg, args.jobs)
        print(json.dumps(summary, indent=2, sort_keys=True))
        return 0
    except MotionCheckError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
