"""Command line entry point.

Exit status: 0 on success, 1 when an estimator fails, 2 for configuration or
data problems.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import pipeline
from .errors import DataError, TradeIVError

COMMANDS = {
    "estimate": pipeline.cmd_estimate,
    "supply": pipeline.cmd_supply,
    "shares": pipeline.cmd_shares,
    "select-instruments": pipeline.cmd_select_instruments,
    "simulate": pipeline.cmd_simulate,
    "mc": pipeline.cmd_mc,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="tradeiv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key = value configuration file")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--bandwidth", type=int, help="HAC maximum lag")
        p.add_argument("--k", type=int, help="instruments per partner currency")
        if name in ("simulate", "mc"):
            p.add_argument("--seed", type=int, help="master seed")
        if name == "mc":
            p.add_argument("--reps", type=int, help="number of replications")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    overrides = {
        "out": args.out,
        "bandwidth": args.bandwidth,
        "k": args.k,
        "seed": getattr(args, "seed", None),
        "reps": getattr(args, "reps", None),
    }
    try:
        cfg = pipeline.parse_config(args.config, **overrides)
        result = COMMANDS[args.command](cfg)
    except DataError as exc:
        print(f"error [{type(exc).__module__}.{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2
    except TradeIVError as exc:
        print(f"estimation failed [{type(exc).__module__}.{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1

    if isinstance(result, str):
        print(result, end="")
    elif hasattr(result, "to_dict") and args.command == "mc":
        est = result.estimates
        print(json.dumps({k: v["mean"] for k, v in est.items()}, indent=2))
    elif hasattr(result, "to_string"):
        print(result.to_string(index=False))
    else:
        print(json.dumps(result, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
