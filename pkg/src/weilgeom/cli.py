"""Command line entry point: ``weilgeom check``."""
from __future__ import annotations

import argparse
import sys

from .errors import ConfigError
from .harness import SUITES, parse_algebra_arg, parse_config, parse_geometry_arg, run_suites


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weilgeom", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    check = sub.add_parser("check", help="run the property suites and report deviations")
    check.add_argument("--config", help="JSON config file (or inline JSON object)")
    check.add_argument("--algebra", help="algebra descriptor: JSON or shorthand like jet(1,2), dual*dual")
    check.add_argument("--geometry", help="geometry descriptor: JSON or preset name like poincare, euclid(3)")
    check.add_argument("--suite", action="append", choices=SUITES + ("all",),
                       help="suite to run; repeatable (default: all)")
    check.add_argument("--samples", type=int, help="random probes per check (default 100)")
    check.add_argument("--tol", type=float, help="absolute tolerance (default 1e-9)")
    check.add_argument("--zero-tol", type=float, help="invertibility threshold on real parts (default 1e-12)")
    check.add_argument("--seed", type=int, help="RNG seed (default $WEILGEOM_SEED, then 42)")
    check.add_argument("--report", choices=("text", "json"), help="report format (default text)")
    check.add_argument("--expect-fail", action="append", metavar="CHECK",
                       help="mark a check as an expected failure (negative control); repeatable")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {
            "algebra": parse_algebra_arg(args.algebra) if args.algebra else None,
            "geometry": parse_geometry_arg(args.geometry) if args.geometry else None,
            "suites": args.suite,
            "samples": args.samples,
            "tol": args.tol,
            "zero_tol": args.zero_tol,
            "seed": args.seed,
            "report": args.report,
            "expect_fail": args.expect_fail,
        }
        cfg = parse_config(args.config, overrides)
        report = run_suites(cfg)
    except ConfigError as exc:
        print(f"weilgeom: config error: {exc}", file=sys.stderr)
        return 2
    print(report.to_json() if cfg.report == "json" else report.to_text())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
