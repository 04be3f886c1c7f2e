"""Command-line front end.

    mimopam predict|simulate|compare|optimize-power|optimize-goodput
            --config PATH [--out CSV] [--report PATH] [--trials N]
            [--seed S] [--convention energy|direct] [--workers W]

Exit codes: 0 success, 2 config error, 3 solver non-convergence in any row,
4 theory/simulation disagreement flagged in compare mode.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .errors import ConfigError
from .runner import load_config, run, write_outputs
from .system import PowerConvention

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_GATE = 4

_MODE_NAMES = {
    "predict": "predict",
    "simulate": "simulate",
    "compare": "compare",
    "optimize-power": "optimize_power",
    "optimize-goodput": "optimize_goodput",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimopam",
        description="Link-level laboratory for massive-MIMO PAM transmission under imperfect CSI",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for name in _MODE_NAMES:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="flat key=value sweep config")
        p.add_argument("--out", default=None, help="output CSV path (default <mode>.csv)")
        p.add_argument("--report", default=None, help="also write the text report here")
        p.add_argument("--trials", type=int, default=None, help="override trial count")
        p.add_argument("--seed", type=int, default=None, help="override master seed")
        p.add_argument("--convention", choices=("energy", "direct"), default=None,
                       help="override the power convention")
        p.add_argument("--workers", type=int, default=1, help="Monte Carlo worker threads")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_config(args.config)
        if args.trials is not None:
            spec = replace(spec, trials=args.trials)
        if args.seed is not None:
            spec = replace(spec, master_seed=args.seed)
        if args.convention is not None:
            conv = PowerConvention.ENERGY_CONSERVING if args.convention == "energy" \
                else PowerConvention.DIRECT_SPLIT
            spec = replace(spec, base=replace(spec.base, power_convention=conv))
        mode = _MODE_NAMES[args.mode]
        result = run(spec, mode, workers=max(1, args.workers))
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or f"{mode}.csv"
    write_outputs(result, out, args.report)
    print(result.report, end="")
    print(f"wrote {len(result.records)} rows to {out}")
    if result.solver_errors:
        return EXIT_SOLVER
    if mode == "compare" and result.flagged:
        return EXIT_GATE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
