#!/usr/bin/env python3
"""Tabulate the weak-threshold curves alpha_w(beta) for both sign regimes.

Solves the fundamental characterization equation on a beta grid, reports the
general and signed curves side by side, and (optionally) re-evaluates the
closed-form upper/lower alpha bounds at a nonzero slack epsilon to show how
the two-sided sandwich collapses onto the threshold curve as the slack
vanishes.

    python3 scripts/threshold_curves.py --points 19 --svg curves.svg
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from l1weak.cli import emit_csv, emit_svg
from l1weak.threshold import EpsilonSet, Regime, alpha_bound, solve_theta


def parse_args(argv=None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--beta-min", type=float, default=0.05)
    parser.add_argument("--beta-max", type=float, default=0.95)
    parser.add_argument("--points", type=int, default=19)
    parser.add_argument(
        "--eps",
        type=float,
        default=0.0,
        help="concentration slack applied to every epsilon parameter "
        "(0 collapses upper and lower bounds onto alpha_w)",
    )
    parser.add_argument("--out", type=Path, help="write the table as CSV")
    parser.add_argument("--svg", type=Path, help="write both curves as an SVG chart")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    if args.points < 2:
        print("need at least 2 grid points", file=sys.stderr)
        return 2
    step = (args.beta_max - args.beta_min) / (args.points - 1)
    betas = [args.beta_min + i * step for i in range(args.points)]
    eps = EpsilonSet(
        eps1_c=args.eps, eps2_c=args.eps, eps1_m=args.eps,
        eps3_m=args.eps, eps1_g=args.eps, eps3_g=args.eps, eps5_g=args.eps,
    )

    header = ["beta", "alpha_general", "alpha_signed", "gen_lower", "gen_upper"]
    rows = []
    for beta in betas:
        theta_gen = solve_theta(Regime.GENERAL, beta)
        theta_sgn = solve_theta(Regime.SIGNED, beta)
        lower = alpha_bound(Regime.GENERAL, "lower", beta, theta_gen, eps)
        upper = alpha_bound(Regime.GENERAL, "upper", beta, theta_gen, eps)
        rows.append([beta, theta_gen, theta_sgn, lower, upper])

    print(f"{'beta':>6} {'alpha_w (general)':>18} {'alpha_w (signed)':>17} "
          f"{'lower@eps':>12} {'upper@eps':>12}")
    for beta, gen, sgn, lo, up in rows:
        print(f"{beta:6.3f} {gen:18.12f} {sgn:17.12f} {lo:12.8f} {up:12.8f}")

    if args.out:
        args.out.write_text(emit_csv(header, rows))
        print(f"wrote {args.out}", file=sys.stderr)
    if args.svg:
        curve = [(beta, gen) for beta, gen, *_ in rows]
        args.svg.write_text(emit_svg(curve))
        print(f"wrote {args.svg}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
