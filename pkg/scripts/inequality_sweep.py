#!/usr/bin/env python3
"""Sweep the three operator inequalities over a tau ladder and print spreads."""

import argparse

from gevreylab import (
    DualFrequency,
    OperatorParams,
    check_apriori,
    check_scaling_inequality,
    check_weight_inequality,
    probe_family,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=1)
    ap.add_argument("--q", type=int, default=2)
    ap.add_argument("--taus", type=float, nargs="+",
                    default=[1.0, 10.0, 100.0, 1000.0, 10000.0])
    args = ap.parse_args()

    params = OperatorParams(args.p, args.q)
    probes = probe_family()

    print("a-priori ratio, max over probe family:")
    ratios = []
    for mag in args.taus:
        tau = DualFrequency(0.0, mag)
        r = max(check_apriori(g, tau, params) for g in probes)
        ratios.append(r)
        print(f"  tau2 = {mag:>8g}: max ratio {r:.4f}")
    print(f"  spread x{max(ratios) / min(ratios):.3f}")

    print("pointwise weight bound, sup over x and direction:")
    sups = [check_weight_inequality(params, [mag]) for mag in args.taus]
    for mag, s in zip(args.taus, sups):
        print(f"  |tau| = {mag:>8g}: sup ratio {s:.4f}")
    print(f"  spread x{max(sups) / min(sups):.3f}")

    print("scaling inequality, worst lhs/rhs over probes:")
    for m in sorted({params.p, params.q}):
        worst = max(
            (lambda pair: pair[0] / pair[1])(check_scaling_inequality(g, lam, m))
            for lam in args.taus
            for g in probes
        )
        print(f"  m = {m}: worst lhs/rhs {worst:.6f} (<= 1 means it holds)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
