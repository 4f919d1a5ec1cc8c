#!/usr/bin/env python3
"""Print the growth ladder s*(N) for one exponent pair.

The interesting part is watching s*(N) creep toward q/p as N grows:
the gap closes like 1/log N, which is why the ladder spans decades.
"""

import argparse

import numpy as np

from gevreylab import (
    OperatorParams,
    estimate_optimal_exponent,
    growth_table,
    select_k,
    solve_nonlinear_eigen,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=int, default=1)
    ap.add_argument("--q", type=int, default=2)
    ap.add_argument("--decades", type=int, default=5,
                    help="ladder runs N = 10^2 .. 10^(1+decades)")
    args = ap.parse_args()

    params = OperatorParams(args.p, args.q)
    pairs = solve_nonlinear_eigen(params)
    if not pairs:
        print(f"no admissible profiles for (p, q) = ({args.p}, {args.q})")
        return 0
    pair = pairs[0]
    print(f"profile: z = {pair.z:.9f}, residual {pair.residual:.2e}")

    ladder = [10 ** (2 + j) for j in range(args.decades)]
    k = select_k(pair)
    print(f"{'N':>9} {'lambda':>12} {'log_lhs':>14} {'log_sup':>14} {'s*':>9}")
    for row in growth_table(pair, params, k, ladder):
        print(f"{row.N:>9d} {row.lam:>12.4g} {row.log_lhs:>14.4f} "
              f"{row.log_sup:>14.4f} {row.s_star:>9.5f}")

    s0 = estimate_optimal_exponent(pair, params, ladder)
    print(f"extrapolated: s0 = {s0:.5f}  (q/p = {params.optimal_order:.5f}, "
          f"gap {abs(s0 - params.optimal_order):.2e})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
