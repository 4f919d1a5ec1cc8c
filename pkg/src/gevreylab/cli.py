"""Command-line orchestration for the laboratory pipelines.

Subcommands map one-to-one onto library workflows:

  transform       magnitude ladder of the windowed transform of a bump
  classify        Gevrey order of a generated bump, two estimators
  eigen           profile-equation pencil solve for one (p, q)
  counterexample  kernel family residuals, growth ladder, exponent
  inequalities    weighted-norm ratio sweeps over a tau ladder
  demo            exponent table across several (p, q) pairs

Configuration comes from flags, optionally layered over a plain-text
key=value file (flags win).  Exit codes: 0 success, 2 inconclusive
numerics (rejected fit, derivative order out of range, non-linear
growth ladder), 1 other failures, 64 usage errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from .eigen import (
    GridSpec,
    InconclusiveError,
    default_grid,
    estimate_optimal_exponent,
    growth_table,
    select_k,
    solve_nonlinear_eigen,
    verify_kernel,
)
from .fbi import fbi_field
from .gevrey import (
    FitRejectedError,
    OrderTooHighError,
    estimate_order_derivatives,
    estimate_order_fbi,
    fit_stretched_exponential,
    make_gevrey_bump,
    prune_decay_floor,
)
from .operators import (
    DualFrequency,
    OperatorParams,
    WeightConfig,
    apply_A_tau,
    check_apriori,
    check_scaling_inequality,
    check_weight_inequality,
    htau_norm,
    probe_family,
    scaling_constant,
    trim_invalid,
)
from .reports import (
    eigenpair_summary,
    eigenpair_to_csv,
    emit_report,
    field_to_csv,
    fit_to_dict,
    growth_to_csv,
    write_json,
)

USAGE_EXIT = 64
INCONCLUSIVE_EXIT = 2

_DEFAULT_FREQS = tuple(float(x) for x in np.geomspace(16.0, 1024.0, 24))
_DEFAULT_TAUS = (1.0, 10.0, 100.0, 1000.0, 10000.0)
_DEFAULT_NS = (100, 1000, 10000, 100000, 1000000)
_DEFAULT_PAIRS = ((1, 2), (1, 3), (2, 3), (3, 4))

# One-line description of each pipeline, embedded in every JSON report
# so a report file is self-describing about what produced it.
_PIPELINES = {
    "transform": (
        "windowed transform T_gamma u(x0, xi) over a frequency ladder; "
        "magnitudes fitted to C exp(-delta xi^r)"
    ),
    "classify": (
        "Gevrey order two ways: 1/r from the transform-decay fit "
        "C exp(-delta xi^r), and the slope of log sup|f^(k)| against "
        "k log k near the probe point"
    ),
    "eigen": (
        "staggered-grid pencil (-f'' + x^(2(q-1)) f) = z x^(2(p-1)) f, "
        "shift-invert iteration cross-checked on two spacings"
    ),
    "counterexample": (
        "kernel family exp(i lam t2) exp(lam^(p/q) w t1) f(lam^(1/q) x); "
        "residual checked by separable reduction and by 3d differences, "
        "growth exponent s*(N) extrapolated against 1/log N"
    ),
    "inequalities": (
        "ratio ||f||_(2,tau)^2 / ||A_tau f||_(0,tau)^2 over a probe "
        "family; pointwise bound |tau|^(p/q)(|x|^(p-1)+|x|^(q-1)) <= "
        "C w(x, tau); scaling bound lam^(2/m)||f||^2 <= "
        "C (||f'||^2 + lam^2 int x^(2(m-1)) |f|^2)"
    ),
    "demo": (
        "per (p, q): pencil solve, kernel family, ladder extrapolation "
        "of the growth exponent s*(N) toward the q/p threshold"
    ),
}


class UsageError(ValueError):
    """Malformed flag value or config-file entry."""


def _floats_csv(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc
    if not vals:
        raise UsageError("ladder must not be empty")
    return vals

def _ints_csv(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise UsageError("ladder must not be empty")
    return vals


def _pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected a pair like 1,2 — got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise UsageError(f"expected a pair of integers, got {text!r}") from exc


def _pairs_value(text: str) -> tuple[tuple[int, int], ...]:
    tokens = text.replace(";", " ").split()
    if not tokens:
        raise UsageError("pairs must not be empty")
    return tuple(_pair(tok) for tok in tokens)


_FIELD_PARSERS = {
    "p": int,
    "q": int,
    "gamma": float,
    "order": float,
    "tau_ladder": _floats_csv,
    "freq_ladder": _floats_csv,
    "n_ladder": _ints_csv,
    "grid_x": float,
    "grid_h": float,
    "out": str,
    "seed": int,
    "pairs": _pairs_value,
}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Fully resolved run parameters for one CLI invocation."""

    command: str
    p: int = 1
    q: int = 2
    gamma: float | None = None
    order: float = 2.0
    tau_ladder: tuple[float, ...] = _DEFAULT_TAUS
    freq_ladder: tuple[float, ...] = _DEFAULT_FREQS
    n_ladder: tuple[int, ...] = _DEFAULT_NS
    grid_x: float | None = None
    grid_h: float | None = None
    out: str = "."
    seed: int = 42
    pairs: tuple[tuple[int, int], ...] = _DEFAULT_PAIRS

    def __post_init__(self):
        if self.command not in _PIPELINES:
            raise UsageError(f"unknown command {self.command!r}")
        if not (1 <= self.p <= self.q):
            raise UsageError("need integers 1 <= p <= q")
        if self.gamma is not None and not 0.0 <= self.gamma <= 1.0:
            raise UsageError("gamma must lie in [0, 1]")
        if self.order < 1.0:
            raise UsageError("Gevrey order must be >= 1")
        for name, ladder in (
            ("tau-ladder", self.tau_ladder),
            ("freq-ladder", self.freq_ladder),
            ("n-ladder", self.n_ladder),
        ):
            if any(v <= 0 for v in ladder):
                raise UsageError(f"{name} entries must be positive")
        if self.grid_x is not None and self.grid_x <= 0:
            raise UsageError("grid half-width must be positive")
        if self.grid_h is not None and self.grid_h <= 0:
            raise UsageError("grid spacing must be positive")
        if any(not (1 <= a <= b) for a, b in self.pairs):
            raise UsageError("each pair must satisfy 1 <= p <= q")


def _read_config_file(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def _converted(key: str, text: str):
    parser = _FIELD_PARSERS.get(key)
    if parser is None:
        raise UsageError(f"unknown config key {key!r}")
    try:
        return parser(text)
    except UsageError:
        raise
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for {key}: {text!r}") from exc


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Layer defaults, config-file entries, then explicit flags."""
    merged: dict = {"command": args.command}
    if getattr(args, "config", None):
        for key, text in _read_config_file(args.config).items():
            merged[key] = _converted(key, text)
    for key in _FIELD_PARSERS:
        value = getattr(args, key, None)
        if value is not None:
            if key == "pairs":
                value = tuple(value)
            merged[key] = value
    return RunConfig(**merged)


class _Parser(argparse.ArgumentParser):
    # BSD-style usage exit so scripted callers can tell bad invocations
    # from genuine pipeline failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_EXIT)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gevreylab", description=__doc__.splitlines()[0])
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="FILE",
                        help="key=value file; explicit flags override it")
    shared.add_argument("--p", type=int, help="lower exponent parameter")
    shared.add_argument("--q", type=int, help="upper exponent parameter")
    shared.add_argument("--gamma", type=float,
                        help="window exponent in [0, 1] (default 1/order)")
    shared.add_argument("--order", type=float,
                        help="Gevrey order of the generated bump (default 2)")
    shared.add_argument("--tau-ladder", dest="tau_ladder", type=_floats_csv,
                        metavar="T1,T2,...", help="dual-frequency magnitudes")
    shared.add_argument("--freq-ladder", dest="freq_ladder", type=_floats_csv,
                        metavar="F1,F2,...", help="transform frequency ladder")
    shared.add_argument("--n-ladder", dest="n_ladder", type=_ints_csv,
                        metavar="N1,N2,...", help="growth ladder orders")
    shared.add_argument("--grid-x", dest="grid_x", type=float,
                        help="override the profile grid half-width")
    shared.add_argument("--grid-h", dest="grid_h", type=float,
                        help="override the profile grid spacing")
    shared.add_argument("--out", help="output directory (default .)")
    shared.add_argument("--seed", type=int, help="probe-family seed (default 42)")

    sub = parser.add_subparsers(dest="command", metavar="command",
                                parser_class=_Parser, required=True)
    sub.add_parser("transform", parents=[shared],
                   help="transform magnitude ladder and stretched fit")
    sub.add_parser("classify", parents=[shared],
                   help="Gevrey order of a generated bump")
    sub.add_parser("eigen", parents=[shared],
                   help="profile-equation eigenpairs for one (p, q)")
    sub.add_parser("counterexample", parents=[shared],
                   help="kernel family checks and growth exponent")
    sub.add_parser("inequalities", parents=[shared],
                   help="weighted-norm inequality sweeps")
    demo = sub.add_parser("demo", parents=[shared],
                          help="exponent table across (p, q) pairs")
    demo.add_argument("--pairs", nargs="+", type=_pair, metavar="P,Q",
                      help="pairs like 1,2 2,3 (default 1,2 1,3 2,3 3,4)")
    return parser


def _default_gamma(order: float) -> float:
    return min(1.0, 1.0 / order)


def _probe_point(order: float) -> float:
    # The support edge carries the order-s flatness signature; order-1
    # bumps are hard truncations of an analytic profile, so the center
    # is the right probe there.
    return 0.0 if order == 1.0 else 1.0


def _grid_override(config: RunConfig, params: OperatorParams) -> GridSpec | None:
    if config.grid_x is None and config.grid_h is None:
        return None
    base = default_grid(params)
    return GridSpec(
        half_width=config.grid_x if config.grid_x is not None else base.half_width,
        spacing=config.grid_h if config.grid_h is not None else base.spacing,
    )


def _cmd_transform(config: RunConfig, out: Path) -> int:
    order = config.order
    gamma = config.gamma if config.gamma is not None else _default_gamma(order)
    u = make_gevrey_bump(order)
    x0 = _probe_point(order)
    freqs = np.asarray(config.freq_ladder, dtype=float)
    field = fbi_field(u, [x0], freqs, gamma)
    field_to_csv(field, out / "field.csv")
    kept_f, kept_m = prune_decay_floor(freqs, field.magnitudes()[0])
    fit = fit_stretched_exponential(kept_f, kept_m)
    write_json(
        {
            "pipeline": _PIPELINES["transform"],
            "order": order,
            "gamma": gamma,
            "base_point": x0,
            "fit": fit_to_dict(fit),
        },
        out / "transform.json",
    )
    print(
        f"fitted decay exponent r = {fit.r:.4f} (delta = {fit.delta:.4g}) "
        f"from {fit.n_points} ladder points"
    )
    print(f"wrote {out / 'field.csv'}, {out / 'transform.json'}")
    return 0


def _cmd_classify(config: RunConfig, out: Path) -> int:
    order = config.order
    gamma = config.gamma if config.gamma is not None else _default_gamma(order)
    u = make_gevrey_bump(order)
    x0 = _probe_point(order)
    by_decay = estimate_order_fbi(u, x0, gamma, config.freq_ladder)
    try:
        est = estimate_order_derivatives(u, x0)
        by_derivatives = {
            "order": est.order,
            "degenerate": est.degenerate,
            "n_points": est.n_points,
        }
        deriv_text = f"{est.order:.3f} (derivative growth)"
    except OrderTooHighError as exc:
        # The decay estimate stands on its own; losing the cross-check
        # to stencil noise is worth reporting, not failing over.
        by_derivatives = {"error": str(exc)}
        deriv_text = "unavailable (derivative growth: noise floor)"
    write_json(
        {
            "pipeline": _PIPELINES["classify"],
            "target_order": order,
            "gamma": gamma,
            "base_point": x0,
            "s": by_decay.order,
            "transform_estimate": {
                "order": by_decay.order,
                "fit": fit_to_dict(by_decay.fit),
            },
            "derivative_estimate": by_derivatives,
        },
        out / "classify.json",
    )
    print(
        f"order estimates: {by_decay.order:.3f} (transform decay), "
        f"{deriv_text}; target {order:g}"
    )
    print(f"wrote {out / 'classify.json'}")
    return 0


def _cmd_eigen(config: RunConfig, out: Path) -> int:
    params = OperatorParams(config.p, config.q)
    found = solve_nonlinear_eigen(params, _grid_override(config, params))
    if not found:
        write_json(
            {
                "pipeline": _PIPELINES["eigen"],
                "p": params.p,
                "q": params.q,
                "count": 0,
                "note": "no stable decaying profiles at these parameters",
            },
            out / "eigen.json",
        )
        print(f"no admissible eigenpairs for p={params.p}, q={params.q}")
        return 0
    pair = found[0]
    eigenpair_to_csv(pair, out / "eigenpair.csv")
    summary = eigenpair_summary(pair, params)
    summary["pipeline"] = _PIPELINES["eigen"]
    summary["count"] = len(found)
    summary["all_z"] = [p.z for p in found]
    write_json(summary, out / "eigen.json")
    print(f"z = {pair.z:.9f}, residual {pair.residual:.2e}, "
          f"{len(found)} pair(s) kept")
    print(f"wrote {out / 'eigenpair.csv'}, {out / 'eigen.json'}")
    return 0


def _cmd_counterexample(config: RunConfig, out: Path) -> int:
    params = OperatorParams(config.p, config.q)
    found = solve_nonlinear_eigen(params, _grid_override(config, params))
    if not found:
        write_json(
            {
                "pipeline": _PIPELINES["counterexample"],
                "p": params.p,
                "q": params.q,
                "count": 0,
                "note": "no stable decaying profiles at these parameters",
            },
            out / "counterexample.json",
        )
        print(f"no admissible eigenpairs for p={params.p}, q={params.q}")
        return 0
    pair = found[0]
    residuals = {f"{lam:g}": verify_kernel(pair, lam, params)
                 for lam in (10.0, 100.0)}
    k = select_k(pair)
    rows = growth_table(pair, params, k, config.n_ladder)
    growth_to_csv(rows, out / "growth.csv")
    s0 = estimate_optimal_exponent(
        pair, params, config.n_ladder, expected=params.optimal_order
    )
    write_json(
        {
            "pipeline": _PIPELINES["counterexample"],
            "p": params.p,
            "q": params.q,
            "z": pair.z,
            "probe_order": k,
            "kernel_residuals": residuals,
            "s0_estimate": s0,
            "expected": params.optimal_order,
            "abs_delta": abs(s0 - params.optimal_order),
        },
        out / "counterexample.json",
    )
    print(f"s0 = {s0:.4f} against q/p = {params.optimal_order:.4f} "
          f"(|delta| = {abs(s0 - params.optimal_order):.2e})")
    print(f"wrote {out / 'growth.csv'}, {out / 'counterexample.json'}")
    return 0


def _cmd_inequalities(config: RunConfig, out: Path) -> int:
    params = OperatorParams(config.p, config.q)
    probes = probe_family(seed=config.seed)

    apriori_rows = []
    for rho in (0.0, 0.05, -0.05):
        weights = WeightConfig(rho=rho)
        for mag in config.tau_ladder:
            tau = DualFrequency(0.0, float(mag))
            best_ratio, best_probe = 0.0, probes[0]
            for g in probes:
                ratio = check_apriori(g, tau, params, weights)
                if ratio > best_ratio:
                    best_ratio, best_probe = ratio, g
            num = htau_norm(best_probe, 2, tau, params, weights)
            den = htau_norm(
                trim_invalid(apply_A_tau(best_probe, tau, params)),
                0, tau, params, weights,
            )
            apriori_rows.append([rho, tau.tau1, tau.tau2, best_ratio, num, den])
    emit_report(
        apriori_rows,
        ["rho", "tau1", "tau2", "max_ratio", "h2_norm", "image_norm"],
        out / "apriori.csv",
    )

    weight_rows = [
        [mag, check_weight_inequality(params, [mag])] for mag in config.tau_ladder
    ]
    emit_report(weight_rows, ["tau", "sup_ratio"], out / "weight.csv")

    scaling_rows = []
    for m in sorted({params.p, params.q}):
        for lam in config.tau_ladder:
            worst = (0.0, 0.0, 0.0)
            for g in probes:
                lhs, rhs = check_scaling_inequality(g, lam, m)
                if rhs > 0 and lhs / rhs > worst[0]:
                    worst = (lhs / rhs, lhs, rhs)
            scaling_rows.append([m, lam, worst[1], worst[2], worst[0]])
    emit_report(scaling_rows, ["m", "lam", "lhs", "rhs", "ratio"],
                out / "scaling.csv")

    flat = [row[3] for row in apriori_rows if row[0] == 0.0]
    weight_sups = [row[1] for row in weight_rows]
    write_json(
        {
            "pipeline": _PIPELINES["inequalities"],
            "p": params.p,
            "q": params.q,
            "apriori_spread": max(flat) / min(flat),
            "weight_sup": max(weight_sups),
            "weight_spread": max(weight_sups) / min(weight_sups),
            "scaling_constants": {
                str(m): scaling_constant(m) for m in sorted({params.p, params.q})
            },
            "scaling_max_ratio": max(row[4] for row in scaling_rows),
        },
        out / "inequalities.json",
    )
    print(
        f"apriori spread x{max(flat) / min(flat):.2f}, "
        f"weight sup {max(weight_sups):.4f} "
        f"(spread x{max(weight_sups) / min(weight_sups):.2f}), "
        f"scaling max lhs/rhs {max(r[4] for r in scaling_rows):.4f}"
    )
    print(f"wrote {out / 'apriori.csv'}, {out / 'weight.csv'}, "
          f"{out / 'scaling.csv'}, {out / 'inequalities.json'}")
    return 0


def _cmd_demo(config: RunConfig, out: Path) -> int:
    rows = []
    lines = [f"{'p':>3} {'q':>3} {'q/p':>8} {'s0':>10} {'|delta|':>10}"]
    for p, q in config.pairs:
        params = OperatorParams(p, q)
        target = params.optimal_order
        found = solve_nonlinear_eigen(params)
        if not found:
            rows.append([p, q, target, math.nan, math.nan])
            lines.append(f"{p:>3} {q:>3} {target:>8.4f} {'n/a':>10} {'n/a':>10}")
            continue
        s0 = estimate_optimal_exponent(found[0], params, config.n_ladder)
        rows.append([p, q, target, s0, abs(s0 - target)])
        lines.append(
            f"{p:>3} {q:>3} {target:>8.4f} {s0:>10.4f} {abs(s0 - target):>10.2e}"
        )
    emit_report(rows, ["p", "q", "q_over_p", "s0_estimate", "abs_delta"],
                out / "demo.csv")
    print("\n".join(lines))
    print(f"wrote {out / 'demo.csv'}")
    return 0


_COMMANDS = {
    "transform": _cmd_transform,
    "classify": _cmd_classify,
    "eigen": _cmd_eigen,
    "counterexample": _cmd_counterexample,
    "inequalities": _cmd_inequalities,
    "demo": _cmd_demo,
}


def dispatch(config: RunConfig) -> int:
    """Run the configured pipeline, writing reports under config.out."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return _COMMANDS[config.command](config, out)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    try:
        return dispatch(config)
    except (InconclusiveError, FitRejectedError, OrderTooHighError) as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return INCONCLUSIVE_EXIT
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
