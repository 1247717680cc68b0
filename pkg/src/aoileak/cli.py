"""Command-line interface.

Subcommands: ``analytic``, ``simulate``, ``leakage``, ``verify``, ``pareto``.
Rows are CSV with a fixed column set. Exit codes: 0 ok, 1 verification
failure, 2 usage or validation error, 3 unstable queue.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Dict, Iterable, List, Optional

from . import __version__
from .checks import SUITES, run_suite
from .core import AoiLeakError, PolicyKind, PolicySpec, RngStream, Unstable, validate_policy
from .leakage import ORACLE_MAX_N, analytic_leakage_rate, maximal_leakage_oracle
from .sim import SimConfig, simulate_aoi
from .tradeoff import SweepSpec, TradeoffPoint, analytic_age, fig_dataset, pareto_sweep

COLUMNS = ["policy", "lambda", "alpha", "mu", "tau", "n", "T", "seed",
           "leakage_rate_nats", "leakage_rate_bits", "age_slots", "age_stderr", "source", "note"]

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_UNSTABLE = 0, 1, 2, 3


def fmt(value) -> str:
    """Absent values are empty; floats carry 9 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.9g}"
    return str(value)


def record(policy: PolicySpec, *, n=None, T=None, seed=None, leakage=None, age=None,
           stderr=None, source="", note="", alpha=None) -> Dict[str, str]:
    row = {
        "policy": policy.kind.value,
        "lambda": policy.lam,
        "alpha": alpha if alpha is not None else policy.alpha,
        "mu": policy.mu,
        "tau": policy.tau,
        "n": n,
        "T": T,
        "seed": seed,
        "leakage_rate_nats": leakage,
        "leakage_rate_bits": None if leakage is None else leakage / math.log(2.0),
        "age_slots": age,
        "age_stderr": stderr,
        "source": source,
        "note": note,
    }
    return {k: fmt(v) for k, v in row.items()}


def write_rows(rows: Iterable[Dict[str, str]], stream, comment: Optional[str] = None) -> None:
    if comment is not None:
        stream.write(f"# {comment}\n")
    w = csv.DictWriter(stream, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)


def read_rows(text: str) -> List[Dict[str, str]]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _policy_from_args(args, need_lam: bool) -> PolicySpec:
    kind = PolicyKind(args.policy)
    alpha = args.alpha
    if kind is PolicyKind.MBT and alpha is None:
        alpha = 1.0
    spec = PolicySpec(kind, lam=args.lam, alpha=alpha, mu=args.mu, tau=args.tau)
    validate_policy(spec)
    if need_lam:
        spec.require_lam()
    return spec


def _add_policy_flags(p: argparse.ArgumentParser, policy_required: bool = True) -> None:
    p.add_argument("--policy", choices=[k.value for k in PolicyKind], required=policy_required,
                   help="server policy")
    p.add_argument("--lambda", dest="lam", type=float, help="Bernoulli arrival rate per slot")
    p.add_argument("--alpha", type=float, help="MBT admission probability (default 1)")
    p.add_argument("--mu", type=float, help="MBT/RAD per-slot service probability")
    p.add_argument("--tau", type=int, help="DAD dump period in slots")


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--slots", type=int, default=10 ** 6, help="horizon T in slots")
    p.add_argument("--warmup", type=int, default=10 ** 4, help="slots discarded before averaging")
    p.add_argument("--seed", type=int, default=0, help="random seed")


def cmd_analytic(args) -> int:
    pol = _policy_from_args(args, need_lam=True)
    rate = analytic_leakage_rate(pol, args.n)
    age = analytic_age(pol)
    write_rows([record(pol, n=args.n, leakage=rate, age=age, source="analytic")], sys.stdout)
    return EXIT_OK


def cmd_simulate(args) -> int:
    pol = _policy_from_args(args, need_lam=True)
    est = simulate_aoi(SimConfig(pol, args.slots, args.warmup, RngStream(args.seed)))
    rate = analytic_leakage_rate(pol)
    write_rows([record(pol, T=args.slots, seed=args.seed, leakage=rate, age=est.mean_age,
                       stderr=est.std_error, source="simulated",
                       note=f"warmup={args.warmup};slots_counted={est.slots_counted}")], sys.stdout)
    return EXIT_OK


def cmd_leakage(args) -> int:
    pol = _policy_from_args(args, need_lam=False)
    mode = args.mode or "both"
    n = args.n
    rows = []
    analytic = analytic_leakage_rate(pol, n)
    oracle = None
    if mode in ("oracle", "both"):
        if n > ORACLE_MAX_N:
            raise AoiLeakError(f"n={n} exceeds oracle cap {ORACLE_MAX_N}")
        rep = maximal_leakage_oracle(pol, n)
        oracle = rep.leakage_rate_nats
        note = f"total_nats={fmt(rep.leakage_nats)};support_size={rep.support_size}"
        if rep.exploratory:
            note += ";alpha<1: exploratory, closed form not claimed"
        if mode == "both":
            note += f";abs_diff={abs(oracle - analytic):.3g}"
        rows.append(record(pol, n=n, leakage=oracle, source="oracle", note=note))
    if mode in ("analytic", "both"):
        note = f"total_nats={fmt(analytic * n)}"
        if mode == "both":
            note += f";abs_diff={abs(oracle - analytic):.3g}"
        rows.append(record(pol, n=n, leakage=analytic, source="analytic", note=note))
    write_rows(rows, sys.stdout)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = run_suite(args.suite)
    failed = 0
    for c in checks:
        print(c.line())
        failed += not c.passed
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def _parse_range(text: str, integer: bool) -> List[float]:
    parts = text.split(":")
    if integer:
        if len(parts) not in (2, 3):
            raise AoiLeakError(f"bad range {text!r}, expected lo:hi[:step]")
        lo, hi = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
        return list(range(lo, hi + 1, step))
    if len(parts) not in (2, 3):
        raise AoiLeakError(f"bad range {text!r}, expected lo:hi[:step]")
    lo, hi = float(parts[0]), float(parts[1])
    step = float(parts[2]) if len(parts) == 3 else 0.01
    count = int(round((hi - lo) / step))
    return [round(lo + i * (hi - lo) / count, 10) for i in range(count + 1)] if count else [lo]


def _point_row(p: TradeoffPoint, sim_T=None, seed=None) -> Dict[str, str]:
    return record(p.policy, leakage=p.leakage_rate_nats, age=p.age_slots, stderr=p.std_error,
                  source=p.source, note=p.note,
                  T=sim_T if p.source == "simulated" else None,
                  seed=seed if p.source == "simulated" else None)


def cmd_pareto(args) -> int:
    if args.figure:
        overrides = {}
        if args.lam is not None:
            overrides["lambdas"] = [args.lam]
        points = fig_dataset(args.figure, overrides)
        params = f"figure={args.figure}" + (f" lambda={args.lam}" if args.lam is not None else "")
        sim_T = seed = None
    else:
        if args.policy is None or args.lam is None:
            raise AoiLeakError("pareto needs --figure, or --policy and --lambda with a range")
        kind = PolicyKind(args.policy)
        if kind is PolicyKind.DAD:
            if not args.tau_range:
                raise AoiLeakError("--tau-range is required for DAD")
            grid = _parse_range(args.tau_range, integer=True)
        else:
            if not args.mu_range:
                raise AoiLeakError("--mu-range is required for MBT and RAD")
            grid = _parse_range(args.mu_range, integer=False)
        overlay = SimConfig(PolicySpec(kind, lam=args.lam), args.slots, args.warmup,
                            RngStream(args.seed)) if args.simulate else None
        spec = SweepSpec(args.lam, kind, grid,
                         alpha=args.alpha if args.alpha is not None else 1.0,
                         optimize_alpha=args.optimize_alpha, sim_overlay=overlay)
        points = pareto_sweep(spec)
        for p in points:
            if p.alpha_star is not None:
                p.note = (p.note + ";" if p.note else "") + "alpha optimized"
        params = (f"policy={args.policy} lambda={args.lam} alpha={args.alpha} "
                  f"mu_range={args.mu_range} tau_range={args.tau_range} "
                  f"optimize_alpha={args.optimize_alpha} simulate={args.simulate}")
        sim_T, seed = (args.slots, args.seed) if args.simulate else (None, None)
        if args.simulate:
            params += f" slots={args.slots} warmup={args.warmup} seed={args.seed}"
    buf = io.StringIO()
    write_rows((_point_row(p, sim_T, seed) for p in points), buf,
               comment=f"aoileak {__version__} pareto {params}")
    try:
        with open(args.out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"wrote {len(points)} rows to {args.out}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aoileak", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"aoileak {__version__}")
    parser.add_argument("--config", help="key=value file supplying defaults; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="closed-form age and leakage rate")
    _add_policy_flags(p)
    p.add_argument("--n", type=int, help="finite horizon for the DAD leakage rate")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", help="Monte Carlo average age")
    _add_policy_flags(p)
    _add_sim_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("leakage", help="exact and/or closed-form maximal leakage")
    _add_policy_flags(p)
    p.add_argument("--n", type=int, required=True, help="sequence length")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--oracle", dest="mode", action="store_const", const="oracle")
    g.add_argument("--analytic", dest="mode", action="store_const", const="analytic")
    g.add_argument("--both", dest="mode", action="store_const", const="both")
    p.set_defaults(func=cmd_leakage)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pareto", help="write an age-vs-leakage dataset as CSV")
    p.add_argument("--figure", choices=["fig2", "fig3", "fig4"])
    _add_policy_flags(p, policy_required=False)
    p.add_argument("--mu-range", help="lo:hi[:step] (default step 0.01)")
    p.add_argument("--tau-range", help="lo:hi[:step], inclusive integers")
    p.add_argument("--optimize-alpha", action="store_true", help="MBT: pick the age-minimising alpha")
    p.add_argument("--simulate", action="store_true", help="add a simulated point per grid value")
    _add_sim_flags(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_pareto)
    return parser


_CONFIG_ALIASES = {"lambda": "lam"}
_STORE_TRUE = {"optimize_alpha", "simulate"}


def _load_config(path: str) -> Dict[str, str]:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise AoiLeakError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            values[_CONFIG_ALIASES.get(key, key)] = val
    return values


def _apply_config(parser: argparse.ArgumentParser, argv: List[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    ns, rest = pre.parse_known_args(argv)
    if ns.config:
        subparsers = parser._subparsers._group_actions[0].choices
        command = next((tok for tok in rest if tok in subparsers), None)
        if command is not None:
            sub = subparsers[command]
            known = {a.dest: a for a in sub._actions}
            defaults = {}
            for key, val in _load_config(ns.config).items():
                if key not in known:
                    raise AoiLeakError(f"unknown config key {key!r} for {command}")
                action = known[key]
                try:
                    if key in _STORE_TRUE:
                        defaults[key] = val.lower() in ("1", "true", "yes", "on")
                    elif action.type is not None:
                        defaults[key] = action.type(val)
                    else:
                        defaults[key] = val
                except ValueError as exc:
                    raise AoiLeakError(f"config key {key!r}: {exc}") from exc
                action.required = False
            sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except Unstable as exc:
        print(f"unstable: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (AoiLeakError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
