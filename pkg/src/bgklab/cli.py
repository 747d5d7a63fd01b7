"""Command-line front end.

Subcommands: scan, verify, bsg, extract, walk, chain, sumprod. Flags may be
preloaded from a `key = value` config file (--config); explicit flags win.
Exit codes: 0 success, 1 assertion failure, 2 usage or config error,
3 budget exhaustion.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

from .budget import BudgetError
from .bsg import bsg
from .dist import DistFp, dirac, random_density, uniform_on
from .extract import ConditionsFailError, alt1_report, extract_structured
from .fields import GroupCtx, PrimeField, subgroup_of_order
from .report import Report, write_csv
from .rng import SplitMix64
from .sets import FpSet, expansion_stats
from .verify_suite import run_verify
from .walk import WalkSpec, final_chain_report, scan_subgroup, scan_orders, search_k_nu, walk_density
from .fields import is_prime

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3


class ConfigError(Exception):
    pass


def load_config_file(path: str) -> dict:
    """Parse `key = value` lines; '#' starts a comment."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        for cast in (int, float):
            try:
                values[key] = cast(value)
                break
            except ValueError:
                continue
        else:
            values[key] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bgklab",
        description="Desk-scale experiments on exponential sums over subgroups of F_p",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", help="key = value config file; flags override")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
        sp.add_argument("--jobs", type=int, default=1, help="parallel workers")

    scan = sub.add_parser("scan", help="max subgroup sums across a prime range")
    scan.add_argument("--p-lo", type=int, default=2)
    scan.add_argument("--p-hi", type=int, default=101)
    scan.add_argument("--gamma", type=float, default=0.5)
    common(scan)

    verify = sub.add_parser("verify", help="run the seeded identity suite")
    common(verify)

    bsg_p = sub.add_parser("bsg", help="energy-to-structure extraction certificate")
    bsg_p.add_argument("--p", type=int)
    bsg_p.add_argument("--ctx", choices=("additive", "multiplicative"), default="additive")
    bsg_p.add_argument("--alpha", type=float, help="energy parameter (default 1/e(A))")
    _set_inputs(bsg_p)
    common(bsg_p)

    extract = sub.add_parser("extract", help="structured-set pipeline certificate")
    extract.add_argument("--p", type=int)
    extract.add_argument("--eta", type=float, help="run the case analysis at this eta")
    _dist_inputs(extract)
    common(extract)

    walk = sub.add_parser("walk", help="(k, nu) search for a subgroup walk")
    walk.add_argument("--p", type=int)
    walk.add_argument("--subgroup-order", type=int)
    walk.add_argument("--theta", type=float)
    common(walk)

    chain = sub.add_parser("chain", help="end-to-end walk argument report")
    chain.add_argument("--p", type=int)
    chain.add_argument("--subgroup-order", type=int)
    chain.add_argument("--gamma", type=float)
    chain.add_argument("--theta", type=float)
    chain.add_argument("--eta", type=float)
    common(chain)

    sumprod = sub.add_parser("sumprod", help="sumset/product-set growth of a set")
    sumprod.add_argument("--p", type=int)
    _set_inputs(sumprod)
    common(sumprod)

    return parser


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ConfigError(f"missing required option(s): {flags}")


def _set_inputs(sp: argparse.ArgumentParser) -> None:
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--set", help="inline residues, e.g. 1,3,9")
    group.add_argument("--set-file", help="file with one residue per line")
    group.add_argument("--interval", help="range a..b inclusive")
    group.add_argument("--random", type=int, help="random m-element subset")
    group.add_argument("--subgroup-order", type=int, help="the subgroup of this order")


def _dist_inputs(sp: argparse.ArgumentParser) -> None:
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--subgroup-order", type=int, help="walk over this subgroup")
    group.add_argument("--dirac", type=int, help="point mass at this residue")
    group.add_argument("--uniform-set", help="uniform on inline residues, e.g. 1,3,9")
    group.add_argument("--random-support", type=int, help="random density on m residues")
    sp.add_argument("--k", type=int, default=1, help="walk length (with --subgroup-order)")


def parse_residues(text: str) -> List[int]:
    try:
        return [int(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError as exc:
        raise ConfigError(f"bad residue list {text!r}") from exc


def build_set(args: argparse.Namespace, ctx: GroupCtx) -> FpSet:
    field = ctx.field
    if args.set is not None:
        return FpSet(ctx, tuple(parse_residues(args.set)))
    if args.set_file is not None:
        try:
            lines = Path(args.set_file).read_text(encoding="utf-8").split()
        except OSError as exc:
            raise ConfigError(f"cannot read set file {args.set_file}: {exc}") from exc
        return FpSet(ctx, tuple(int(tok) for tok in lines))
    if args.interval is not None:
        lo, sep, hi = args.interval.partition("..")
        if not sep:
            raise ConfigError(f"interval must look like 1..10, got {args.interval!r}")
        return FpSet(ctx, tuple(range(int(lo), int(hi) + 1)))
    if args.random is not None:
        rng = SplitMix64(args.seed)
        size = ctx.carrier_size
        lo = 0 if ctx.mode == "additive" else 1
        return FpSet(ctx, tuple(rng.sample(size, args.random, lo=lo)))
    if args.subgroup_order is not None:
        return FpSet(ctx, subgroup_of_order(field, args.subgroup_order).elements)
    raise ConfigError("no set input given")


def build_dist(args: argparse.Namespace, field: PrimeField) -> DistFp:
    if args.subgroup_order is not None:
        sub = subgroup_of_order(field, args.subgroup_order)
        return walk_density(WalkSpec(sub, args.k))
    if args.dirac is not None:
        return dirac(field, args.dirac)
    if args.uniform_set is not None:
        return uniform_on(field, parse_residues(args.uniform_set))
    if args.random_support is not None:
        return random_density(field, SplitMix64(args.seed), args.random_support)
    raise ConfigError("no distribution input given")


def _echo_inputs(args: argparse.Namespace) -> dict:
    skip = {"command", "config", "out", "jobs", "func"}
    return {
        k: v for k, v in vars(args).items() if k not in skip and v is not None
    }


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")


def _emit_report(report: Report, args: argparse.Namespace) -> int:
    report.inputs.update(_echo_inputs(args))
    _emit(report.to_json(), args.out)
    return EXIT_OK if report.passed else EXIT_ASSERTION


def _require_prime_field(p: int) -> PrimeField:
    try:
        return PrimeField(p)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_scan(args: argparse.Namespace) -> int:
    if not 0.0 < args.gamma <= 1.0:
        raise ConfigError(f"gamma must be in (0, 1], got {args.gamma}")
    if args.p_lo > args.p_hi:
        raise ConfigError(f"empty prime range [{args.p_lo}, {args.p_hi}]")
    jobs = []
    for p in range(max(2, args.p_lo), args.p_hi + 1):
        if is_prime(p):
            for n in scan_orders(p, args.gamma):
                jobs.append((p, n))

    def one(job):
        p, n = job
        return scan_subgroup(subgroup_of_order(PrimeField(p), n))

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(one, jobs))
    else:
        rows = [one(j) for j in jobs]
    header = ("p", "subgroup_order", "max_abs_sum", "normalized", "sqrt_p_ok")
    table = [
        (r.p, r.subgroup_order, r.max_abs_sum, r.normalized, r.sqrt_p_ok) for r in rows
    ]
    text = write_csv(None, header, table)
    _emit(text, args.out)
    return EXIT_OK if all(r.sqrt_p_ok for r in rows) else EXIT_ASSERTION


def cmd_verify(args: argparse.Namespace) -> int:
    if args.seed < 0 or args.seed >= 2**64:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {args.seed}")
    report, budget_hit = run_verify(args.seed, jobs=args.jobs)
    report.inputs.update(_echo_inputs(args))
    _emit(report.to_json(), args.out)
    if budget_hit:
        return EXIT_BUDGET
    return EXIT_OK if report.passed else EXIT_ASSERTION


def cmd_bsg(args: argparse.Namespace) -> int:
    _require(args, "p")
    field = _require_prime_field(args.p)
    ctx = GroupCtx(field, args.ctx)
    A = _wrap_config_errors(lambda: build_set(args, ctx))
    try:
        cert = bsg(A, alpha=args.alpha)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return _emit_report(cert.report, args)


def cmd_extract(args: argparse.Namespace) -> int:
    _require(args, "p")
    field = _require_prime_field(args.p)
    X = _wrap_config_errors(lambda: build_dist(args, field))
    if args.eta is not None:
        report = alt1_report(X, args.eta)
        return _emit_report(report, args)
    try:
        cert = extract_structured(X)
        return _emit_report(cert.report, args)
    except ConditionsFailError as fail:
        report = Report(command="extract")
        report.note("case", 0)
        report.note("alpha", fail.alpha)
        report.note("rho_x0", fail.rho_x0)
        report.note("rho_y0", fail.rho_y0)
        report.check(
            "case0.bound",
            1.0 / fail.alpha,
            "<=",
            4.0 * (fail.rho_x0 + fail.rho_y0),
            tol=1e-9,
        )
        return _emit_report(report, args)


def cmd_walk(args: argparse.Namespace) -> int:
    _require(args, "p", "subgroup_order", "theta")
    field = _require_prime_field(args.p)
    sub = _wrap_config_errors(lambda: subgroup_of_order(field, args.subgroup_order))
    if not 0.0 < args.theta < 1.0:
        raise ConfigError(f"theta must be in (0, 1), got {args.theta}")
    res = search_k_nu(sub, args.theta)
    report = Report(command="walk")
    report.note("k", res.k)
    report.note("nu", res.nu)
    report.note("m_k", res.m_k)
    report.note("lambda_size", res.lambda_size)
    report.trace = [dict(r) for r in res.iterations]
    p = field.p
    rho0 = res.m_k / p
    report.check("search.4knu", 4 * res.k * res.nu, "<=", args.theta, tol=1e-12)
    report.check(
        "eq-m-bound.lower",
        p ** (-1.0 - args.theta) * res.lambda_size,
        "<=",
        rho0,
        tol=1e-9,
    )
    report.check(
        "eq-m-bound.upper", rho0, "<=", p ** (-1.0 + args.theta) * res.lambda_size, tol=1e-9
    )
    return _emit_report(report, args)


def cmd_chain(args: argparse.Namespace) -> int:
    _require(args, "p", "subgroup_order", "gamma", "theta", "eta")
    field = _require_prime_field(args.p)
    sub = _wrap_config_errors(lambda: subgroup_of_order(field, args.subgroup_order))
    try:
        report = final_chain_report(sub, args.gamma, args.theta, args.eta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return _emit_report(report, args)


def cmd_sumprod(args: argparse.Namespace) -> int:
    _require(args, "p")
    field = _require_prime_field(args.p)
    ctx = GroupCtx(field, "multiplicative")
    A = _wrap_config_errors(lambda: build_set(args, ctx))
    try:
        stats = expansion_stats(A)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report = Report(command="sumprod")
    report.note("size", len(A))
    report.note("sum_size", stats.sum_size)
    report.note("prod_size", stats.prod_size)
    report.note("exponent", stats.exponent)
    return _emit_report(report, args)


def _wrap_config_errors(fn):
    try:
        return fn()
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


_COMMANDS = {
    "scan": cmd_scan,
    "verify": cmd_verify,
    "bsg": cmd_bsg,
    "extract": cmd_extract,
    "walk": cmd_walk,
    "chain": cmd_chain,
    "sumprod": cmd_sumprod,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        pre, _ = parser.parse_known_args(argv)
    except SystemExit:
        return EXIT_CONFIG
    try:
        if getattr(pre, "config", None):
            overrides = load_config_file(pre.config)
            known = {
                action.dest
                for sp in parser._subparsers._group_actions[0].choices.values()  # type: ignore[union-attr]
                for action in sp._actions
            }
            unknown = set(overrides) - known
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
            parser.set_defaults(**overrides)
        try:
            args = parser.parse_args(argv)
        except SystemExit:
            return EXIT_CONFIG
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
