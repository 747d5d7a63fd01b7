"""The `verify` command: one deterministic sweep over the identity suite.

Seeded random densities and a fixed family of structured instances exercise
the stepping/peaking identities, coset invariances, extraction certificates,
and the walk search. Tasks are independent and merged in a fixed order, so
reports are byte-identical at any parallelism.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Tuple

import numpy as np

from .budget import BudgetError
from .bsg import bsg
from .dist import (
    DistFp,
    char_fn,
    dirac,
    peaking_of_char,
    random_density,
    stepping,
    uniform_on,
    verify_fourier_duality,
)
from .extract import ConditionsFailError, alt1_report, extract_structured, verify_link2
from .fields import GroupCtx, PrimeField, divisors, subgroup_of_order
from .report import Report
from .rng import SplitMix64
from .sets import FpSet
from .walk import (
    WalkSpec,
    collision_mass,
    gauss_sum,
    search_k_nu,
    spectrum,
    subgroup_char_sum,
    verify_expansion_inequality,
    walk_char_fn,
    walk_density,
)

IDENTITY_TOL = 1e-9

Task = Tuple[str, Callable[[], Report]]


def _identity_task(p: int, seed: int, index: int) -> Report:
    """eq-rho0 / eq-rho1 / duality / link2 for one seeded random density."""
    field = PrimeField(p)
    rng = SplitMix64(seed)
    for _ in range(index + 1):
        rng.next_u64()
    size = 1 + rng.below(max(1, p - 1))
    X = random_density(field, rng, support_size=size)
    report = Report(command="identities")
    report.note("p", p)
    report.note("support_size", size)
    _check_core_identities(report, X)
    return report


def _check_core_identities(report: Report, X: DistFp) -> None:
    ctx = GroupCtx(X.field, "additive")
    Y = stepping(X, ctx)
    report.check(
        "eq-rho0", float(Y.density[0]) - X.collision_mass(), "abs<=", IDENTITY_TOL
    )
    report.check(
        "stepping.max-at-zero",
        float(np.max(Y.density)),
        "<=",
        float(Y.density[0]),
        tol=IDENTITY_TOL,
    )
    report.merge(verify_fourier_duality(X))
    report.merge(verify_link2(X))
    phi_x = char_fn(X)
    phi_y = char_fn(Y)
    report.check(
        "product-rule.stepping",
        float(np.max(np.abs(phi_y.values - phi_x.abs_squared()))),
        "<=",
        IDENTITY_TOL,
    )


def _subgroup_identity_task(p: int, order: int) -> Report:
    field = PrimeField(p)
    sub = subgroup_of_order(field, order)
    X = uniform_on(field, sub.elements)
    report = Report(command="identities-subgroup")
    report.note("p", p)
    report.note("order", order)
    _check_core_identities(report, X)
    peak = peaking_of_char(char_fn(X))
    report.check(
        "peaking.mass", peak.mass - p / order, "abs<=", IDENTITY_TOL
    )
    return report


def _coset_task(p: int, order: int, seed: int) -> Report:
    """Coset invariance of phi_S and the union-of-cosets spectrum law."""
    field = PrimeField(p)
    sub = subgroup_of_order(field, order)
    rng = SplitMix64(seed)
    report = Report(command="coset-invariance")
    report.note("p", p)
    report.note("order", order)
    worst = 0.0
    for _ in range(8):
        a = rng.below(p)
        h = sub.elements[rng.below(order)]
        worst = max(worst, abs(subgroup_char_sum(sub, a * h % p) - subgroup_char_sum(sub, a)))
    report.check("coset-invariance.phi", worst, "<=", IDENTITY_TOL)
    for nu in (0.25, 0.6):
        spec = spectrum(sub, nu)
        nonzero = [x for x in spec.members if x != 0]
        union: set = set()
        for rep in spec.coset_reps:
            union.update(rep * h % p for h in sub.elements)
        report.check(f"spectrum.coset-union.nu={nu}", sorted(union) == nonzero, "==", True)
        if spec.near_threshold:
            report.warn(f"spectrum threshold degeneracy at nu={nu}")
    return report


def _walk_product_rule_task(p: int, order: int, k: int) -> Report:
    field = PrimeField(p)
    sub = subgroup_of_order(field, order)
    phi_direct = char_fn(walk_density(WalkSpec(sub, k)))
    phi_walk = walk_char_fn(WalkSpec(sub, k))
    report = Report(command="walk-product-rule")
    report.note("p", p)
    report.note("order", order)
    report.note("k", k)
    report.check(
        "product-rule.walk",
        float(np.max(np.abs(phi_direct.values - phi_walk.values))),
        "<=",
        IDENTITY_TOL,
    )
    return report


def _expansion_task(p: int, order: int, k: int, a_values: Tuple[int, ...]) -> Report:
    field = PrimeField(p)
    sub = subgroup_of_order(field, order)
    report = Report(command="expansion-suite")
    report.note("p", p)
    report.note("order", order)
    for a in a_values:
        sub_report = verify_expansion_inequality(WalkSpec(sub, k), a)
        report.merge(sub_report, prefix=f"a={a}.")
    return report


def _bsg_task(label: str, make_set: Callable[[], FpSet]) -> Report:
    A = make_set()
    cert = bsg(A)
    report = Report(command="bsg-instance")
    report.note("instance", label)
    report.merge(cert.report)
    return report


def _extract_task(p: int, order: int, k: int) -> Report:
    field = PrimeField(p)
    sub = subgroup_of_order(field, order)
    X = walk_density(WalkSpec(sub, k))
    report = Report(command="extract-instance")
    report.note("p", p)
    report.note("order", order)
    report.note("k", k)
    try:
        cert = extract_structured(X)
        report.note("case", -1)
        report.merge(cert.report)
    except ConditionsFailError as fail:
        report.note("case", 0)
        report.check(
            "case0.bound",
            1.0 / fail.alpha,
            "<=",
            4.0 * (fail.rho_x0 + fail.rho_y0),
            tol=IDENTITY_TOL,
        )
    return report


def _alt1_task(p: int) -> Report:
    field = PrimeField(p)
    report = Report(command="alt1-dirac")
    sub_report = alt1_report(dirac(field, 0), eta=0.25)
    report.merge(sub_report)
    report.check("case0.classified", sub_report.quantities.get("case", -1), "==", 0)
    return report


def _search_task(p: int, order: int, theta: float) -> Report:
    field = PrimeField(p)
    sub = subgroup_of_order(field, order)
    res = search_k_nu(sub, theta)
    report = Report(command="search-instance")
    report.note("p", p)
    report.note("order", order)
    report.note("theta", theta)
    report.note("k", res.k)
    report.note("nu", res.nu)
    report.check("search.4knu", 4 * res.k * res.nu, "<=", theta, tol=1e-12)
    rho0 = res.m_k / p
    report.check(
        "eq-m-bound.lower",
        p ** (-1.0 - theta) * res.lambda_size,
        "<=",
        rho0,
        tol=IDENTITY_TOL,
    )
    report.check(
        "eq-m-bound.upper", rho0, "<=", p ** (-1.0 + theta) * res.lambda_size, tol=IDENTITY_TOL
    )
    report.check(
        "eq-rho1.walk",
        float(walk_density(WalkSpec(sub, 2 * res.k)).density[0]) - rho0,
        "abs<=",
        IDENTITY_TOL,
    )
    return report


def _gauss_task(p: int) -> Report:
    field = PrimeField(p)
    report = Report(command="gauss-sums")
    report.note("p", p)
    worst_identity_margin = 0.0  # gauss_sum itself enforces the two-form identity
    for d in divisors(p - 1):
        for a in (1, 2, p - 1):
            value = gauss_sum(field, d, a % p or 1)
            if d == 1:
                report.check(f"gauss.complete.d1.a={a}", abs(value), "<=", IDENTITY_TOL)
    quad_worst = 0.0
    if p % 2 == 1:
        for a in range(1, p):
            quad_worst = max(quad_worst, abs(abs(gauss_sum(field, 2, a)) - p**0.5))
    report.check("gauss.quadratic-modulus", quad_worst, "<=", 1e-6)
    report.note("identity_margin", worst_identity_margin)
    return report


def build_tasks(seed: int) -> List[Task]:
    """The fixed task list; `seed` feeds every randomized instance."""
    tasks: List[Task] = []
    for p in (13, 101):
        for i in range(4):
            tasks.append(
                (f"identities.p={p}.i={i}", lambda p=p, i=i: _identity_task(p, seed, i))
            )
    for p, order in ((13, 3), (13, 6), (101, 20), (157, 12)):
        tasks.append(
            (f"subgroup.p={p}.n={order}", lambda p=p, order=order: _subgroup_identity_task(p, order))
        )
    for p, order in ((13, 6), (101, 25)):
        tasks.append(
            (f"cosets.p={p}.n={order}", lambda p=p, order=order: _coset_task(p, order, seed))
        )
    for k in (1, 2):
        tasks.append((f"walk-rule.k={k}", lambda k=k: _walk_product_rule_task(13, 6, k)))
    tasks.append(("expansion.p=13", lambda: _expansion_task(13, 3, 1, (0, 1, 5))))

    def interval_set() -> FpSet:
        ctx = GroupCtx(PrimeField(101), "additive")
        return FpSet(ctx, tuple(range(1, 11)))

    def subgroup_set() -> FpSet:
        ctx = GroupCtx(PrimeField(101), "multiplicative")
        return FpSet(ctx, subgroup_of_order(PrimeField(101), 20).elements)

    def random_set() -> FpSet:
        rng = SplitMix64(seed)
        ctx = GroupCtx(PrimeField(257), "multiplicative")
        return FpSet(ctx, tuple(x + 1 for x in rng.sample(256, 32)))

    def geometric_set() -> FpSet:
        ctx = GroupCtx(PrimeField(257), "additive")
        return FpSet(ctx, tuple(pow(3, j, 257) for j in range(12)))

    for label, maker in (
        ("interval", interval_set),
        ("subgroup", subgroup_set),
        ("random", random_set),
        ("geometric", geometric_set),
    ):
        tasks.append((f"bsg.{label}", lambda label=label, maker=maker: _bsg_task(label, maker)))

    tasks.append(("extract.p=157", lambda: _extract_task(157, 156, 1)))
    tasks.append(("alt1.dirac", lambda: _alt1_task(13)))
    tasks.append(("search.p=157", lambda: _search_task(157, 156, 0.5)))
    for p in (13, 101):
        tasks.append((f"gauss.p={p}", lambda p=p: _gauss_task(p)))
    return tasks


def run_verify(seed: int, jobs: int = 1) -> Tuple[Report, bool]:
    """Run the suite; returns (report, budget_exhausted)."""
    report = Report(command="verify")
    report.inputs["seed"] = seed
    tasks = build_tasks(seed)
    budget_hit = False

    def run_one(task: Task):
        name, fn = task
        try:
            return name, fn(), None
        except BudgetError as exc:
            return name, None, exc

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_one, tasks))
    else:
        outcomes = [run_one(t) for t in tasks]

    for name, sub_report, exc in outcomes:
        if exc is not None:
            budget_hit = True
            report.warn(f"{name}: budget exhausted ({exc})")
            continue
        report.merge(sub_report, prefix=name + ".")
    report.note("tasks", len(tasks))
    report.note("assertions", len(report.assertions))
    return report, budget_hit
