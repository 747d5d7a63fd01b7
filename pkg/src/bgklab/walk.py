"""Exponential sums over subgroups, Gauss sums, and the alternating walk.

For S uniform on a multiplicative subgroup H, the alternating walk
X_k = S_1 - S_2 + ... + S_{2k-1} - S_{2k} has characteristic function
|phi_S|^{2k}, and X_{2k} is a stepping of X_k. The spectrum of frequencies
where |phi_S| stays above p^{-nu} is a union of H-cosets plus 0; the
(k, nu) search balances the walk's collision mass against the spectrum
size, after which the twisted fourth moment of X_k is provably not small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .budget import charge, get_budget
from .dist import CharFn, DistFp, dist_from_char_fn, roots_of_unity
from .fields import PrimeField, Subgroup, cosets, divisors, is_prime, subgroup_of_order
from .report import Report

IDENTITY_TOL = 1e-9
SQRT_TOL = 1e-6
SEARCH_K_BUDGET = 10_000_000
SCAN_TERM_BUDGET = 100_000_000
QUADRATIC_BUDGET = 400_000_000  # p^2 term counts, i.e. p <= 20000
LOG_FLOOR = -700.0  # |phi|^{4k} below exp(-700) is treated as exactly 0


@dataclass(frozen=True)
class WalkSpec(object):
    """The alternating subgroup walk stopped after 2k steps."""

    sub: Subgroup
    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"walk length k must be at least 1, got {self.k}")


@dataclass(frozen=True)
class Spectrum(object):
    """Frequencies where the subgroup character sum exceeds p^{-nu}."""

    sub: Subgroup
    nu: float
    members: Tuple[int, ...]
    coset_reps: Tuple[int, ...]
    near_threshold: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class SearchResult(object):
    """A successful (k, nu) pair with its collision-mass window."""

    theta: float
    k: int
    nu: float
    m_k: float
    lambda_size: int
    iterations: Tuple[Dict[str, float], ...]


def subgroup_char_sum(sub: Subgroup, a: int) -> complex:
    """phi_S(a) = (1/|H|) sum_{x in H} e(ax/p), by direct summation."""
    p = sub.field.p
    omega = roots_of_unity(p)
    h = np.array(sub.elements, dtype=np.int64)
    return complex(np.sum(omega[(int(a) % p) * h % p])) / sub.order


_coset_cache: Dict[Tuple[int, int], Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _coset_data(sub: Subgroup) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(reps, |phi_S(rep)| per rep, full |phi_S| array over F_p), cached.

    phi_S is constant on multiplicative cosets, so one evaluation per coset
    determines the whole array; the full array assigns each coset its
    representative's value exactly.
    """
    key = (sub.field.p, sub.order)
    hit = _coset_cache.get(key)
    if hit is not None:
        return hit
    p = sub.field.p
    omega = roots_of_unity(p)
    h = np.array(sub.elements, dtype=np.int64)
    reps = np.array(cosets(sub), dtype=np.int64)
    sums = omega[reps[:, None] * h[None, :] % p].sum(axis=1) / sub.order
    abs_reps = np.abs(sums)
    full = np.empty(p)
    full[0] = 1.0
    for rep, value in zip(reps, abs_reps):
        full[rep * h % p] = value
    data = (reps, abs_reps, full)
    _coset_cache[key] = data
    return data


def char_sum_abs_values(sub: Subgroup) -> np.ndarray:
    """|phi_S(a)| for every a, exact-constant on cosets."""
    return _coset_data(sub)[2]


def gauss_sum(field: PrimeField, d: int, a: int) -> complex:
    """G_d(a; p) = sum over x in F_p of e(a x^d / p), for d | p-1 and a != 0.

    Also evaluates the subgroup form 1 + d * (sum over the d-th powers) and
    insists the two agree to 1e-9 before returning the direct value.
    """
    p = field.p
    if d < 1 or (p - 1) % d != 0:
        raise ValueError(f"exponent {d} does not divide p-1 = {p - 1}")
    a = int(a) % p
    if a == 0:
        raise ValueError("the frequency a must be nonzero")
    omega = roots_of_unity(p)
    powers = np.array([pow(x, d, p) for x in range(p)], dtype=np.int64)
    direct = complex(np.sum(omega[a * powers % p]))
    sub = subgroup_of_order(field, (p - 1) // d)
    subgroup_form = 1.0 + d * sub.order * subgroup_char_sum(sub, a)
    if abs(direct - subgroup_form) > IDENTITY_TOL:
        raise ArithmeticError(
            f"direct and subgroup Gauss-sum forms disagree at (p={p}, d={d}, a={a}): "
            f"{direct} vs {subgroup_form}"
        )
    return direct


def walk_char_fn(spec: WalkSpec) -> CharFn:
    """phi of the walk: |phi_S(a)|^{2k} entrywise, in log domain for large k."""
    t = char_sum_abs_values(spec.sub)
    values = _abs_power(t, 2 * spec.k)
    return CharFn(spec.sub.field, values.astype(np.complex128))


def _abs_power(t: np.ndarray, exponent: int) -> np.ndarray:
    """t**exponent for t in [0, 1], stable for exponents in the millions."""
    if exponent <= 60:
        return t**exponent
    out = np.zeros_like(t)
    positive = t > 0.0
    logs = exponent * np.log(t[positive])
    keep = logs >= LOG_FLOOR
    vals = np.zeros(int(np.count_nonzero(positive)))
    vals[keep] = np.exp(logs[keep])
    out[positive] = vals
    return out


def walk_density(spec: WalkSpec) -> DistFp:
    """The exact law of X_k, recovered from its characteristic function."""
    charge("walk_density", float(spec.sub.field.p) ** 2, QUADRATIC_BUDGET)
    return dist_from_char_fn(walk_char_fn(spec))


def collision_mass(sub: Subgroup, k: int) -> float:
    """M_{X_k} = sum_a |phi_S(a)|^{4k}, by coset blocks in log domain."""
    reps, abs_reps, _ = _coset_data(sub)
    terms = _abs_power(abs_reps, 4 * k)
    return 1.0 + sub.order * float(np.sum(terms))


def spectrum(sub: Subgroup, nu: float) -> Spectrum:
    """The set of frequencies with |phi_S| strictly above p^{-nu}.

    Membership is decided once per coset (the value is constant on cosets),
    so the nonzero part is a union of H-cosets by construction; values
    within 1e-9 of the threshold are flagged as near-degenerate.
    """
    if nu <= 0.0:
        raise ValueError(f"nu must be positive, got {nu}")
    p = sub.field.p
    reps, abs_reps, _ = _coset_data(sub)
    threshold = p ** (-nu)
    chosen = abs_reps > threshold
    near = np.abs(abs_reps - threshold) <= IDENTITY_TOL
    h = np.array(sub.elements, dtype=np.int64)
    members = [0]
    kept_reps = []
    for rep, keep in zip(reps, chosen):
        if keep:
            kept_reps.append(int(rep))
            members.extend(int(v) for v in rep * h % p)
    return Spectrum(
        sub=sub,
        nu=nu,
        members=tuple(sorted(members)),
        coset_reps=tuple(kept_reps),
        near_threshold=tuple(int(r) for r in reps[near]),
    )


def spectrum_size(sub: Subgroup, nu: float) -> int:
    """|Lambda_nu| without materializing the member list."""
    p = sub.field.p
    _, abs_reps, _ = _coset_data(sub)
    return 1 + sub.order * int(np.count_nonzero(abs_reps > p ** (-nu)))


def search_k_nu(sub: Subgroup, theta: float) -> SearchResult:
    """Find (k, nu) with 4 k nu <= theta whose collision mass M_{X_k} is
    within a p^theta factor of the spectrum size |Lambda_nu|.

    Iterates k = 4, then k <- ceil(k^2 / theta): a failed test forces the
    spectrum at the finer scale to shrink by p^{-theta}(1 + p^{-3}), which
    cannot continue forever since |Lambda| never drops below 1. Each
    iteration also checks the crude bound M_{X_k} <= |Lambda_{1/k}| + p^{-3}.
    """
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must be in (0, 1), got {theta}")
    p = sub.field.p
    budget = get_budget(SEARCH_K_BUDGET)
    trace: List[Dict[str, float]] = []
    k = 4
    while True:
        if k > budget:
            from .budget import BudgetError

            raise BudgetError("search_k_nu", float(k), budget)
        k_plus = math.ceil(k * k / theta)
        nu = 1.0 / k_plus
        m_k = collision_mass(sub, k)
        lam = spectrum_size(sub, nu)
        lam_coarse = spectrum_size(sub, 1.0 / k)
        crude_ok = m_k <= lam_coarse + p**-3.0 + IDENTITY_TOL * m_k
        success = m_k <= p**theta * lam
        trace.append(
            {
                "k": float(k),
                "k_plus": float(k_plus),
                "nu": nu,
                "m_k": m_k,
                "lambda_size": float(lam),
                "lambda_coarse": float(lam_coarse),
                "crude_bound_ok": float(crude_ok),
                "success": float(success),
            }
        )
        if not crude_ok:
            raise ArithmeticError(
                f"crude collision bound fails at k={k}: {m_k} > {lam_coarse} + p^-3"
            )
        if success:
            result = SearchResult(
                theta=theta,
                k=k,
                nu=nu,
                m_k=m_k,
                lambda_size=lam,
                iterations=tuple(trace),
            )
            _validate_search(sub, result)
            return result
        k = k_plus


def _validate_search(sub: Subgroup, res: SearchResult) -> None:
    p = sub.field.p
    if 4 * res.k * res.nu > res.theta * (1.0 + 1e-12):
        raise AssertionError("search returned a pair violating 4 k nu <= theta")
    rho_2k_zero = res.m_k / p
    lower = p ** (-1.0 - res.theta) * res.lambda_size
    upper = p ** (-1.0 + res.theta) * res.lambda_size
    if not (lower <= rho_2k_zero * (1.0 + 1e-12) and rho_2k_zero <= upper * (1.0 + 1e-12)):
        raise AssertionError("search result violates the collision-mass window")


def verify_expansion_inequality(spec: WalkSpec, a: int) -> Report:
    """Check E(|phi_{X_k}(a X_k)|^2) >= phi_{X_k}(a)^{4k} and its Fubini form.

    The average over X_k of phi_{X_{2k}}(a x) must both match the average
    over X_{2k} of phi_{X_k}(a y) (exactly, up to transform roundoff) and
    dominate the 4k-th power of phi_{X_k}(a).
    """
    p = spec.sub.field.p
    charge("verify_expansion_inequality", float(p) ** 2, QUADRATIC_BUDGET)
    a = int(a) % p
    k = spec.k
    phi_k = walk_char_fn(spec).values.real
    phi_2k = walk_char_fn(WalkSpec(spec.sub, 2 * k)).values.real
    rho_k = walk_density(spec).density
    rho_2k = walk_density(WalkSpec(spec.sub, 2 * k)).density
    idx = a * np.arange(p, dtype=np.int64) % p
    lhs = float(np.dot(rho_k, phi_2k[idx]))
    fubini = float(np.dot(rho_2k, phi_k[idx]))
    t = char_sum_abs_values(spec.sub)[a]
    rhs = float(_abs_power(np.array([t]), 8 * k * k)[0])

    report = Report(command="expansion")
    report.note("p", p)
    report.note("k", k)
    report.note("a", a)
    report.note("phi_abs", float(t))
    report.note("lhs", lhs)
    report.note("naive_power_real", float((subgroup_char_sum(spec.sub, a) ** (4 * k)).real))
    report.check("expansion.fubini", lhs - fubini, "abs<=", IDENTITY_TOL)
    report.check("eq-expansion", lhs, ">=", rhs, tol=IDENTITY_TOL)
    return report


@dataclass(frozen=True)
class ScanRow(object):
    """One subgroup's worst-case exponential sum."""

    p: int
    subgroup_order: int
    max_abs_sum: float
    normalized: float
    sqrt_p_ok: bool


def scan_subgroup(sub: Subgroup) -> ScanRow:
    """Worst nonzero-frequency sum over one subgroup, via coset representatives."""
    p = sub.field.p
    _, abs_reps, _ = _coset_data(sub)
    normalized = float(np.max(abs_reps))
    max_abs = normalized * sub.order
    return ScanRow(
        p=p,
        subgroup_order=sub.order,
        max_abs_sum=max_abs,
        normalized=normalized,
        sqrt_p_ok=bool(max_abs <= math.sqrt(p) + SQRT_TOL),
    )


def scan_orders(p: int, gamma: float) -> List[int]:
    """Subgroup orders to scan: divisors of p-1 at least p^gamma, plus the
    full group (so even p = 2 yields its one row)."""
    return [n for n in divisors(p - 1) if n >= p**gamma or n == p - 1]


def theorem_scan(p_lo: int, p_hi: int, gamma: float) -> List[ScanRow]:
    """Scan all subgroups of order >= p^gamma for every prime in [p_lo, p_hi].

    Each row records the maximal nonzero-frequency sum, its normalized value,
    and whether it clears the square-root barrier (it always must).
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must be in (0, 1], got {gamma}")
    if p_lo > p_hi:
        raise ValueError(f"empty prime range [{p_lo}, {p_hi}]")
    jobs: List[Tuple[int, int]] = []
    terms = 0.0
    for p in range(max(2, p_lo), p_hi + 1):
        if not is_prime(p):
            continue
        for n in scan_orders(p, gamma):
            jobs.append((p, n))
            terms += float(p)
    charge("theorem_scan", terms, SCAN_TERM_BUDGET)
    rows = []
    for p, n in jobs:
        rows.append(scan_subgroup(subgroup_of_order(PrimeField(p), n)))
    return rows


def final_chain_report(
    sub: Subgroup, gamma: float, theta: float, eta: float
) -> Report:
    """The end-to-end walk argument on one subgroup, quantity by quantity.

    Requires 10 theta < gamma. Runs the (k, nu) search, rebuilds X_k and
    X_{2k}, asserts the exact identities (collision mass, spectrum bounds,
    twisted-moment lower bound), and reports the remaining asymptotic
    comparison without asserting any ineffective exponent.
    """
    p = sub.field.p
    if not (0.0 < theta and 10.0 * theta < gamma):
        raise ValueError(f"need 0 < 10*theta < gamma, got theta={theta}, gamma={gamma}")
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must be in (0, 1), got {eta}")

    report = Report(command="chain")
    report.note("p", p)
    report.note("subgroup_order", sub.order)
    report.note("gamma", gamma)
    report.note("theta", theta)
    report.note("eta", eta)
    report.check("subgroup-size", float(sub.order), ">=", p**gamma)

    res = search_k_nu(sub, theta)
    report.note("k", res.k)
    report.note("nu", res.nu)
    report.note("m_k", res.m_k)
    report.note("lambda_size", res.lambda_size)
    report.trace = [dict(row) for row in res.iterations]
    report.check("search.4knu", 4 * res.k * res.nu, "<=", theta, tol=1e-12)

    rho_2k0 = res.m_k / p
    report.note("rho_2k_zero", rho_2k0)
    report.check(
        "eq-m-bound.lower",
        p ** (-1.0 - theta) * res.lambda_size,
        "<=",
        rho_2k0,
        tol=IDENTITY_TOL,
    )
    report.check(
        "eq-m-bound.upper",
        rho_2k0,
        "<=",
        p ** (-1.0 + theta) * res.lambda_size,
        tol=IDENTITY_TOL,
    )
    report.check(
        "spectrum.coset-bound",
        float(res.lambda_size),
        "<=",
        p ** (1.0 + 2.0 * res.nu) / sub.order,
        tol=IDENTITY_TOL,
    )

    spec = WalkSpec(sub, res.k)
    if float(p) * p <= get_budget(QUADRATIC_BUDGET):
        rho_k = walk_density(spec).density
        report.note("rho_x_zero", float(rho_k[0]))
        report.check(
            "walk-max.identity", float(rho_k[0]), "<=", 1.0 / sub.order, tol=IDENTITY_TOL
        )
        # rho_{X_{2k}}(0) recomputed from the full inverse transform.
        rho_2k = walk_density(WalkSpec(sub, 2 * res.k)).density
        report.check(
            "eq-rho1.walk", float(rho_2k[0]) - rho_2k0, "abs<=", IDENTITY_TOL
        )
        moment = _walk_twisted_moment(sub, res.k)
        report.note("twisted_fourth_moment", moment)
        report.check("eq-last-bound", moment, ">=", p ** (-10.0 * theta), tol=1e-12)
        report.note("rho_y0_power_scale", float(rho_2k0))
        report.note("third_term_scale", p ** (-1.0 + eta) / rho_2k0)
    else:
        report.warn("p exceeds the quadratic budget; twisted moment not evaluated")

    trivial = res.lambda_size == 1
    report.note("spectrum_trivial", trivial)
    if trivial:
        report.note("nontrivial_bound_nu", res.nu)
    return report


def _walk_twisted_moment(sub: Subgroup, k: int) -> float:
    """E(|phi_{X_k}(X_k Xhat_{2k})|^2) from the exact walk transforms."""
    p = sub.field.p
    phi_2k = walk_char_fn(WalkSpec(sub, 2 * k)).values.real
    m_k = float(np.sum(phi_2k))
    weights = phi_2k / m_k
    rho_k = walk_density(WalkSpec(sub, k)).density
    freq = np.arange(p, dtype=np.int64)
    total = 0.0
    for x in range(p):
        rho = float(rho_k[x])
        if rho == 0.0:
            continue
        total += rho * float(np.dot(weights, phi_2k[freq * x % p]))
    return total
