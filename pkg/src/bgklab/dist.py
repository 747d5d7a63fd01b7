"""Probability densities on F_p, characteristic functions, stepping, peaking.

A density is a length-p float64 array summing to 1. Its characteristic
function is phi(a) = sum_x rho(x) e(ax/p) with e(t) = exp(2*pi*i*t); the
stepping of X is the difference (or quotient) of two independent copies,
whose characteristic function is |phi_X|^2; the peaking redistributes mass
on the frequency side proportionally to |phi_X|^2. All expectations are
finite sums over the density; nothing is sampled.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional

import numpy as np

from .budget import charge
from .fields import GroupCtx, PrimeField
from .report import Report
from .rng import SplitMix64

MASS_TOL = 1e-12
CHAR_TOL = 1e-9
EAGER_CACHE_MAX_P = 100_000
DIRECT_SUM_BUDGET = 100_000_000

_roots_cache: Dict[int, np.ndarray] = {}


def roots_of_unity(p: int) -> np.ndarray:
    """Table of the p-th roots of unity, e(k/p) for k = 0..p-1 (cached)."""
    table = _roots_cache.get(p)
    if table is None:
        table = np.exp(2j * np.pi * (np.arange(p) / p))
        table.flags.writeable = False
        _roots_cache[p] = table
    return table


@dataclass(frozen=True)
class DistFp(object):
    """An exact finite probability density on the residues of F_p."""

    field: PrimeField
    density: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.density, dtype=np.float64)
        if rho.shape != (self.field.p,):
            raise ValueError(f"density must have shape ({self.field.p},)")
        if np.any(rho < 0.0):
            raise ValueError("density entries must be nonnegative")
        total = float(np.sum(rho))
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"density mass {total} differs from 1 by more than {MASS_TOL}")
        rho = rho.copy()
        rho.flags.writeable = False
        object.__setattr__(self, "density", rho)

    @property
    def p(self) -> int:
        return self.field.p

    def support(self) -> np.ndarray:
        return np.nonzero(self.density)[0]

    def mass_at_zero(self) -> float:
        return float(self.density[0])

    def collision_mass(self) -> float:
        """sum_x rho(x)^2, the mass the stepping places at the identity."""
        return float(np.sum(self.density * self.density))


@dataclass(frozen=True)
class CharFn(object):
    """Characteristic function values phi(a) for every frequency a in F_p."""

    field: PrimeField
    values: np.ndarray

    def __post_init__(self) -> None:
        phi = np.asarray(self.values, dtype=np.complex128)
        if phi.shape != (self.field.p,):
            raise ValueError(f"values must have shape ({self.field.p},)")
        if abs(phi[0] - 1.0) > CHAR_TOL:
            raise ValueError(f"phi(0) = {phi[0]} must equal 1")
        if float(np.max(np.abs(phi))) > 1.0 + CHAR_TOL:
            raise ValueError("characteristic values must have modulus at most 1")
        phi = phi.copy()
        phi.flags.writeable = False
        object.__setattr__(self, "values", phi)

    @property
    def p(self) -> int:
        return self.field.p

    def abs_squared(self) -> np.ndarray:
        return np.abs(self.values) ** 2


@dataclass(frozen=True)
class PeakDist(object):
    """Frequency-side density q(a) = |phi(a)|^2 / M with M = sum_a |phi(a)|^2."""

    base: CharFn
    weights: np.ndarray
    mass: float

    def __post_init__(self) -> None:
        q = np.asarray(self.weights, dtype=np.float64)
        if q.shape != (self.base.p,):
            raise ValueError(f"weights must have shape ({self.base.p},)")
        if abs(float(np.sum(q)) - 1.0) > CHAR_TOL:
            raise ValueError("peaking weights must sum to 1")
        if self.mass < 1.0 - CHAR_TOL:
            raise ValueError("total squared-modulus mass must be at least 1")
        q = q.copy()
        q.flags.writeable = False
        object.__setattr__(self, "weights", q)

    @property
    def p(self) -> int:
        return self.base.p


def uniform_on(field: PrimeField, support: Iterable[int]) -> DistFp:
    """The uniform density on a nonempty set of residues."""
    idx = sorted({x % field.p for x in support})
    if not idx:
        raise ValueError("support must be nonempty")
    rho = np.zeros(field.p)
    rho[idx] = 1.0 / len(idx)
    return DistFp(field, rho)


def dirac(field: PrimeField, x: int) -> DistFp:
    """The point mass at a single residue."""
    rho = np.zeros(field.p)
    rho[x % field.p] = 1.0
    return DistFp(field, rho)


def random_density(field: PrimeField, rng: SplitMix64, support_size: Optional[int] = None) -> DistFp:
    """A random density: uniform weights on a random support, normalized."""
    p = field.p
    size = support_size if support_size is not None else 1 + rng.below(p)
    if not 1 <= size <= p:
        raise ValueError(f"support size {size} out of range [1, {p}]")
    support = rng.sample(p, size)
    weights = np.array([rng.uniform() + 1e-3 for _ in support])
    rho = np.zeros(p)
    rho[support] = weights / weights.sum()
    return DistFp(field, rho)


def stepping(X: DistFp, ctx: GroupCtx) -> DistFp:
    """Density of X1 * X2^{-1} (ctx operation) for independent copies of X.

    In additive notation this is rho_Y(y) = sum_x rho_X(x) rho_X(x - y); the
    result has its maximum at the identity, where it equals sum_x rho_X(x)^2.
    """
    if ctx.field.p != X.p:
        raise ValueError("context and distribution live on different fields")
    p = X.p
    rho = X.density
    out = np.zeros(p)
    if ctx.mode == "additive":
        # Y = X1 - X2: out[y] = sum_x2 rho(x2) * rho(y + x2)
        for x2 in X.support():
            out += rho[x2] * np.roll(rho, -int(x2))
    else:
        if rho[0] != 0.0:
            raise ValueError("multiplicative stepping requires no mass at 0")
        residues = np.arange(1, p, dtype=np.int64)
        for x2 in X.support():
            inv2 = X.field.inv(int(x2))
            out[residues * inv2 % p] += rho[x2] * rho[residues]
    return DistFp(X.field, out)


def convolve_add(X: DistFp, W: DistFp) -> DistFp:
    """Density of X + W for independent X, W (direct cyclic convolution)."""
    if X.p != W.p:
        raise ValueError("distributions live on different fields")
    out = np.zeros(X.p)
    for w in W.support():
        out += W.density[w] * np.roll(X.density, int(w))
    return DistFp(X.field, out)


def char_value(X: DistFp, a: int) -> complex:
    """phi_X(a) on demand, by direct summation over the support."""
    p = X.p
    omega = roots_of_unity(p)
    supp = X.support()
    idx = (int(a) % p) * supp.astype(np.int64) % p
    return complex(np.sum(X.density[supp] * omega[idx]))


def char_fn(X: DistFp) -> CharFn:
    """The full characteristic function phi_X(a) = sum_x rho(x) e(ax/p).

    Uses direct summation over the support (with exact integer argument
    reduction into a premultiplied root table) when |supp| * p is small,
    and a chirp-style full-length transform otherwise; both paths meet the
    1e-9 accuracy contract.
    """
    p = X.p
    supp = X.support()
    if len(supp) * p <= DIRECT_SUM_BUDGET:
        omega = roots_of_unity(p)
        freq = np.arange(p, dtype=np.int64)
        phi = np.zeros(p, dtype=np.complex128)
        for x in supp:
            phi += X.density[x] * omega[freq * int(x) % p]
    else:
        # e(ax/p) has the conjugate sign convention of the forward FFT, and
        # pocketfft falls back to Bluestein's chirp transform at prime sizes.
        phi = np.conj(np.fft.fft(X.density))
    phi[0] = 1.0
    return CharFn(X.field, phi)


def peaking(X: DistFp) -> PeakDist:
    """The peaking of X: frequency weights proportional to |phi_X|^2."""
    return peaking_of_char(char_fn(X))


def peaking_of_char(phi: CharFn) -> PeakDist:
    """Peaking built directly from an already-computed characteristic function."""
    sq = phi.abs_squared()
    mass = float(np.sum(sq))
    return PeakDist(phi, sq / mass, mass)


def density_at(phi: CharFn, y: int) -> float:
    """Pointwise inverse transform rho(y) = (1/p) sum_a phi(a) e(-ay/p).

    Valid when phi is the characteristic function of an actual distribution
    with nonnegative real values (steppings and walk laws), so the inverse
    is a genuine density.
    """
    _require_real_nonneg(phi)
    p = phi.p
    omega = roots_of_unity(p)
    idx = (-int(y)) * np.arange(p, dtype=np.int64) % p
    value = complex(np.sum(phi.values * omega[idx])) / p
    if abs(value.imag) > CHAR_TOL:
        raise ValueError(f"inverse transform at {y} is not real: {value}")
    return value.real


def full_density(phi: CharFn) -> np.ndarray:
    """All p inverse-transform values of a real nonnegative characteristic
    function, clamped of sub-1e-9 negative roundoff."""
    _require_real_nonneg(phi)
    p = phi.p
    values = np.fft.fft(phi.values.real) / p
    if float(np.max(np.abs(values.imag))) > CHAR_TOL:
        raise ValueError("inverse transform has a non-real component")
    rho = values.real
    low = float(np.min(rho))
    if low < -CHAR_TOL:
        raise ValueError(f"inverse transform is negative ({low}); not a density")
    return np.clip(rho, 0.0, None)


def dist_from_char_fn(phi: CharFn) -> DistFp:
    """The distribution whose characteristic function is phi."""
    rho = full_density(phi)
    return DistFp(phi.field, rho / float(np.sum(rho)))


def _require_real_nonneg(phi: CharFn) -> None:
    if float(np.max(np.abs(phi.values.imag))) > CHAR_TOL:
        raise ValueError("characteristic function must be real-valued here")
    if float(np.min(phi.values.real)) < -CHAR_TOL:
        raise ValueError("characteristic function must be nonnegative here")


def char_value_oracle(X: DistFp, a: int) -> complex:
    """Independent slow oracle for phi_X(a): cmath term-by-term summation."""
    total = 0.0 + 0.0j
    for x in X.support():
        total += X.density[x] * cmath.exp(2j * cmath.pi * ((int(a) * int(x)) % X.p) / X.p)
    return total


def verify_fourier_duality(X: DistFp) -> Report:
    """Check the stepping/peaking duality: p * rho_Y(y) = M_X * phi_peak(y).

    Computes the stepping density directly by convolution and the right-hand
    side through the peaking of X, records the worst pointwise discrepancy,
    and also checks that rho_Y(0) equals M_X / p.
    """
    p = X.p
    ctx = GroupCtx(X.field, "additive")
    rho_y = stepping(X, ctx).density
    peak = peaking(X)
    omega = roots_of_unity(p)
    # phi of the peaking, evaluated over all of F_p by direct transform.
    freq = np.arange(p, dtype=np.int64)
    phi_peak = np.conj(np.fft.fft(peak.weights))
    rhs = (peak.mass / p) * phi_peak
    worst = float(np.max(np.abs(rho_y - rhs)))
    report = Report(command="fourier-duality")
    report.note("p", p)
    report.note("mass", peak.mass)
    report.note("rho_y_zero", float(rho_y[0]))
    report.check("duality.max-abs-diff", worst, "<=", CHAR_TOL)
    report.check("eq-rho1", float(rho_y[0]), "==", peak.mass / p, tol=CHAR_TOL)
    return report


def lemma_tail_bound(values: np.ndarray, probs: np.ndarray, delta: float, gamma: float) -> bool:
    """Tail inequality for a bounded nonnegative random variable.

    When E(V) >= (1 - delta) * max(V), the mass of {V >= (1 - gamma) max(V)}
    is at least 1 - delta/gamma. Returns True when the hypothesis holds and
    the bound is satisfied (callers only invoke it on hypothesis instances).
    """
    values = np.asarray(values, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    m = float(np.max(values))
    if m <= 0.0:
        return True
    mean = float(np.sum(values * probs))
    if mean < (1.0 - delta) * m:
        raise ValueError("hypothesis E(V) >= (1-delta) max(V) does not hold")
    tail = float(np.sum(probs[values >= (1.0 - gamma) * m]))
    return tail >= 1.0 - delta / gamma - 1e-12
