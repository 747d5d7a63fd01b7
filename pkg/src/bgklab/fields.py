"""Prime-field arithmetic, multiplicative subgroups, cosets, and group contexts.

Residues are exact Python integers in [0, p-1]; nothing in this module uses
floating point. All types are immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, List, Literal, Tuple

MAX_PRIME = 2**31 - 1

# Witness set proven sufficient for deterministic Miller-Rabin below 3.3e24,
# which covers every p <= 2^31 - 1 we accept.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

Mode = Literal["additive", "multiplicative"]


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality check for n < 2^64."""
    if n < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % small == 0:
            return n == small
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> List[Tuple[int, int]]:
    """Prime factorization by trial division, as (prime, exponent) pairs."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: List[Tuple[int, int]] = []
    for q in (2, 3):
        e = 0
        while n % q == 0:
            n //= q
            e += 1
        if e:
            out.append((q, e))
    f = 5
    while f * f <= n:
        for q in (f, f + 2):
            e = 0
            while n % q == 0:
                n //= q
                e += 1
            if e:
                out.append((q, e))
        f += 6
    if n > 1:
        out.append((n, 1))
    return out


def divisors(n: int) -> List[int]:
    """All positive divisors of n, sorted ascending."""
    divs = [1]
    for q, e in factorize(n):
        divs = [d * q**k for d in divs for k in range(e + 1)]
    return sorted(divs)


@dataclass(frozen=True)
class PrimeField(object):
    """The ambient prime field F_p. `p` must be prime and at most 2^31 - 1."""

    p: int

    def __post_init__(self) -> None:
        if not isinstance(self.p, int):
            raise TypeError(f"p must be an int, got {type(self.p).__name__}")
        if self.p > MAX_PRIME:
            raise ValueError(f"p={self.p} exceeds the 2^31-1 arithmetic cap")
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")

    def residue(self, x: int) -> int:
        return x % self.p

    def inv(self, a: int) -> int:
        """Multiplicative inverse of a nonzero residue."""
        a %= self.p
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse mod {self.p}")
        return pow(a, self.p - 2, self.p)


@lru_cache(maxsize=None)
def _primitive_root(p: int) -> int:
    if p == 2:
        return 1
    prime_factors = [q for q, _ in factorize(p - 1)]
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in prime_factors):
            return g
    raise AssertionError(f"no primitive root found mod {p}")  # unreachable for prime p


def primitive_root(field: PrimeField) -> int:
    """Smallest generator of F_p^x (the residue 1 when p = 2)."""
    return _primitive_root(field.p)


@dataclass(frozen=True)
class Subgroup(object):
    """A multiplicative subgroup of F_p^x, stored as a sorted element tuple."""

    field: PrimeField
    elements: Tuple[int, ...]

    def __post_init__(self) -> None:
        p = self.field.p
        elems = tuple(sorted(set(self.elements)))
        object.__setattr__(self, "elements", elems)
        if not elems or elems[0] < 1 or elems[-1] >= p:
            raise ValueError("subgroup elements must be residues in [1, p-1]")
        if (p - 1) % len(elems) != 0:
            raise ValueError(f"order {len(elems)} does not divide p-1 = {p - 1}")
        if 1 not in elems:
            raise ValueError("subgroup must contain 1")

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in set(self.elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)


def subgroup_of_order(field: PrimeField, n: int) -> Subgroup:
    """The unique subgroup of F_p^x of order n, i.e. the d-th powers with d = (p-1)/n."""
    p = field.p
    if n < 1 or (p - 1) % n != 0:
        raise ValueError(f"order {n} does not divide p-1 = {p - 1}")
    g = primitive_root(field)
    step = pow(g, (p - 1) // n, p)
    elems = []
    x = 1
    for _ in range(n):
        elems.append(x)
        x = x * step % p
    return Subgroup(field, tuple(elems))


def cosets(sub: Subgroup) -> List[int]:
    """One representative per multiplicative coset of the subgroup in F_p^x.

    Representatives are the smallest residue of each coset, ascending; the
    cosets partition F_p^x into (p-1)/|H| blocks of size |H|.
    """
    p = sub.field.p
    covered = bytearray(p)
    reps: List[int] = []
    for a in range(1, p):
        if covered[a]:
            continue
        reps.append(a)
        for h in sub.elements:
            covered[a * h % p] = 1
    return reps


@dataclass(frozen=True)
class GroupCtx(object):
    """F_p viewed as a finite group: additive on all residues, or
    multiplicative on the nonzero residues."""

    field: PrimeField
    mode: Mode

    def __post_init__(self) -> None:
        if self.mode not in ("additive", "multiplicative"):
            raise ValueError(f"unknown group mode {self.mode!r}")

    @property
    def identity(self) -> int:
        return 0 if self.mode == "additive" else 1

    @property
    def carrier_size(self) -> int:
        return self.field.p if self.mode == "additive" else self.field.p - 1

    def contains(self, a: int) -> bool:
        if not 0 <= a < self.field.p:
            return False
        return self.mode == "additive" or a != 0

    def carrier(self) -> range:
        start = 0 if self.mode == "additive" else 1
        return range(start, self.field.p)

    def op(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        if self.mode == "additive":
            return (a + b) % self.field.p
        return a * b % self.field.p

    def inv(self, a: int) -> int:
        self._check(a)
        if self.mode == "additive":
            return (-a) % self.field.p
        return self.field.inv(a)

    def _check(self, a: int) -> None:
        if not self.contains(a):
            raise ValueError(
                f"residue {a} is not in the {self.mode} carrier mod {self.field.p}"
            )


def group_op(ctx: GroupCtx, a: int, b: int) -> int:
    """Exact group operation in the context carrier."""
    return ctx.op(a, b)


def group_inv(ctx: GroupCtx, a: int) -> int:
    """Exact group inverse in the context carrier."""
    return ctx.inv(a)
