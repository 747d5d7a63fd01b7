"""Exact combinatorics of finite sets in a group context.

Representation functions, multiplicative/additive energy, sumsets and
product sets, all by exact integer counting. Energy goes through the
second moment of the representation function (O(|A||B|)); the quadruple
loop survives only as a test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Tuple

import numpy as np

from .fields import GroupCtx


@dataclass(frozen=True)
class FpSet(object):
    """A finite subset of a group-context carrier, sorted and duplicate-free."""

    ctx: GroupCtx
    elements: Tuple[int, ...]

    def __post_init__(self) -> None:
        elems = tuple(sorted(set(int(x) for x in self.elements)))
        for x in elems:
            if not self.ctx.contains(x):
                raise ValueError(
                    f"{x} is not in the {self.ctx.mode} carrier mod {self.ctx.field.p}"
                )
        object.__setattr__(self, "elements", elems)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in set(self.elements)

    def as_array(self) -> np.ndarray:
        return np.array(self.elements, dtype=np.int64)

    def with_ctx(self, ctx: GroupCtx) -> "FpSet":
        return FpSet(ctx, self.elements)


def fp_set(ctx: GroupCtx, elements: Iterable[int]) -> FpSet:
    return FpSet(ctx, tuple(elements))


@dataclass(frozen=True)
class RepFn(object):
    """Exact representation counts r(x) = #{(a, b) in A x B : ab = x}."""

    ctx: GroupCtx
    counts: Dict[int, int]
    total: int

    def __call__(self, x: int) -> int:
        return self.counts.get(x, 0)

    def as_array(self) -> np.ndarray:
        arr = np.zeros(self.ctx.field.p, dtype=np.int64)
        for x, c in self.counts.items():
            arr[x] = c
        return arr

    def support(self) -> Tuple[int, ...]:
        return tuple(sorted(self.counts))


def _pairwise_products(ctx: GroupCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    p = ctx.field.p
    if ctx.mode == "additive":
        return (a[:, None] + b[None, :]) % p
    return (a[:, None] * b[None, :]) % p


def _check_same_ctx(A: FpSet, B: FpSet) -> None:
    if A.ctx != B.ctx:
        raise ValueError("sets live in different group contexts")


def rep_fn(A: FpSet, B: FpSet) -> RepFn:
    """Representation function of the product set A*B, by exact counting."""
    _check_same_ctx(A, B)
    if len(A) == 0 or len(B) == 0:
        return RepFn(A.ctx, {}, 0)
    prods = _pairwise_products(A.ctx, A.as_array(), B.as_array())
    values, counts = np.unique(prods.ravel(), return_counts=True)
    table = {int(v): int(c) for v, c in zip(values, counts)}
    return RepFn(A.ctx, table, len(A) * len(B))


def energy(A: FpSet, B: FpSet) -> int:
    """E(A, B) = sum_x r(x)^2 = #{(a1, a2, b1, b2) : a1 b1 = a2 b2}, exactly."""
    _check_same_ctx(A, B)
    if len(A) == 0 or len(B) == 0:
        return 0
    prods = _pairwise_products(A.ctx, A.as_array(), B.as_array())
    _, counts = np.unique(prods.ravel(), return_counts=True)
    return int(np.sum(counts * counts))


def energy_quadruple_oracle(A: FpSet, B: FpSet) -> int:
    """Quadruple-loop energy count; test oracle only (use for |A|,|B| <= 32)."""
    _check_same_ctx(A, B)
    ctx = A.ctx
    total = 0
    for a1 in A:
        for a2 in A:
            for b1 in B:
                for b2 in B:
                    if ctx.op(a1, b1) == ctx.op(a2, b2):
                        total += 1
    return total


def normalized_energy(A: FpSet) -> float:
    """e(A) = E(A, A) / |A|^3, always in (0, 1]; equals 1 exactly on subgroups."""
    if len(A) == 0:
        raise ValueError("normalized energy of the empty set is undefined")
    return energy(A, A) / len(A) ** 3


def normalized_energy_exact(A: FpSet) -> Fraction:
    """e(A) as an exact rational, for certificate-grade comparisons."""
    if len(A) == 0:
        raise ValueError("normalized energy of the empty set is undefined")
    return Fraction(energy(A, A), len(A) ** 3)


def inv_set(A: FpSet) -> FpSet:
    """The set of group inverses of the elements of A."""
    ctx = A.ctx
    return FpSet(ctx, tuple(ctx.inv(x) for x in A))


def op_set(A: FpSet, B: FpSet) -> FpSet:
    """The sumset or product set A*B (per the context operation)."""
    _check_same_ctx(A, B)
    if len(A) == 0 or len(B) == 0:
        return FpSet(A.ctx, ())
    prods = _pairwise_products(A.ctx, A.as_array(), B.as_array())
    return FpSet(A.ctx, tuple(int(v) for v in np.unique(prods.ravel())))


@dataclass(frozen=True)
class ExpansionStats(object):
    """Measured sumset/product-set growth of a set with both structures."""

    sum_size: int
    prod_size: int
    exponent: float


def expansion_stats(A: FpSet) -> ExpansionStats:
    """max(|A+A|, |A.A|) growth, reported as an exponent over |A|.

    Measurement only: no specific growth exponent is asserted, because the
    sum-product theorem's constant is ineffective at this scale.
    """
    if len(A) < 2:
        raise ValueError("expansion stats need |A| >= 2")
    if 0 in A:
        raise ValueError("expansion stats need A inside the nonzero residues")
    field = A.ctx.field
    add = GroupCtx(field, "additive")
    mul = GroupCtx(field, "multiplicative")
    A_add = A.with_ctx(add)
    A_mul = A.with_ctx(mul)
    sum_size = len(op_set(A_add, A_add))
    prod_size = len(op_set(A_mul, A_mul))
    exponent = math.log(max(sum_size, prod_size)) / math.log(len(A))
    return ExpansionStats(sum_size=sum_size, prod_size=prod_size, exponent=exponent)
