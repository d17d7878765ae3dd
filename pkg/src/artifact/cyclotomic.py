"""Exact elements of Z[zeta_p] stored as coefficient vectors.

Entry j is the coefficient of zeta_p^j.  Since 1 + zeta + ... + zeta^{p-1} = 0,
vectors differing by a constant represent the same number; the canonical form
has minimum entry 0.
"""
from __future__ import annotations

import cmath
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np


def _canon(counts) -> tuple[int, ...]:
    lo = min(counts)
    return tuple(int(c) - lo for c in counts)


@contextmanager
def _iv_dps(dps: int):
    # the interval context has no workdps manager
    old = mpmath.iv.dps
    mpmath.iv.dps = dps
    try:
        yield
    finally:
        mpmath.iv.dps = old


@dataclass(frozen=True)
class CyclotomicValue:
    p: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != self.p:
            raise ValueError("counts must have length p")
        object.__setattr__(self, "counts", _canon(self.counts))

    @classmethod
    def integer(cls, p: int, n: int) -> "CyclotomicValue":
        return cls(p, (n,) + (0,) * (p - 1))

    @classmethod
    def zeta(cls, p: int, j: int = 1) -> "CyclotomicValue":
        c = [0] * p
        c[j % p] = 1
        return cls(p, tuple(c))

    @classmethod
    def from_exponents(cls, p: int, exps, weights=None) -> "CyclotomicValue":
        exps = np.asarray(exps, dtype=np.int64).ravel() % p
        if weights is None:
            counts = np.bincount(exps, minlength=p)
        else:
            w = np.asarray(weights).ravel()
            counts = np.zeros(p, dtype=object)
            for j in range(p):
                counts[j] = int(w[exps == j].sum())
        return cls(p, tuple(int(x) for x in counts))

    def __add__(self, other):
        if isinstance(other, int):
            other = CyclotomicValue.integer(self.p, other)
        return CyclotomicValue(self.p, tuple(a + b for a, b in zip(self.counts, other.counts)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicValue(self.p, tuple(-a for a in self.counts))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return CyclotomicValue(self.p, tuple(a * other for a in self.counts))
        p = self.p
        out = [0] * p
        for i, a in enumerate(self.counts):
            if a:
                for j, b in enumerate(other.counts):
                    if b:
                        out[(i + j) % p] += a * b
        return CyclotomicValue(p, tuple(out))

    __rmul__ = __mul__

    def conj(self) -> "CyclotomicValue":
        p = self.p
        return CyclotomicValue(p, tuple(self.counts[(-j) % p] for j in range(p)))

    def abs2(self) -> "CyclotomicValue":
        return self * self.conj()

    def is_integer(self) -> bool:
        return all(c == self.counts[1] for c in self.counts[1:])

    def is_real(self) -> bool:
        return self == self.conj()

    def to_int(self) -> int:
        if not self.is_integer():
            raise ValueError("value is not a rational integer")
        return self.counts[0] - self.counts[1]

    def to_complex(self) -> complex:
        p = self.p
        return sum(c * cmath.exp(2j * cmath.pi * j / p) for j, c in enumerate(self.counts))

    def real_interval(self, dps: int):
        """Interval enclosing the real part, at the given decimal precision."""
        with _iv_dps(dps):
            acc = mpmath.iv.mpf(0)
            for j, c in enumerate(self.counts):
                if c:
                    acc += c * mpmath.iv.cos(2 * mpmath.iv.pi * j / self.p)
            return acc

    def compare_real(self, bound) -> int:
        """Sign of Re(self) - bound for an integer or Fraction bound.

        Exact equality is checked first; otherwise precision grows until the
        enclosing interval excludes the bound.
        """
        bound = Fraction(bound)
        if self.is_integer():
            v = self.to_int()
            return (v > bound) - (v < bound)
        dps = 30
        while dps < 10000:
            iv = self.real_interval(dps)
            with _iv_dps(dps):
                b = mpmath.iv.mpf(bound.numerator) / bound.denominator
                if iv.a > b.b:
                    return 1
                if iv.b < b.a:
                    return -1
            dps *= 2
        raise ArithmeticError("could not separate value from bound")

    def to_json(self, scale: int = 0) -> dict:
        return {"zeta_counts": list(self.counts), "scale": scale}

    def display(self) -> str:
        z = self.to_complex()
        return f"{z.real:.12f}{z.imag:+.12f}i"


def magnitude_power_leq(values, power2: int, bound: int) -> bool:
    """Whether min over values of |v|^power2 <= bound, exactly.

    power2 must be even; |v|^power2 = (v conj v)^(power2/2).
    """
    half = power2 // 2
    for v in values:
        w = v.abs2()
        r = w
        for _ in range(half - 1):
            r = r * w
        if r.compare_real(bound) <= 0:
            return True
    return False
