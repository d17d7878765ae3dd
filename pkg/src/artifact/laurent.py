"""Truncated elements of F_q((1/t)) with an explicit precision floor.

Digits at exponents <= floor are unknown; floor = -inf marks an exact element.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import PrecisionError
from .field import FieldDescriptor
from .poly import NEG_INF, Poly, poly_euclid


@dataclass(frozen=True)
class LaurentElement:
    fd: FieldDescriptor
    items: tuple[tuple[int, int], ...] = ()  # (exponent, nonzero code), descending
    floor: float = NEG_INF

    def __post_init__(self):
        clean = sorted(((int(i), int(c)) for i, c in self.items if c and i > self.floor),
                       reverse=True)
        object.__setattr__(self, "items", tuple(clean))

    # constructors
    @classmethod
    def from_digits(cls, fd, digits: dict, floor=NEG_INF):
        return cls(fd, tuple(digits.items()), floor)

    @classmethod
    def from_poly(cls, g: Poly):
        return cls(g.fd, tuple(enumerate(g.c)))

    @classmethod
    def from_fraction(cls, num: Poly, den: Poly, depth: int):
        """num/den expanded with digits known down to exponent -depth."""
        fd = num.fd
        qt, r = poly_euclid(num, den)
        digits = dict(enumerate(qt.c))
        inv = fd.inv(den.lc)
        dd = den.degree
        rem = r
        for e in range(1, depth + 1):
            rem = rem.shift(1)
            c = fd.mul(rem.coeff(dd), inv)
            if c:
                digits[-e] = c
                rem = rem - den * c
        return cls(fd, tuple(digits.items()), -depth - 1)

    @classmethod
    def from_digit_vector(cls, fd, vec, top: int = -1, floor=None):
        """Digits vec[0], vec[1], ... at exponents top, top-1, ..."""
        vec = [int(x) for x in vec]
        if floor is None:
            floor = top - len(vec)
        return cls(fd, tuple((top - i, c) for i, c in enumerate(vec)), floor)

    # queries
    def digit(self, i: int) -> int:
        if i <= self.floor:
            raise PrecisionError(f"digit {i} is at or below the precision floor {self.floor}")
        for e, c in self.items:
            if e == i:
                return c
        return 0

    def digit_vector(self, top: int, bottom: int) -> list[int]:
        """Digits at exponents top, top-1, ..., bottom."""
        if bottom <= self.floor:
            raise PrecisionError(f"digit {bottom} is at or below the precision floor {self.floor}")
        d = dict(self.items)
        return [d.get(i, 0) for i in range(top, bottom - 1, -1)]

    @property
    def top(self):
        return self.items[0][0] if self.items else NEG_INF

    def upper(self):
        """Exponent bound u with |alpha| <= q^u (top if known, else floor)."""
        return self.items[0][0] if self.items else self.floor

    @property
    def ord(self):
        if self.items:
            return self.items[0][0]
        if self.floor == NEG_INF:
            return NEG_INF
        raise PrecisionError("order unknown: all known digits vanish")

    def is_exact(self) -> bool:
        return self.floor == NEG_INF

    def is_zero(self) -> bool:
        """True only when alpha is known to vanish exactly."""
        return not self.items and self.floor == NEG_INF

    def frac(self) -> "LaurentElement":
        return LaurentElement(self.fd, tuple((i, c) for i, c in self.items if i < 0), self.floor)

    def truncate(self, floor: int) -> "LaurentElement":
        return LaurentElement(self.fd, self.items, max(self.floor, floor))

    def shift(self, k: int) -> "LaurentElement":
        """Multiply by t^k."""
        return LaurentElement(self.fd, tuple((i + k, c) for i, c in self.items),
                              self.floor + k)

    # arithmetic
    def __add__(self, other: "LaurentElement") -> "LaurentElement":
        fd = self.fd
        floor = max(self.floor, other.floor)
        d = dict(self.items)
        for i, c in other.items:
            d[i] = fd.add(d.get(i, 0), c)
        return LaurentElement(fd, tuple(d.items()), floor)

    def __neg__(self):
        return LaurentElement(self.fd, tuple((i, self.fd.neg(c)) for i, c in self.items),
                              self.floor)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other) -> "LaurentElement":
        fd = self.fd
        if isinstance(other, Poly):
            other = LaurentElement.from_poly(other)
        if isinstance(other, int):
            return LaurentElement(fd, tuple((i, fd.mul(c, other)) for i, c in self.items),
                                  self.floor)
        floor = max(_addx(self.floor, other.upper()), _addx(other.floor, self.upper()))
        d: dict[int, int] = {}
        for i, a in self.items:
            for j, b in other.items:
                if i + j > floor:
                    d[i + j] = fd.add(d.get(i + j, 0), fd.mul(a, b))
        return LaurentElement(fd, tuple(d.items()), floor)

    __rmul__ = __mul__

    def __str__(self):
        body = " + ".join(f"{self.fd.format_element(c)}*t^{i}" for i, c in self.items) or "0"
        if self.floor != NEG_INF:
            body += f" + O(t^{int(self.floor)})"
        return body


def _addx(a, b):
    if a == NEG_INF or b == NEG_INF:
        return NEG_INF
    return a + b


def laurent_vector_from_digits(fd, rows, top: int = -1):
    return tuple(LaurentElement.from_digit_vector(fd, r, top) for r in rows)


def norm_exp(alpha: LaurentElement):
    """Exponent of |alpha| (ord), -inf for zero."""
    return alpha.ord


def vector_ord(vec) -> float:
    """Max order over a vector of Laurent elements; -inf when all vanish."""
    return max((a.ord for a in vec), default=NEG_INF)


def isfinite(x) -> bool:
    return x != NEG_INF and not (isinstance(x, float) and math.isinf(x))
