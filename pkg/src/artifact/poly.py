"""Polynomials in F_q[t]: arithmetic, gcd, irreducibles, factorization, Moebius."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import InstanceError
from .field import FieldDescriptor, FieldElement

NEG_INF = float("-inf")


def _strip(c) -> tuple[int, ...]:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Poly:
    fd: FieldDescriptor
    c: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "c", _strip(int(x) for x in self.c))

    # constructors
    @classmethod
    def zero(cls, fd):
        return cls(fd, ())

    @classmethod
    def one(cls, fd):
        return cls(fd, (1,))

    @classmethod
    def const(cls, fd, a: int):
        return cls(fd, (a,))

    @classmethod
    def t_power(cls, fd, k: int):
        return cls(fd, (0,) * k + (1,))

    @classmethod
    def from_index(cls, fd, idx: int, deg: int | None = None, monic: bool = False):
        """Polynomial whose coefficient codes are the base-q digits of idx."""
        q = fd.q
        digits = []
        while idx:
            digits.append(idx % q)
            idx //= q
        if deg is not None:
            digits += [0] * (deg - len(digits))
            if monic:
                digits = digits[:deg] + [1]
        return cls(fd, digits)

    # basic properties
    @property
    def degree(self):
        return len(self.c) - 1 if self.c else NEG_INF

    @property
    def deg(self):
        return self.degree

    def norm(self) -> int:
        """|g| = q^deg g, with |0| = 0."""
        return self.fd.q ** (len(self.c) - 1) if self.c else 0

    @property
    def lc(self) -> int:
        return self.c[-1] if self.c else 0

    def is_zero(self) -> bool:
        return not self.c

    def is_monic(self) -> bool:
        return bool(self.c) and self.c[-1] == 1

    def coeff(self, i: int) -> int:
        return self.c[i] if 0 <= i < len(self.c) else 0

    def element(self, i: int) -> FieldElement:
        return FieldElement(self.fd, self.coeff(i))

    def index(self) -> int:
        return sum(x * self.fd.q**i for i, x in enumerate(self.c))

    # arithmetic
    def __add__(self, other: "Poly") -> "Poly":
        fd = self.fd
        n = max(len(self.c), len(other.c))
        return Poly(fd, [fd.add(self.coeff(i), other.coeff(i)) for i in range(n)])

    def __neg__(self) -> "Poly":
        return Poly(self.fd, [self.fd.neg(x) for x in self.c])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        fd = self.fd
        if isinstance(other, int):
            return Poly(fd, [fd.mul(x, other) for x in self.c])
        if not self.c or not other.c:
            return Poly(fd)
        out = [0] * (len(self.c) + len(other.c) - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(other.c):
                    if b:
                        out[i + j] = fd.add(out[i + j], fd.mul(a, b))
        return Poly(fd, out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Poly":
        r, base = Poly.one(self.fd), self
        while e:
            if e & 1:
                r = r * base
            base = base * base
            e >>= 1
        return r

    def shift(self, k: int) -> "Poly":
        """Multiply by t^k (k >= 0)."""
        return Poly(self.fd, (0,) * k + self.c) if self.c else self

    def __divmod__(self, other: "Poly"):
        return poly_euclid(self, other)

    def __floordiv__(self, other):
        return poly_euclid(self, other)[0]

    def __mod__(self, other):
        return poly_euclid(self, other)[1]

    def monic(self) -> "Poly":
        if not self.c:
            return self
        return self * self.fd.inv(self.lc)

    def __call__(self, x: int) -> int:
        fd = self.fd
        acc = 0
        for a in reversed(self.c):
            acc = fd.add(fd.mul(acc, x), a)
        return acc

    def map_field(self, big: FieldDescriptor, emb) -> "Poly":
        return Poly(big, [int(emb[x]) for x in self.c])

    # text form
    def __str__(self):
        if not self.c:
            return "0"
        return ",".join(self.fd.format_element(x) for x in self.c)

    @classmethod
    def parse(cls, fd: FieldDescriptor, s: str) -> "Poly":
        s = s.strip()
        if s in ("", "0"):
            return cls(fd)
        return cls(fd, [fd.parse_element(x) for x in s.split(",")])

    def pretty(self) -> str:
        if not self.c:
            return "0"
        terms = []
        for i in range(len(self.c) - 1, -1, -1):
            a = self.c[i]
            if not a:
                continue
            coef = self.fd.format_element(a)
            if i == 0:
                terms.append(coef)
            else:
                mon = "t" if i == 1 else f"t^{i}"
                terms.append(mon if a == 1 else f"{coef}*{mon}")
        return "+".join(terms)


def poly_euclid(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    """Quotient and remainder with a = q b + r, deg r < deg b."""
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    fd = a.fd
    r = list(a.c)
    db = len(b.c) - 1
    inv = fd.inv(b.lc)
    quot = [0] * max(0, len(r) - db)
    for top in range(len(r) - 1, db - 1, -1):
        c = r[top]
        if not c:
            continue
        c = fd.mul(c, inv)
        s = top - db
        quot[s] = c
        for i, bi in enumerate(b.c):
            r[s + i] = fd.sub(r[s + i], fd.mul(c, bi))
    return Poly(fd, quot), Poly(fd, r[:db] if db > 0 else [])


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd (zero only if both inputs vanish)."""
    while not b.is_zero():
        a, b = b, poly_euclid(a, b)[1]
    return a.monic()


def gcd_many(polys) -> Poly:
    g = None
    for p in polys:
        g = p.monic() if g is None else poly_gcd(g, p)
        if g.degree == 0:
            return g
    return g


def poly_xgcd(a: Poly, b: Poly):
    """(g, s, t) with s a + t b = g monic."""
    fd = a.fd
    r0, r1 = a, b
    s0, s1 = Poly.one(fd), Poly.zero(fd)
    t0, t1 = Poly.zero(fd), Poly.one(fd)
    while not r1.is_zero():
        qt, r = poly_euclid(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - qt * s1
        t0, t1 = t1, t0 - qt * t1
    inv = fd.inv(r0.lc)
    return r0 * inv, s0 * inv, t0 * inv


def monics(fd: FieldDescriptor, deg: int):
    """All monic polynomials of exact degree deg, in index order."""
    for idx in range(fd.q**deg):
        yield Poly.from_index(fd, idx, deg, monic=True)


def all_polys(fd: FieldDescriptor, P: int):
    """All polynomials with |g| < q^P, in index order."""
    for idx in range(fd.q**P):
        yield Poly.from_index(fd, idx)


@lru_cache(maxsize=None)
def _irreducibles_upto(fd: FieldDescriptor, D: int) -> tuple[Poly, ...]:
    found: list[Poly] = []
    for deg in range(1, D + 1):
        small = [p for p in found if 2 * p.degree <= deg]
        for g in monics(fd, deg):
            if all(not poly_euclid(g, p)[1].is_zero() for p in small):
                found.append(g)
    return tuple(found)


def irreducibles(fd: FieldDescriptor, D: int) -> list[Poly]:
    """All monic irreducibles of degree <= D, sorted by (degree, index)."""
    if D < 1:
        raise ValueError("D must be at least 1")
    return list(_irreducibles_upto(fd, D))


def necklace_count(q: int, n: int) -> int:
    """Number of monic irreducibles of degree n over F_q."""
    total = 0
    for d in range(1, n + 1):
        if n % d == 0:
            total += _int_mobius(n // d) * q**d
    return total // n


def _int_mobius(n: int) -> int:
    res, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            res = -res
        p += 1
    return -res if n > 1 else res


def factor(g: Poly) -> list[tuple[Poly, int]]:
    """Factorization of a nonzero polynomial into monic irreducible powers.

    The unit is dropped.  Trial division by irreducibles in increasing degree.
    """
    if g.is_zero():
        raise ValueError("cannot factor zero")
    fd = g.fd
    g = g.monic()
    out = []
    deg = 1
    while g.degree >= 2 * deg:
        for p in irreducibles(fd, deg):
            if p.degree != deg:
                continue
            e = 0
            while True:
                qt, r = poly_euclid(g, p)
                if not r.is_zero():
                    break
                g, e = qt, e + 1
            if e:
                out.append((p, e))
        deg += 1
    if g.degree >= 1:
        out.append((g, 1))
    out.sort(key=lambda pe: (pe[0].degree, pe[0].index()))
    return out


def mobius(g: Poly) -> int:
    if not g.is_monic():
        raise ValueError("mobius requires a monic polynomial")
    res = 1
    for _, e in factor(g):
        if e > 1:
            return 0
        res = -res
    return res


def is_irreducible(g: Poly) -> bool:
    f = factor(g)
    return len(f) == 1 and f[0][1] == 1


def crt_pair(m1: Poly, m2: Poly) -> tuple[Poly, Poly]:
    """Idempotents (e1, e2) with e1 = 1 mod m1, 0 mod m2 and vice versa."""
    g, s, t = poly_xgcd(m1, m2)
    if g.degree != 0:
        raise ValueError("moduli not coprime")
    m = m1 * m2
    e1 = (t * m2) % m
    e2 = (s * m1) % m
    return e1, e2


def parse_poly_vector(fd, items) -> tuple[Poly, ...]:
    try:
        return tuple(Poly.parse(fd, s) if isinstance(s, str) else Poly(fd, s) for s in items)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"bad polynomial vector {items!r}") from exc


def product(polys, fd) -> Poly:
    r = Poly.one(fd)
    for p in polys:
        r = r * p
    return r


def digits_box(fd: FieldDescriptor, n: int, P: int):
    """All n-tuples of polynomials with |x| < q^P (Python objects; for oracles)."""
    return itertools.product(list(all_polys(fd, P)), repeat=n)
