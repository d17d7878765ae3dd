"""Finite fields F_{p^k} with elements encoded as integers.

An element is stored as its code sum_i c_i p^i, where c_i is the coefficient
of u^i in F_p[u]/(modulus).  Codes are plain ints for scalar work and numpy
integer arrays for batch work; both go through the same lookup tables.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetExceeded, InstanceError

MAX_TABLE_Q = 1 << 12


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


# --- dense polynomials over F_p as lists (little-endian), used to pick moduli

def _trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, b, p):
    a = list(a)
    inv = pow(b[-1], p - 2, p)
    db = len(b) - 1
    while len(a) - 1 >= db and a:
        c = a[-1] * inv % p
        shift = len(a) - 1 - db
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        _trim(a)
    return a


def _pmulmod(a, b, f, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _pmod(_trim(out), f, p)


def _pgcd(a, b, p):
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _irreducible_mod_p(f, p) -> bool:
    """Ben-Or test for a monic f over F_p."""
    k = len(f) - 1
    if k == 1:
        return True
    x = [0, 1]
    h = x
    for _ in range(k // 2):
        # h <- h^p mod f
        r = [1]
        base, e = h, p
        while e:
            if e & 1:
                r = _pmulmod(r, base, f, p)
            base = _pmulmod(base, base, f, p)
            e >>= 1
        h = r
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] = (diff[1] - 1) % p
        if len(_pgcd(f, _trim(diff), p)) != 1:
            return False
    return True


def first_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically first monic irreducible of degree k over F_p.

    Candidates are ordered by the code sum_{i<k} c_i p^i of the lower
    coefficients.
    """
    for code in range(p**k):
        low = [(code // p**i) % p for i in range(k)]
        f = low + [1]
        if low[0] == 0 and k > 1:
            continue
        if _irreducible_mod_p(f, p):
            return tuple(f)
    raise ValueError("no irreducible found")


@lru_cache(maxsize=None)
def _tables(p: int, k: int, modulus: tuple[int, ...]):
    q = p**k
    if q > MAX_TABLE_Q:
        raise BudgetExceeded(f"field tables for q={q} exceed {MAX_TABLE_Q}")
    codes = np.arange(q, dtype=np.int64)
    coords = np.stack([(codes // p**i) % p for i in range(k)], axis=1)
    weights = p ** np.arange(k, dtype=np.int64)
    add = ((coords[:, None, :] + coords[None, :, :]) % p) @ weights
    neg = ((-coords) % p) @ weights
    if k == 1:
        mul = np.outer(codes, codes) % p
    else:
        prod = np.zeros((q, q, 2 * k - 1), dtype=np.int64)
        for i in range(k):
            prod[:, :, i:i + k] += coords[:, None, i:i + 1] * coords[None, :, :]
        prod %= p
        mod = np.array(modulus, dtype=np.int64)
        for top in range(2 * k - 2, k - 1, -1):
            c = prod[:, :, top].copy()
            prod[:, :, top - k:top + 1] = (prod[:, :, top - k:top + 1]
                                           - c[:, :, None] * mod[None, None, :]) % p
        mul = prod[:, :, :k] @ weights
    inv = np.zeros(q, dtype=np.int64)
    rows, cols = np.nonzero(mul == 1)
    inv[rows] = cols
    # trace: x + x^p + ... + x^{p^{k-1}}
    tr = codes.copy()
    frob = codes.copy()
    for _ in range(k - 1):
        fr = np.ones(q, dtype=np.int64)
        for _ in range(p):
            fr = mul[fr, frob]
        frob = fr
        tr = add[tr, frob]
    if np.any(tr >= p):
        raise AssertionError("trace left the prime field")
    # trace form T[i, j] = tr(u^i u^j)
    basis = weights
    tform = np.array([[tr[mul[basis[i], basis[j]]] for j in range(k)] for i in range(k)],
                     dtype=np.int64)
    return {
        "coords": coords, "add": add, "neg": neg, "mul": mul, "inv": inv,
        "trace": tr, "tform": tform,
        "add_l": add.tolist(), "mul_l": mul.tolist(),
        "neg_l": neg.tolist(), "inv_l": inv.tolist(), "trace_l": tr.tolist(),
    }


@dataclass(frozen=True)
class FieldDescriptor:
    p: int
    k: int = 1
    modulus: tuple[int, ...] = ()

    def __post_init__(self):
        if not is_prime(self.p):
            raise InstanceError(f"{self.p} is not prime")
        if self.k < 1:
            raise InstanceError("extension degree must be positive")
        if self.k == 1:
            object.__setattr__(self, "modulus", ())
            return
        mod = tuple(int(c) % self.p for c in self.modulus)
        if not mod:
            mod = first_irreducible(self.p, self.k)
        if len(mod) != self.k + 1 or mod[-1] != 1:
            raise InstanceError("modulus must be monic of degree k")
        if not _irreducible_mod_p(list(mod), self.p):
            raise InstanceError("modulus is reducible")
        object.__setattr__(self, "modulus", mod)

    @property
    def q(self) -> int:
        return self.p**self.k

    @property
    def tables(self):
        return _tables(self.p, self.k, self.modulus)

    # scalar arithmetic on codes
    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        return self.tables["add_l"][a][b]

    def neg(self, a: int) -> int:
        if self.k == 1:
            return (-a) % self.p
        return self.tables["neg_l"][a]

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.k == 1:
            return a * b % self.p
        return self.tables["mul_l"][a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.k == 1:
            return pow(a, self.p - 2, self.p)
        return self.tables["inv_l"][a]

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return self.pow(self.inv(a), -e)
        r, base = 1, a
        while e:
            if e & 1:
                r = self.mul(r, base)
            base = self.mul(base, base)
            e >>= 1
        return r

    def trace(self, a: int) -> int:
        if self.k == 1:
            return a
        return self.tables["trace_l"][a]

    def from_int(self, c: int) -> int:
        """Image of the integer c under Z -> F_p -> F_q."""
        return c % self.p

    # batch arithmetic on numpy code arrays
    def vadd(self, a, b):
        if self.k == 1:
            return (a + b) % self.p
        return self.tables["add"][a, b]

    def vneg(self, a):
        if self.k == 1:
            return (-a) % self.p
        return self.tables["neg"][a]

    def vsub(self, a, b):
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b):
        if self.k == 1:
            return (a * b) % self.p
        return self.tables["mul"][a, b]

    def vtrace(self, a):
        if self.k == 1:
            return a
        return self.tables["trace"][a]

    # text forms
    def format_element(self, a: int) -> str:
        if self.k == 1:
            return str(a)
        return ".".join(str((a // self.p**i) % self.p) for i in range(self.k))

    def parse_element(self, s: str) -> int:
        s = s.strip()
        try:
            if self.k == 1:
                return int(s) % self.p
            digits = [int(x) for x in s.split(".")]
        except ValueError as exc:
            raise InstanceError(f"bad field element {s!r}") from exc
        if len(digits) > self.k or any(not 0 <= x < self.p for x in digits):
            raise InstanceError(f"bad field element {s!r}")
        return sum(x * self.p**i for i, x in enumerate(digits))

    def element(self, code: int) -> "FieldElement":
        return FieldElement(self, code)

    def __str__(self):
        if self.k == 1:
            return f"{self.p}^1"
        return f"{self.p}^{self.k}/" + ".".join(str(c) for c in self.modulus)

    @classmethod
    def parse(cls, s: str) -> "FieldDescriptor":
        s = s.strip()
        try:
            head, _, mod = s.partition("/")
            if "^" in head:
                p, k = (int(x) for x in head.split("^"))
            else:
                p, k = int(head), 1
            modulus = tuple(int(x) for x in mod.split(".")) if mod else ()
        except ValueError as exc:
            raise InstanceError(f"bad field descriptor {s!r}") from exc
        return cls(p, k, modulus)

    def extension(self, s: int) -> tuple["FieldDescriptor", np.ndarray]:
        """The degree-s extension and the embedding of this field's codes."""
        return _extension(self, s)


@lru_cache(maxsize=None)
def _extension(fd: FieldDescriptor, s: int):
    big = FieldDescriptor(fd.p, fd.k * s)
    if s == 1:
        return fd, np.arange(fd.q, dtype=np.int64)
    if fd.k == 1:
        return big, np.arange(fd.p, dtype=np.int64)
    # image of u: a root of fd.modulus in the big field
    root = None
    for r in range(big.q):
        acc = 0
        for c in reversed(fd.modulus):
            acc = big.add(big.mul(acc, r), c)
        if acc == 0:
            root = r
            break
    if root is None:
        raise AssertionError("no root of the modulus in the extension")
    emb = np.zeros(fd.q, dtype=np.int64)
    powers = [big.pow(root, i) for i in range(fd.k)]
    for code in range(fd.q):
        acc = 0
        for i in range(fd.k):
            c = (code // fd.p**i) % fd.p
            acc = big.add(acc, big.mul(c, powers[i]))
        emb[code] = acc
    return big, emb


@dataclass(frozen=True)
class FieldElement:
    fd: FieldDescriptor
    code: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        return tuple((self.code // self.fd.p**i) % self.fd.p for i in range(self.fd.k))

    def __add__(self, other):
        return FieldElement(self.fd, self.fd.add(self.code, other.code))

    def __sub__(self, other):
        return FieldElement(self.fd, self.fd.sub(self.code, other.code))

    def __mul__(self, other):
        return FieldElement(self.fd, self.fd.mul(self.code, other.code))

    def __neg__(self):
        return FieldElement(self.fd, self.fd.neg(self.code))

    def __truediv__(self, other):
        return FieldElement(self.fd, self.fd.mul(self.code, self.fd.inv(other.code)))

    def __pow__(self, e: int):
        return FieldElement(self.fd, self.fd.pow(self.code, e))

    def __bool__(self):
        return self.code != 0

    def __str__(self):
        return self.fd.format_element(self.code)


def trace(x: FieldElement | int, fd: FieldDescriptor) -> int:
    code = x.code if isinstance(x, FieldElement) else x
    return fd.trace(code)
