"""Exact exponential sums: complete sums mod g, the archimedean integral, box sums."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import batch
from .cyclotomic import CyclotomicValue
from .errors import InstabilityError, PrecisionError, check_budget
from .forms import FormSystem, ShiftedSystem, shift as make_shift
from .laurent import LaurentElement
from .poly import NEG_INF, Poly


@dataclass(frozen=True)
class NormalizedSum:
    """The number value * q^scale."""

    value: CyclotomicValue
    scale: int
    q: int

    def _aligned(self, other):
        s = min(self.scale, other.scale)
        return (self.value * self.q ** (self.scale - s), other.value * self.q ** (other.scale - s))

    def __eq__(self, other):
        if not isinstance(other, NormalizedSum):
            return NotImplemented
        a, b = self._aligned(other)
        return a == b

    def __hash__(self):
        return hash((self.value, self.scale))

    def __add__(self, other):
        s = min(self.scale, other.scale)
        a, b = self._aligned(other)
        return NormalizedSum(a + b, s, self.q)

    def __mul__(self, other):
        if isinstance(other, NormalizedSum):
            return NormalizedSum(self.value * other.value, self.scale + other.scale, self.q)
        return NormalizedSum(self.value * other, self.scale, self.q)

    def is_rational(self) -> bool:
        return self.value.is_integer()

    def as_fraction(self) -> Fraction:
        return Fraction(self.value.to_int()) * Fraction(self.q) ** self.scale

    def to_json(self) -> dict:
        return self.value.to_json(self.scale)

    def to_complex(self) -> complex:
        return self.value.to_complex() * float(self.q) ** self.scale


def one_sum(q: int, p: int) -> NormalizedSum:
    return NormalizedSum(CyclotomicValue.integer(p, 1), 0, q)


def _hist_chunk(sh: ShiftedSystem, P: int, modulus, start: int, stop: int):
    Y = batch.box_digits(sh.fd, sh.n, P, start, stop)
    vals = sh.eval_batch(Y)
    if modulus is not None:
        vals = batch.bmod(sh.fd, vals, modulus)
    return batch.histogram_from_rows([vals], sh.fd.q, vals.shape[1:])


@lru_cache(maxsize=64)
def value_histogram(sh: ShiftedSystem, P: int, modulus: Poly | None = None,
                    workers: int = 1, budget=None) -> batch.Histogram:
    """Multiset of F(y) (reduced mod modulus if given) over |y| < q^P."""
    fd = sh.fd
    total = fd.q ** (sh.n * P)
    check_budget(total, budget, "box enumeration")
    L = sh.value_degree_bound(P) + 1 if P > 0 else 1
    if modulus is not None:
        L = modulus.degree
    shape = (sh.R, L)
    if P < 1:
        raise ValueError("box size must be positive")
    parts = batch.run_chunks(_hist_chunk, [(sh, P, modulus, s, e)
                                           for s, e in batch.chunk_ranges(total)], workers)
    return batch.merge_histograms(parts, fd.q, shape)


def _sums_from_histogram(fd, hist: batch.Histogram, alpha_rows: np.ndarray) -> list[CyclotomicValue]:
    """sum_w count(w) psi(alpha . w) for each row of alpha digits.

    alpha_rows has shape (Na, R, L) with alpha_rows[:, k, j] the digit of
    t^{-1-j} in alpha_k; histogram values have shape (R, L).
    """
    Na = alpha_rows.shape[0]
    A = alpha_rows.reshape(Na, -1)
    out = []
    for s, e in batch.chunk_ranges(Na, 512):
        E = batch.char_exponents(fd, A[s:e], hist.values)
        C = batch.weighted_exponent_counts(E, hist.counts, fd.p)
        out.extend(CyclotomicValue(fd.p, tuple(int(x) for x in row)) for row in C)
    return out


def _fraction_digits(fd, a: Poly, g: Poly, L: int) -> list[int]:
    """Digits of t^{-1}, ..., t^{-L} in a/g."""
    x = LaurentElement.from_fraction(a % g, g, L)
    return x.digit_vector(-1, -L)


def complete_sums(sh: ShiftedSystem, g: Poly, a_list, budget=None) -> list[NormalizedSum]:
    """S_g(a) = |g|^{-n} sum_{|y|<|g|} psi(a.F(y)/g) for each a in a_list."""
    if g.is_zero():
        raise ZeroDivisionError("modulus must be nonzero")
    fd = sh.fd
    D = g.degree
    scale = -sh.n * D
    if D == 0:
        return [NormalizedSum(CyclotomicValue.integer(fd.p, 1), 0, fd.q) for _ in a_list]
    hist = value_histogram(sh, D, g, budget=budget)
    rows = np.array([[_fraction_digits(fd, ak, g, D) for ak in a] for a in a_list],
                    dtype=np.int64).reshape(len(a_list), sh.R, D)
    vals = _sums_from_histogram(fd, hist, rows)
    return [NormalizedSum(v, scale, fd.q) for v in vals]


def complete_sum(sh: ShiftedSystem, g: Poly, a, budget=None) -> NormalizedSum:
    return complete_sums(sh, g, [tuple(a)], budget)[0]


def gamma_order(gamma) -> float:
    return max((x.ord for x in gamma), default=NEG_INF)


def sufficient_depth(d: int, gamma) -> int:
    """Smallest depth at which truncating v cannot change psi(gamma f(v)).

    Digits of v below t^{-L} change gamma f(v) only in exponents at most
    ord(gamma) - L - d, which is <= -2 once L >= ord(gamma) - d + 2.
    """
    o = gamma_order(gamma)
    if o == NEG_INF:
        return 0
    return max(0, int(o) - d + 2)


def default_depth(gamma) -> int:
    o = gamma_order(gamma)
    return max(0, int(o) if o != NEG_INF else 0) + 1


def _archimedean_at_depth(sys: FormSystem, gamma, L: int, budget=None) -> NormalizedSum:
    fd, d = sys.fd, sys.d
    if L == 0:
        return NormalizedSum(CyclotomicValue.integer(fd.p, 1), 0, fd.q)
    hist = value_histogram(make_shift(sys), L, budget=budget)
    width = d * (L - 1) + 1
    # digit of t^{-1-j} in gamma_k t^{-dL} is the digit of t^{dL-1-j} in gamma_k
    row = np.array([[g.digit(d * L - 1 - j) for j in range(width)] for g in gamma],
                   dtype=np.int64)
    val = _sums_from_histogram(fd, hist, row[None, :, :])[0]
    return NormalizedSum(val, -sys.n * L, fd.q)


def archimedean_integral(sys: FormSystem, gamma, L: int | None = None, certify: bool = True,
                         budget=None) -> NormalizedSum:
    """Integral over T^n of psi(gamma . f(v)), as an exact finite average.

    The value at depth L is recomputed at depth L+1 and both must agree.
    """
    if len(gamma) != sys.R:
        raise ValueError("gamma must have R components")
    need = sufficient_depth(sys.d, gamma)
    if L is None:
        L = default_depth(gamma)
    if L < need:
        raise PrecisionError(f"depth {L} below the sufficient depth {need}")
    if all(g.is_zero() for g in gamma):
        return NormalizedSum(CyclotomicValue.integer(sys.fd.p, 1), 0, sys.fd.q)
    val = _archimedean_at_depth(sys, gamma, L, budget)
    if certify:
        again = _archimedean_at_depth(sys, gamma, L + 1, budget)
        if again != val:
            raise InstabilityError(f"archimedean integral changed between depths {L} and {L + 1}")
    return val


def box_sums(sh: ShiftedSystem, P: int, alpha_rows: np.ndarray, budget=None, workers: int = 1):
    """S(alpha; P) for each row of alpha digits, shape (Na, R, width).

    width must be at least d(P-1+deg m)+1; extra digits pair with zero
    coefficients.
    """
    fd = sh.fd
    need = sh.value_degree_bound(P) + 1
    if alpha_rows.shape[2] < need:
        raise PrecisionError(f"need {need} digits of alpha, got {alpha_rows.shape[2]}")
    hist = value_histogram(sh, P, None, workers, budget)
    rows = alpha_rows[:, :, :need]
    return _sums_from_histogram(fd, hist, rows)


def alpha_digit_rows(alphas, width: int) -> np.ndarray:
    """Digit array (Na, R, width) of fractional parts for Laurent vectors."""
    return np.array([[a.digit_vector(-1, -width) for a in alpha] for alpha in alphas],
                    dtype=np.int64)


def box_sum(sh: ShiftedSystem, alpha, P: int, budget=None) -> CyclotomicValue:
    """S(alpha; P) = sum_{|x|<q^P} psi(alpha . F(x))."""
    width = sh.value_degree_bound(P) + 1
    rows = alpha_digit_rows([alpha], width)
    return box_sums(sh, P, rows, budget)[0]


def box_sum_naive(sh: ShiftedSystem, alpha, P: int) -> CyclotomicValue:
    """Literal term-by-term evaluation (oracle)."""
    from .characters import psi_vector
    from .poly import digits_box
    acc = CyclotomicValue.integer(sh.fd.p, 0)
    for y in digits_box(sh.fd, sh.n, P):
        acc = acc + psi_vector(alpha, sh.evaluate(y))
    return acc
