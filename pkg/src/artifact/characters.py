"""The additive character psi on F_q((1/t)) and its basic integrals."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import batch
from .cyclotomic import CyclotomicValue
from .errors import PrecisionError, check_budget
from .field import FieldDescriptor
from .laurent import LaurentElement
from .poly import Poly


def psi(alpha: LaurentElement, fd: FieldDescriptor | None = None) -> CyclotomicValue:
    """zeta_p^{tr(a_{-1})} where a_{-1} is the t^{-1} digit of alpha."""
    fd = fd or alpha.fd
    return CyclotomicValue.zeta(fd.p, fd.trace(alpha.digit(-1)))


def psi_vector(alpha, w) -> CyclotomicValue:
    """psi(sum_k alpha_k w_k) for Laurent alpha_k and polynomial w_k."""
    fd = alpha[0].fd
    acc = LaurentElement(fd)
    for a, x in zip(alpha, w):
        acc = acc + a * x
    return psi(acc, fd)


def hankel_digits(fd: FieldDescriptor, h: Poly, beta_digits: np.ndarray, N: int) -> np.ndarray:
    """Digits at exponents -1..-N of h*beta, for a batch of fractional beta.

    beta_digits[:, j] is the digit of t^{-1-j}.  Requires width >= N + deg h.
    """
    out = np.zeros((beta_digits.shape[0], N), dtype=np.int64)
    for s in range(1, N + 1):
        for j, hj in enumerate(h.c):
            if hj:
                out[:, s - 1] = fd.vadd(out[:, s - 1], fd.vmul(beta_digits[:, s + j - 1], np.int64(hj)))
    return out


def measure_dist(h: Poly, N: int, depth: int, budget=None) -> Fraction:
    """Exact proportion of beta in T with ||h beta|| < q^{-N}.

    beta is enumerated through its digits down to t^{-depth}.
    """
    if h.is_zero():
        raise ValueError("h must be nonzero")
    if depth < h.degree + N:
        raise PrecisionError(f"depth {depth} below deg h + N = {h.degree + N}")
    fd = h.fd
    total = fd.q**depth
    check_budget(total, budget, "measure enumeration")
    good = 0
    for s, e in batch.chunk_ranges(total):
        digs = batch.digit_grid(fd, depth, s, e)
        hd = hankel_digits(fd, h, digs, N)
        good += int(np.all(hd == 0, axis=1).sum())
    return Fraction(good, total)


def orth_sum(gamma: LaurentElement, N: int, fd: FieldDescriptor | None = None,
             budget=None) -> CyclotomicValue:
    """sum over |b| < q^N of psi(gamma b), by direct enumeration."""
    fd = fd or gamma.fd
    if N == 0:
        return CyclotomicValue.integer(fd.p, 1)
    coeffs = np.array(gamma.digit_vector(-1, -N), dtype=np.int64)
    check_budget(fd.q**N, budget, "orthogonality sum")
    bs = batch.digit_grid(fd, N)
    # t^{-1} digit of gamma*b is sum_j gamma_{-1-j} b_j
    E = batch.char_exponents(fd, coeffs[None, :], bs)[0]
    return CyclotomicValue.from_exponents(fd.p, E)


def orth_expected(gamma: LaurentElement, N: int, fd: FieldDescriptor | None = None) -> CyclotomicValue:
    """q^N if the fractional part of gamma is below q^{-N}, else 0."""
    fd = fd or gamma.fd
    small = all(gamma.digit(-s) == 0 for s in range(1, N + 1))
    return CyclotomicValue.integer(fd.p, fd.q**N if small else 0)
