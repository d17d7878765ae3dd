"""Differencing counts N^(v), N^aux and the inequalities built on them."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

import numpy as np

from . import batch
from .charsum import box_sum
from .cyclotomic import magnitude_power_leq
from .errors import InvariantBreach, PrecisionError, check_budget
from .forms import FormSystem, ShiftedSystem
from .laurent import LaurentElement, vector_ord
from .poly import NEG_INF, Poly

ALT_I = "ALT_I"
ALT_II = "ALT_II"
DEGENERATE = "DEGENERATE"


@dataclass(frozen=True)
class AuxQuery:
    J: int
    P: int
    beta: tuple
    v: int

    def __post_init__(self):
        if self.J < 1 or self.P < 1:
            raise ValueError("J and P must be positive")
        if self.J > self.P:
            raise ValueError("need J <= P")


def _base(sys) -> FormSystem:
    return sys.base if isinstance(sys, ShiftedSystem) else sys


def _as_laurent(fd, beta) -> tuple:
    out = []
    for b in beta:
        if isinstance(b, Poly):
            b = LaurentElement.from_poly(b)
        elif isinstance(b, int):
            b = LaurentElement.from_poly(Poly.const(fd, b))
        out.append(b)
    return tuple(out)


def scale_beta(beta, g: Poly) -> tuple:
    """g * beta componentwise."""
    return tuple(b * g for b in beta)


def _tuples(fd, n: int, sizes, start: int, stop: int):
    """Blocks (N, n, s_j) of the tuples with index start..stop-1."""
    width = n * sum(sizes)
    flat = batch.digit_grid(fd, width, start, stop)
    out, pos = [], 0
    for s in sizes:
        out.append(flat[:, pos:pos + n * s].reshape(-1, n, s))
        pos += n * s
    return out


def _beta_matrix(fd, beta, L: int, exps) -> np.ndarray:
    """B[k*L + j, s] = digit of t^{exps[s] - j} in beta_k."""
    B = np.zeros((len(beta) * L, len(exps)), dtype=np.int64)
    for k, b in enumerate(beta):
        for j in range(L):
            for s, e in enumerate(exps):
                B[k * L + j, s] = b.digit(e - j)
    return B


def _form_digits(fd, W: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Digits of sum_k beta_k W_{k,i}; W is (N, R, n, L), result (N, n, S)."""
    N, R, n, L = W.shape
    A = W.transpose(0, 2, 1, 3).reshape(N * n, R * L)
    if fd.k == 1:
        return ((A @ B) % fd.p).reshape(N, n, -1)
    add, mul = fd.tables["add"], fd.tables["mul"]
    out = np.zeros((N * n, B.shape[1]), dtype=np.int64)
    for r in range(R * L):
        out = add[out, mul[A[:, r:r + 1], B[r][None, :]]]
    return out.reshape(N, n, -1)


def _count(sys, sizes, beta, exps, budget=None) -> int:
    """Tuples u with |u^(j)| < q^{sizes[j]} whose form digits vanish at exps."""
    base = _base(sys)
    fd = base.fd
    n = base.n
    total = fd.q ** (n * sum(sizes))
    check_budget(total, budget, "differencing enumeration")
    if not exps:
        return total
    L = sum(s - 1 for s in sizes) + 1
    B = _beta_matrix(fd, beta, L, exps)
    hits = 0
    for s, e in batch.chunk_ranges(total):
        Us = _tuples(fd, n, sizes, s, e)
        W = base.psi_batch(Us)
        D = _form_digits(fd, W, B)
        hits += int(np.all(D == 0, axis=(1, 2)).sum())
    return hits


def count_threshold(sys, sizes, beta, T: int, budget=None) -> int:
    """Tuples with ||sum_k beta_k Psi_i^(k)(u)|| < q^{-T} for all i."""
    base = _base(sys)
    beta = _as_laurent(base.fd, beta)
    if len(sizes) != base.d - 1:
        raise ValueError("need d-1 box sizes")
    return _count(base, sizes, beta, list(range(-1, -T - 1, -1)), budget)


def nv_sizes(d: int, J: int, P: int, v: int) -> list[int]:
    return [J] * v + [P] * (d - 1 - v)


def count_Nv(sys, query: AuxQuery, budget=None) -> int:
    """N^(v)(J; beta) with box sizes J (first v) and P (rest)."""
    base = _base(sys)
    d = base.d
    if not 0 <= query.v <= d - 1:
        raise ValueError("v must lie in [0, d-1]")
    T = (query.v + 1) * query.P - query.v * query.J
    return count_threshold(base, nv_sizes(d, query.J, query.P, query.v), query.beta, T, budget)


def count_Naux(sys, J: int, beta, budget=None) -> int:
    """N^aux(J; beta): |u^(j)| < q^J and |sum_k beta_k Psi_i^(k)(u)| < q^{(d-2)J}."""
    base = _base(sys)
    beta = _as_laurent(base.fd, beta)
    d = base.d
    L = (d - 1) * (J - 1) + 1
    top = max((b.upper() for b in beta), default=NEG_INF)
    if top == NEG_INF:
        exps = []
    else:
        exps = list(range(int(top) + L - 1, (d - 2) * J - 1, -1))
    return _count(base, [J] * (d - 1), beta, exps, budget)


@dataclass
class ShrinkingReport:
    J: int
    P: int
    beta_exp: float
    counts: list  # N^(0), ..., N^(d-1)
    bounds: list  # q^{n(J-P)} N^(v-1) for v = 1, ..., d-1
    passed: bool


def check_shrinking(sys, J: int, P: int, beta, m: Poly | None = None, budget=None,
                    strict: bool = True) -> ShrinkingReport:
    """Checks N^(v)(J; m^d beta) >= q^{n(J-P)} N^(v-1)(J; m^d beta) for 1 <= v <= d-1."""
    base = _base(sys)
    if m is None:
        m = sys.m if isinstance(sys, ShiftedSystem) else Poly.one(base.fd)
    b = scale_beta(_as_laurent(base.fd, beta), m ** base.d)
    counts = [count_Nv(base, AuxQuery(J, P, b, v), budget) for v in range(base.d)]
    q, n = base.q, base.n
    bounds = [Fraction(counts[v - 1], q ** (n * (P - J))) for v in range(1, base.d)]
    ok = all(counts[v] >= bounds[v - 1] for v in range(1, base.d))
    rep = ShrinkingReport(J, P, _safe_ord(b), counts, bounds, ok)
    if strict and not ok:
        raise InvariantBreach(f"shrinking inequality fails: {counts}")
    return rep


def _safe_ord(beta) -> float:
    try:
        return vector_ord(beta)
    except PrecisionError:
        return float("nan")


@dataclass
class Alternative:
    kind: str
    M: float
    alt_i: bool
    alt_ii_window: bool
    counts: tuple = ()


def alternative_tests(d: int, J: int, P: int, M: int) -> tuple[bool, bool]:
    """(first alternative holds, |beta| = q^M lies in the second window)."""
    # q^{-J} <= max(q^{-dP+d-2-M}, q^{M/(d-1)-1})
    first = (-J <= -d * P + d - 2 - M) or (Fraction(M, d - 1) - 1 >= -J)
    window = J - d * P + d - 1 <= M <= -J * (d - 1) + d - 2
    return first, window


def classify_alternatives(sys, J: int, P: int, beta, budget=None) -> Alternative:
    base = _base(sys)
    if J > P:
        raise ValueError("need J <= P")
    beta = _as_laurent(base.fd, beta)
    M = vector_ord(beta)
    if M == NEG_INF:
        return Alternative(DEGENERATE, M, False, False)
    first, window = alternative_tests(base.d, J, P, int(M))
    if first == window:
        raise InvariantBreach(f"alternatives not exclusive at |beta| = q^{M}")
    if first:
        return Alternative(ALT_I, M, True, False)
    nv = count_Nv(base, AuxQuery(J, P, beta, base.d - 1), budget)
    na = count_Naux(base, J, tuple(b.shift(base.d * P - J) for b in beta), budget)
    if nv != na:
        raise InvariantBreach(f"second alternative counts differ: {nv} != {na}")
    return Alternative(ALT_II, M, False, True, (nv, na))


def theta_d(d: int, J: int) -> Fraction:
    if d == 2:
        return Fraction(J)
    if J == 1:
        return Fraction(1)
    return Fraction(J, d - 1) + 1


def _power_leq(lhs: int, factors) -> bool:
    """lhs <= prod base^exp for Fraction exponents, decided exactly."""
    den = math.lcm(*(Fraction(e).denominator for _, e in factors))
    left, right = lhs**den, 1
    for base, e in factors:
        k = Fraction(e) * den
        assert k.denominator == 1
        k = int(k)
        if k >= 0:
            right *= base**k
        else:
            left *= base ** (-k)
    return left <= right


@dataclass
class NbfReport:
    J: int
    M: int
    count: int
    min_exponent: Fraction
    theorem: dict = field(default_factory=dict)  # sigma reading -> pass
    theta: Fraction = Fraction(0)
    corollary: bool | None = None


def tNbf_factors(d: int, n: int, q: int, J: int, M: int, sigma: int):
    e = min(Fraction(J + M, d - 1), Fraction(J))
    return e, [(d - 1, e * n + n), (q, J * n * (d - 1) - e * (n - sigma))]


def check_tNbf(sys, J: int, M: int, beta, sigma, budget=None, strict: bool = True) -> NbfReport:
    """Exact check of the N^aux upper bound at |beta| = q^M.

    sigma is an int or a mapping of named readings to ints; every reading is
    evaluated and the first one is asserted.
    """
    base = _base(sys)
    d, n, q, R = base.d, base.n, base.q, base.R
    if M < d - 2:
        raise ValueError("need M >= d-2")
    beta = _as_laurent(base.fd, beta)
    if vector_ord(beta) != M:
        raise ValueError(f"|beta| is not q^{M}")
    readings = sigma if isinstance(sigma, dict) else {"sigma": int(sigma)}
    N = count_Naux(base, J, beta, budget)
    rep = NbfReport(J, M, N, Fraction(0), theta=theta_d(d, J))
    for name, s in readings.items():
        e, factors = tNbf_factors(d, n, q, J, M, s)
        rep.min_exponent = e
        rep.theorem[name] = _power_leq(N, factors)
    if M >= d - 1:
        th = rep.theta
        rep.corollary = _power_leq(N, [(d - 1, n * (1 + th)),
                                       (q, J * n * (d - 1) - th * (n - R + 1))])
    first = next(iter(rep.theorem.values()))
    if strict and not first:
        raise InvariantBreach(f"N^aux bound fails: N = {N}")
    return rep


def weyl_inequality_check(sh: ShiftedSystem, J: int, P: int, alpha, budget=None) -> dict:
    """|S(alpha;P)|^{2^{d-1}} <= q^{n(2^{d-1}P-(d-1)J)} N^(d-1)(J; m^d alpha)."""
    d, n, q = sh.d, sh.n, sh.fd.q
    alpha = _as_laurent(sh.fd, alpha)
    S = box_sum(sh, alpha, P, budget)
    N = count_Nv(sh.base, AuxQuery(J, P, scale_beta(alpha, sh.m ** d), d - 1), budget)
    bound = q ** (n * (2 ** (d - 1) * P - (d - 1) * J)) * N
    return {"J": J, "P": P, "count": N, "bound": bound,
            "pass": bool(magnitude_power_leq([S], 2 ** (d - 1), bound))}


def two_sum_check(sh: ShiftedSystem, J: int, P: int, alpha, beta, budget=None) -> dict:
    """min(|S(alpha)|, |S(alpha+beta)|)^{2^d} <= q^{2^d nP - n(d-1)J} N^(d-1)(J; m^d beta)."""
    d, n, q = sh.d, sh.n, sh.fd.q
    alpha = _as_laurent(sh.fd, alpha)
    beta = _as_laurent(sh.fd, beta)
    S1 = box_sum(sh, alpha, P, budget)
    S2 = box_sum(sh, tuple(a + b for a, b in zip(alpha, beta)), P, budget)
    N = count_Nv(sh.base, AuxQuery(J, P, scale_beta(beta, sh.m ** d), d - 1), budget)
    bound = q ** (2**d * n * P - n * (d - 1) * J) * N
    return {"J": J, "P": P, "count": N, "bound": bound,
            "pass": magnitude_power_leq([S1, S2], 2**d, bound)}


def beta_grid(fd, R: int, depth: int, top: int = -1):
    """All exact beta vectors with digits at exponents top, ..., top-depth+1."""
    for codes in iproduct(range(fd.q), repeat=R * depth):
        yield tuple(LaurentElement.from_digit_vector(fd, codes[k * depth:(k + 1) * depth], top,
                                                     NEG_INF)
                    for k in range(R))


def shrinking_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if not reports:
        return ""
    d = len(reports[0].counts)
    w.writerow(["J", "P", "beta_exp"] + [f"N{v}" for v in range(d)] + ["bound", "pass"])
    for r in sorted(reports, key=lambda r: (r.J, r.P, str(r.beta_exp), r.counts)):
        bound = ";".join(str(b) for b in r.bounds)
        w.writerow([r.J, r.P, r.beta_exp] + list(r.counts) + [bound, int(r.passed)])
    return buf.getvalue()
