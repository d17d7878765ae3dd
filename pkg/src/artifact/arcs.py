"""Major arcs, the major-arc factorization of S(alpha; P) and the orthogonality round trip."""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from . import batch
from .charsum import (NormalizedSum, _sums_from_histogram, archimedean_integral,
                      box_sum, complete_sum, sufficient_depth, value_histogram)
from .cyclotomic import CyclotomicValue
from .errors import InstabilityError, InvariantBreach, check_budget
from .forms import ShiftedSystem
from .laurent import LaurentElement, vector_ord
from .poly import NEG_INF, Poly, all_polys, gcd_many, monics


@dataclass(frozen=True)
class RationalApprox:
    g: Poly
    a: tuple
    J: int
    m: Poly
    d: int

    def center(self, depth: int) -> tuple:
        """a / (g m^d) to the given digit depth."""
        G = self.g * self.m**self.d
        return tuple(LaurentElement.from_fraction(ak, G, depth) for ak in self.a)


@dataclass
class LocateResult:
    approx: RationalApprox | None
    centers: list
    searched: int

    @property
    def found(self) -> bool:
        return self.approx is not None


def _frac_small(x: LaurentElement, bound_exp: int) -> bool:
    """Whether ||x|| < q^bound_exp."""
    if bound_exp > 0:
        return True
    return all(x.digit(-s) == 0 for s in range(1, -bound_exp + 1))


def major_arc_locate(alpha, J: int, P: int, m: Poly, d: int) -> LocateResult:
    """Exhaustive search for (g, a) with deg g <= J and |g m^d alpha - a| < q^{J-dP+d}."""
    fd = m.fd
    md = m**d
    thr = J - d * P + d
    centers = []
    searched = 0
    for deg in range(J + 1):
        for g in monics(fd, deg):
            searched += 1
            G = g * md
            prods = [ak * G for ak in alpha]
            base = [Poly(fd, tuple(x.digit(i) for i in range(0, G.degree))) for x in prods]
            if not all(_frac_small(x.frac(), thr) for x in prods):
                continue
            # with q^thr > 1, polynomial shifts below q^thr stay admissible
            shifts = list(all_polys(fd, thr)) if thr > 0 else [Poly.zero(fd)]
            for cs in iproduct(shifts, repeat=len(alpha)):
                a = tuple(b + c for b, c in zip(base, cs))
                if any(ak.degree >= G.degree for ak in a if not ak.is_zero()):
                    continue
                if thr > 0 and not all(_norm_below(x - LaurentElement.from_poly(ak), thr)
                                       for x, ak in zip(prods, a)):
                    continue
                if gcd_many(list(a) + [g]).degree != 0:
                    continue
                centers.append((g, a))
    if 2 * J <= d * (P - 1) and len(centers) > 1:
        raise InvariantBreach(f"overlapping major arcs at level {J}: {len(centers)} centers")
    if not centers:
        return LocateResult(None, [], searched)
    g, a = centers[0]
    return LocateResult(RationalApprox(g, a, J, m, d), centers, searched)


def _norm_below(x: LaurentElement, e: int) -> bool:
    return all(c == 0 for i, c in x.items if i >= e)


@dataclass
class FactorizationReport:
    status: str  # PASS, FAIL or SKIP
    g: Poly
    a: tuple
    beta: tuple
    lhs: CyclotomicValue | None = None
    rhs: NormalizedSum | None = None
    boundary: bool = False
    reason: str = ""

    @property
    def equal(self) -> bool:
        return self.status == "PASS"

    def transcript(self) -> dict:
        return {
            "g": str(self.g),
            "a": [str(x) for x in self.a],
            "beta_digits": [[[i, c] for i, c in b.items] for b in self.beta],
            "lhs": self.lhs.to_json() if self.lhs is not None else None,
            "rhs": self.rhs.to_json() if self.rhs is not None else None,
            "equal": self.equal,
            "status": self.status,
        }

    def to_json(self) -> str:
        return json.dumps(self.transcript(), sort_keys=True)


def factorization_hypothesis(sh: ShiftedSystem, g: Poly, beta, P: int) -> tuple[bool, bool, str]:
    """(hypothesis holds, at the |g m^d| = q^P boundary, reason)."""
    d, dm = sh.d, sh.deg_m
    G = g.degree + d * dm
    if g.is_zero():
        return False, False, "g = 0"
    if G > P:
        return False, False, f"|g m^d| = q^{G} exceeds q^{P}"
    ob = vector_ord(beta)
    limit = -(d - 1) * (P - 1) - G - d * dm
    if ob != NEG_INF and ob >= limit:
        return False, G == P, f"|beta| = q^{ob} not below q^{limit}"
    return True, G == P, ""


def verify_factorization(sh: ShiftedSystem, g: Poly, a, beta, P: int, budget=None,
                         strict: bool = True) -> FactorizationReport:
    """S(a/(g m^d) + beta; P) = q^{nP} S_{g m^d}(a) S_inf(m^d t^{dP} beta), both sides exact."""
    fd, d, n = sh.fd, sh.d, sh.n
    a = tuple(a)
    beta = tuple(beta)
    G = g * sh.m**d
    ok, boundary, why = factorization_hypothesis(sh, g, beta, P)
    if not ok:
        return FactorizationReport("SKIP", g, a, beta, boundary=boundary, reason=why)
    if any(not ak.is_zero() and ak.degree >= G.degree for ak in a):
        raise ValueError("need |a| < |g m^d|")
    width = sh.value_degree_bound(P) + 1
    alpha = tuple(LaurentElement.from_fraction(ak, G, width + 1) + bk for ak, bk in zip(a, beta))
    lhs = box_sum(sh, alpha, P, budget)
    sg = complete_sum(sh, G, a, budget)
    gamma = tuple((bk * sh.m**d).shift(d * P) for bk in beta)
    # smallest exact depth; the certificate still recomputes one digit deeper
    sinf = archimedean_integral(sh.base, gamma, sufficient_depth(d, gamma), budget=budget)
    rhs = sg * sinf
    rhs = NormalizedSum(rhs.value, rhs.scale + n * P, fd.q)
    equal = NormalizedSum(lhs, 0, fd.q) == rhs
    rep = FactorizationReport("PASS" if equal else "FAIL", g, a, beta, lhs, rhs, boundary)
    if strict and not equal:
        raise InvariantBreach(f"factorization fails for g={g}, a={a}")
    return rep


def factorization_cases(sh: ShiftedSystem, P: int, beta_depth: int = 2):
    """(g, a, beta) in the hypothesis region: every monic g allowed, every a coprime
    to g with |a| < |g m^d|, and beta exact with the top beta_depth admissible digits."""
    fd, d, dm, R = sh.fd, sh.d, sh.deg_m, sh.R
    for deg in range(P - d * dm + 1):
        for g in monics(fd, deg):
            G = g * sh.m**d
            top = -(d - 1) * (P - 1) - G.degree - d * dm - 1
            avecs = [a for a in iproduct(all_polys(fd, G.degree), repeat=R)
                     if gcd_many(list(a) + [g]).degree == 0]
            for codes in iproduct(range(fd.q), repeat=R * beta_depth):
                beta = tuple(LaurentElement.from_digit_vector(
                    fd, codes[k * beta_depth:(k + 1) * beta_depth], top, NEG_INF) for k in range(R))
                for a in avecs:
                    yield g, a, beta


def direct_count(sh: ShiftedSystem, P: int, budget=None, workers: int = 1) -> int:
    """#{x : |x| < q^P, F(x) = 0}, i.e. N(f; P, m, b)."""
    return value_histogram(sh, P, None, workers, budget).zero_count()


def _average(sh: ShiftedSystem, P: int, depth: int, budget=None) -> CyclotomicValue:
    """sum over alpha with digits to t^{-depth} of S(alpha; P); divide by q^{R depth}."""
    fd, R = sh.fd, sh.R
    need = sh.value_degree_bound(P) + 1
    if depth < need:
        raise ValueError(f"depth {depth} below the value degree bound {need}")
    hist = value_histogram(sh, P, None, 1, budget)
    vals = hist.values.reshape(-1, R, need)
    padded = batch.Histogram(batch.pad(vals, depth).reshape(vals.shape[0], -1), hist.counts,
                             (R, depth))
    total_alpha = fd.q ** (R * depth)
    check_budget(total_alpha * max(1, hist.values.shape[0]), budget, "arc average")
    acc = np.zeros(fd.p, dtype=np.int64)
    for s, e in batch.chunk_ranges(total_alpha, 4096):
        rows = batch.digit_grid(fd, R * depth, s, e).reshape(-1, R, depth)
        for v in _sums_from_histogram(fd, padded, rows):
            acc += np.array(v.counts)
    return CyclotomicValue(fd.p, tuple(int(x) for x in acc))


def integral_count(sh: ShiftedSystem, P: int, budget=None, certify: bool = True) -> int:
    """Exact average of S(alpha; P) over T^R, certified one digit deeper."""
    q, R = sh.fd.q, sh.R
    D = sh.value_degree_bound(P) + 1
    total = _average(sh, P, D, budget)
    if not total.is_integer() or total.to_int() % q ** (R * D):
        raise InvariantBreach("arc average is not an integer")
    val = total.to_int() // q ** (R * D)
    if certify:
        again = _average(sh, P, D + 1, budget)
        if again.to_int() != val * q ** (R * (D + 1)):
            raise InstabilityError(f"arc average changed between depths {D} and {D + 1}")
    return val
