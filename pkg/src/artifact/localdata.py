"""Local solution counts, local factors, singular series and singular integral."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import batch
from .charsum import complete_sums
from .errors import InvariantBreach, check_budget
from .field import FieldDescriptor
from .forms import FormSystem, ShiftedSystem, projective_census, rank_mod, shift as make_shift
from .poly import Poly, factor, gcd_many, monics, poly_gcd

SCAN_LIMIT = 600_000
LIFT_LIMIT = 30_000_000
ROWS = 1 << 17


@dataclass(frozen=True)
class LocalCount:
    modulus: Poly
    total: int
    primitive: int | None = None
    fixed_residue: int | None = None
    method: str = "scan"


def multiplicity(pi: Poly, g: Poly) -> int:
    e = 0
    while g.degree >= pi.degree:
        qt, r = divmod(g, pi)
        if not r.is_zero():
            break
        g, e = qt, e + 1
    return e


# --- exhaustive scan

def _scan(sh: ShiftedSystem, G: Poly, pi: Poly | None, budget=None) -> tuple[int, int]:
    """(#y mod G with F(y) = 0 mod G, #those with m y + b not 0 mod pi)."""
    fd = sh.fd
    D = G.degree
    if D == 0:
        return 1, 1
    total_size = fd.q ** (sh.n * D)
    check_budget(total_size, budget, "congruence scan")
    total = prim = 0
    for s, e in batch.chunk_ranges(total_size):
        Y = batch.box_digits(fd, sh.n, D, s, e)
        r = batch.bmod(fd, sh.eval_batch(Y), G)
        zero = np.all(r == 0, axis=(1, 2))
        total += int(zero.sum())
        if pi is not None:
            Z = batch.bmod(fd, sh.shifted_batch(Y[zero]), pi)
            prim += int(np.any(Z != 0, axis=(1, 2)).sum())
    return total, prim


# --- lifting tree

def _level_one(sh: ShiftedSystem, pi: Poly, budget=None):
    """Solutions mod pi and the mask of those with m y + b not 0 mod pi."""
    fd = sh.fd
    dp = pi.degree
    size = fd.q ** (sh.n * dp)
    check_budget(size, budget, "residue scan")
    keep, prim = [], []
    for s, e in batch.chunk_ranges(size):
        Y = batch.box_digits(fd, sh.n, dp, s, e)
        r = batch.bmod(fd, sh.eval_batch(Y), pi)
        Y = Y[np.all(r == 0, axis=(1, 2))]
        Z = batch.bmod(fd, sh.shifted_batch(Y), pi)
        keep.append(Y)
        prim.append(np.any(Z != 0, axis=(1, 2)))
    return np.concatenate(keep), np.concatenate(prim)


def _gradient_mod(sh: ShiftedSystem, pts: np.ndarray, pi: Poly) -> np.ndarray:
    """Jacobian of F at each point, reduced mod pi: shape (N, R, n, deg pi)."""
    fd = sh.fd
    base = sh.base
    Z = sh.shifted_batch(pts) if not sh.is_trivial() else pts
    L = Z.shape[2]
    out_len = (base.d - 1) * (L - 1) + 1
    marr = batch.poly_array(sh.m)
    J = np.zeros((pts.shape[0], sh.R, sh.n, pi.degree), dtype=np.int64)
    for k in range(sh.R):
        for i in range(sh.n):
            terms = base.gradient_terms[k][i]
            if not terms:
                continue
            v = batch.eval_terms(fd, terms, Z, out_len)
            v = batch.bmul(fd, v, marr[None, :])
            J[:, k, i, :] = batch.bmod(fd, v, pi)
    return J


def _mulmod(fd, A, B, pi):
    return batch.bmod(fd, batch.bmul(fd, A, B), pi)


def _linear_lift_count(sh: ShiftedSystem, pi: Poly, k: int, pts: np.ndarray,
                       prim: np.ndarray) -> tuple[int, int]:
    """Number of lifts mod pi^{k+1} of solutions mod pi^k (k >= 1).

    F(v + pi^k w) = F(v) + pi^k J(v) w mod pi^{k+1}, so the lifts of v are the
    solutions w mod pi of J w = -c with c = F(v)/pi^k: there are
    |pi|^{n-R} * #{lam: lam J = 0} of them when lam . c = 0 on that kernel,
    and none otherwise.
    """
    fd = sh.fd
    Q = fd.q ** pi.degree
    pik, pik1 = pi**k, pi ** (k + 1)
    lam = batch.box_digits(fd, sh.R, pi.degree, 0, Q**sh.R) if sh.R > 1 else None
    total = ptotal = 0
    for s, e in batch.chunk_ranges(pts.shape[0], ROWS):
        chunk = pts[s:e]
        pm = prim[s:e]
        r = batch.bmod(fd, sh.eval_batch(chunk), pik1)
        c = batch.bmod(fd, batch.bdivmod(fd, r, pik)[0], pi)  # (N, R, dp)
        J = _gradient_mod(sh, chunk, pi)
        if sh.R == 1:
            jz = np.all(J[:, 0] == 0, axis=(1, 2))
            cz = np.all(c[:, 0] == 0, axis=1)
            lifts = np.where(jz, np.where(cz, Q**sh.n, 0), Q ** (sh.n - 1))
            total += int(lifts.sum())
            ptotal += int(lifts[pm].sum())
            continue
        ker = np.zeros(chunk.shape[0], dtype=np.int64)
        bad = np.zeros(chunk.shape[0], dtype=bool)
        for lrow in lam:
            lj = np.zeros(J.shape[:1] + J.shape[2:], dtype=np.int64)
            lc = np.zeros((chunk.shape[0], pi.degree), dtype=np.int64)
            for kk in range(sh.R):
                lk = lrow[kk][None, None, :]
                lj = fd.vadd(lj, _mulmod(fd, J[:, kk], lk, pi))
                lc = fd.vadd(lc, _mulmod(fd, c[:, kk], lrow[kk][None, :], pi))
            inker = np.all(lj == 0, axis=(1, 2))
            ker += inker
            bad |= inker & np.any(lc != 0, axis=1)
        lifts = ker * (~bad) * Q ** (sh.n - sh.R)
        total += int(lifts.sum())
        ptotal += int(lifts[pm].sum())
    return total, ptotal


def _lift(sh: ShiftedSystem, pi: Poly, e: int, budget=None) -> tuple[int, int]:
    """(N(pi^e), N*(pi^e)) by explicit lifting with a linear last step."""
    fd = sh.fd
    dp = pi.degree
    Q = fd.q**dp
    pts, prim = _level_one(sh, pi, budget)
    if e == 1:
        return int(pts.shape[0]), int(prim.sum())
    W = batch.box_digits(fd, sh.n, dp, 0, Q**sh.n)
    for k in range(1, e - 1):
        check_budget(pts.shape[0] * Q**sh.n, budget, "lifting candidates")
        pik = batch.poly_array(pi**k)
        shiftW = batch.bmul(fd, W, pik[None, None, :])[:, :, :(k + 1) * dp]
        shiftW = batch.pad(shiftW, (k + 1) * dp)
        pik1 = pi ** (k + 1)
        per = max(1, ROWS // W.shape[0])
        new, newprim = [], []
        for s, t in batch.chunk_ranges(pts.shape[0], per):
            base = batch.pad(pts[s:t], (k + 1) * dp)
            cand = fd.vadd(base[:, None], shiftW[None]).reshape(-1, sh.n, (k + 1) * dp)
            cprim = np.repeat(prim[s:t], W.shape[0])
            r = batch.bmod(fd, sh.eval_batch(cand), pik1)
            ok = np.all(r == 0, axis=(1, 2))
            new.append(cand[ok])
            newprim.append(cprim[ok])
        pts, prim = np.concatenate(new), np.concatenate(newprim)
    return _linear_lift_count(sh, pi, e - 1, pts, prim)


def _lift_cost(sh: ShiftedSystem, pi: Poly, e: int) -> int:
    Q = sh.fd.q**pi.degree
    n, R = sh.n, sh.R
    cost = Q**n
    for k in range(1, e - 1):
        cost += Q ** (k * (n - R) + n)
    return cost


# --- closed forms

def residue_field(pi: Poly):
    """(F, map) with F = F_q[t]/pi realized as an extension field."""
    fd = pi.fd
    big, emb = fd.extension(pi.degree)
    embedded = pi.map_field(big, emb)
    for theta in range(big.q):
        if embedded(theta) == 0:
            break
    else:
        raise AssertionError("no root of pi in the extension")

    def to_big(h: Poly) -> int:
        return h.map_field(big, emb)(theta)
    return big, to_big


@lru_cache(maxsize=None)
def _projective_count(sys: FormSystem, s: int, budget=None) -> tuple[int, bool]:
    ext = sys.over_extension(s)
    count, wit = projective_census(ext, budget)
    return count, not wit


def _decomposition(Q: int, n: int, d: int, e: int, nstar) -> int:
    """N(pi^e) from primitive counts by the pi-adic valuation of z."""
    total = 1
    for j in range(e):
        if d * j < e:
            total += Q ** ((d - 1) * j * n) * nstar(e - d * j)
        else:
            total += Q ** ((e - j) * n) - Q ** ((e - j - 1) * n)
    return total


def _hensel(sh: ShiftedSystem, pi: Poly, e: int, budget=None) -> LocalCount:
    n, R, d = sh.n, sh.R, sh.d
    Q = sh.fd.q**pi.degree
    mu = multiplicity(pi, sh.m)
    G = pi**e
    if mu > 0:
        big, to_big = residue_field(pi)
        grad = [[to_big(v % pi) for v in row] for row in sh.base.gradient(sh.b)]
        if rank_mod(big, grad) < R:
            raise InvariantBreach("gradient at b is rank deficient mod pi; closed form unavailable")
        if e <= mu:
            total, fixed = Q ** (e * n), 1
        else:
            fixed = Q ** ((e - mu) * (n - R))
            total = Q ** (mu * n) * fixed
        return LocalCount(G, total, total, fixed, "hensel")
    count, smooth = _projective_count(sh.base, pi.degree, budget)
    if not smooth:
        raise InvariantBreach("singular point mod pi; closed form unavailable")
    n1 = (Q - 1) * count

    def nstar(j):
        return Q ** ((j - 1) * (n - R)) * n1
    return LocalCount(G, _decomposition(Q, n, d, e, nstar), nstar(e), None, "hensel")


def _census_count(sh: ShiftedSystem, pi: Poly, budget=None) -> LocalCount:
    """N(pi) and N*(pi) for pi not dividing m through a projective scan over F_q[t]/pi."""
    Q = sh.fd.q**pi.degree
    count, _ = _projective_count(sh.base, pi.degree, budget)
    return LocalCount(pi, 1 + (Q - 1) * count, (Q - 1) * count, None, "census")


def _fixed_residue_scan(sh: ShiftedSystem, pi: Poly, e: int, budget=None) -> int | None:
    mu = multiplicity(pi, sh.m)
    if mu == 0 or e < mu:
        return None
    pm = pi**mu
    sub = ShiftedSystem(sh.base, pm, tuple(bi % pm for bi in sh.b))
    G = pi**e
    fd = sh.fd
    D = (e - mu) * pi.degree
    if D == 0:
        return 1
    size = fd.q ** (sh.n * D)
    check_budget(size, budget, "fixed-residue scan")
    total = 0
    for s, t in batch.chunk_ranges(size):
        W = batch.box_digits(fd, sh.n, D, s, t)
        r = batch.bmod(fd, sub.eval_batch(W), G)
        total += int(np.all(r == 0, axis=(1, 2)).sum())
    return total


@lru_cache(maxsize=None)
def prime_power_count(sh: ShiftedSystem, pi: Poly, e: int, method: str = "auto",
                      budget=None) -> LocalCount:
    G = pi**e
    n = sh.n
    if e == 0:
        return LocalCount(G, 1, 1, 1, "trivial")
    mu = multiplicity(pi, sh.m)
    if method == "auto":
        if sh.fd.q ** (n * G.degree) <= SCAN_LIMIT:
            method = "scan"
        elif e == 1 and mu == 0:
            method = "census"
        elif _lift_cost(sh, pi, e) <= LIFT_LIMIT:
            method = "lift"
        else:
            method = "hensel"
    if method == "scan":
        total, prim = _scan(sh, G, pi, budget)
        fixed = _fixed_residue_scan(sh, pi, e, budget) if mu else None
        return LocalCount(G, total, prim, fixed, "scan")
    if method == "lift":
        total, prim = _lift(sh, pi, e, budget)
        return LocalCount(G, total, prim, None, "lift")
    if method == "census":
        if e != 1 or mu:
            raise ValueError("census method needs e = 1 and pi coprime to m")
        return _census_count(sh, pi, budget)
    if method == "hensel":
        return _hensel(sh, pi, e, budget)
    raise ValueError(f"unknown method {method!r}")


def count_mod(sh: ShiftedSystem, g: Poly, method: str = "auto", budget=None) -> LocalCount:
    """Solution counts of F(y) = 0 mod g.

    Prime powers are counted by scan, lifting tree, residue-field census or
    the Hensel closed form; composite moduli multiply prime-power counts
    (CRT) unless method == "scan", which enumerates y mod g literally.
    """
    if g.is_zero():
        raise ValueError("modulus must be nonzero")
    g = g.monic()
    if g.degree == 0:
        return LocalCount(g, 1, 1, None, "trivial")
    fac = factor(g)
    if len(fac) == 1:
        pi, e = fac[0]
        return prime_power_count(sh, pi, e, method, budget)
    if method == "scan":
        total, _ = _scan(sh, g, None, budget)
        return LocalCount(g, total, None, None, "scan")
    total = 1
    for pi, e in fac:
        total *= prime_power_count(sh, pi, e, method, budget).total
    return LocalCount(g, total, None, None, "crt")


def valuation_decomposition(sh: ShiftedSystem, pi: Poly, e: int, method: str = "auto",
                            budget=None) -> int:
    """N(pi^e) rebuilt from separately counted primitive counts N*(pi^j)."""
    Q = sh.fd.q**pi.degree
    return _decomposition(Q, sh.n, sh.d, e,
                          lambda j: prime_power_count(sh, pi, j, method, budget).primitive)


# --- local factors and singular series

def _A_prime_power(sh: ShiftedSystem, pi: Poly, e: int, method="auto", budget=None) -> Fraction:
    Q = sh.fd.q**pi.degree
    k = sh.n - sh.R
    ne = prime_power_count(sh, pi, e, method, budget).total
    ne1 = prime_power_count(sh, pi, e - 1, method, budget).total if e > 1 else 1
    return Fraction(ne - Q**k * ne1, Q ** (e * k))


def local_factor_A(sh: ShiftedSystem, g: Poly, method: str = "auto", budget=None) -> Fraction:
    """A(g) through solution counts, multiplicatively over prime powers."""
    if not g.is_monic():
        raise ValueError("g must be monic")
    res = Fraction(1)
    for pi, e in factor(g) if g.degree > 0 else []:
        res *= _A_prime_power(sh, pi, e, method, budget)
    return res


def coprime_vectors(fd: FieldDescriptor, g: Poly, R: int):
    """All a in F_q[t]^R with |a| < |g| and gcd(a_1..a_R, g) = 1."""
    D = g.degree
    out = []
    for idx in range(fd.q ** (R * D)):
        a = tuple(Poly.from_index(fd, (idx // fd.q ** (D * k)) % fd.q**D) for k in range(R))
        if gcd_many(list(a) + [g]).degree == 0:
            out.append(a)
    return out


def sum_over_coprime(sh: ShiftedSystem, G: Poly, g: Poly, budget=None):
    """sum over |a| < |G| with gcd(a, g) = 1 of S_G(a), as a NormalizedSum."""
    fd = sh.fd
    D = G.degree
    a_list = []
    for idx in range(fd.q ** (sh.R * D)):
        a = tuple(Poly.from_index(fd, (idx // fd.q ** (D * k)) % fd.q**D) for k in range(sh.R))
        if gcd_many(list(a) + [g]).degree == 0:
            a_list.append(a)
    sums = complete_sums(sh, G, a_list, budget)
    acc = sums[0] * 0
    for s in sums:
        acc = acc + s
    return acc


def local_factor_A_from_sums(sh: ShiftedSystem, g: Poly, budget=None) -> Fraction:
    """A(g) as the sum of S_g(a) over reduced residues a (independent route)."""
    return sum_over_coprime(sh, g, g, budget).as_fraction()


@dataclass
class SeriesTruncation:
    B: int
    value: Fraction
    weight: int = 1
    terms: dict = field(default_factory=dict)
    tails: dict = field(default_factory=dict)


def singular_series(sh: ShiftedSystem, B: int, method: str = "auto", budget=None) -> SeriesTruncation:
    """|m|^R times the sum of A(g) over monic g with deg g <= B, gcd(g, m) = 1."""
    fd = sh.fd
    terms = {}
    tails = {}
    total = Fraction(0)
    for deg in range(B + 1):
        tail = Fraction(0)
        for g in monics(fd, deg):
            if poly_gcd(g, sh.m).degree != 0:
                continue
            a = local_factor_A(sh, g, method, budget)
            terms[g] = a
            total += a
            tail += abs(a)
        tails[deg] = tail
    value = Fraction(sh.m.norm()) ** sh.R * total
    return SeriesTruncation(B, value, sh.m.norm() ** sh.R, terms, tails)


def euler_sigma(sh: ShiftedSystem, pi: Poly, method: str = "auto", budget=None) -> Fraction:
    """(N*(pi)/|pi|^{n-R}) / (1 - |pi|^{-(n-dR)}) for pi coprime to m."""
    n, d, R = sh.n, sh.d, sh.R
    if n <= d * R:
        raise ValueError("need n > dR for the geometric factor")
    if multiplicity(pi, sh.m):
        raise ValueError("pi must not divide m")
    Q = pi.norm()
    nstar = prime_power_count(sh, pi, 1, method, budget).primitive
    return Fraction(nstar, Q ** (n - R)) / (1 - Fraction(1, Q ** (n - d * R)))


# --- singular integral

def _unshifted(sys) -> ShiftedSystem:
    return make_shift(sys.base if isinstance(sys, ShiftedSystem) else sys)


def measure_m(sys, S: int, method: str = "auto", budget=None) -> Fraction:
    """Measure of {v in T^n : |f(v)| < q^{-S}}."""
    base = sys.base if isinstance(sys, ShiftedSystem) else sys
    d, n, q = base.d, base.n, base.q
    if S < d:
        return Fraction(1)
    t = Poly.t_power(base.fd, S + 1 - d)
    N = count_mod(_unshifted(base), t, method, budget).total
    return Fraction(N, q ** ((S + 1 - d) * n))


def cal_I(sys, T: int, method: str = "auto", budget=None) -> Fraction:
    """Integral of the archimedean factor over |gamma| = q^T."""
    base = sys.base if isinstance(sys, ShiftedSystem) else sys
    q, R = base.q, base.R
    return Fraction(q) ** (R * (T + 1)) * (measure_m(base, T + 1, method, budget)
                                           - Fraction(1, q**R) * measure_m(base, T, method, budget))


def singular_integral(sys, B: int, method: str = "auto", budget=None) -> Fraction:
    """Integral of the archimedean factor over |gamma| < q^B, as q^{RB} m(B)."""
    base = sys.base if isinstance(sys, ShiftedSystem) else sys
    return Fraction(base.q) ** (base.R * B) * measure_m(base, B, method, budget)


def main_term(sh: ShiftedSystem, P: int, B_series: int, B_integral: int,
              method: str = "auto", budget=None) -> Fraction:
    n, d, R, q = sh.n, sh.d, sh.R, sh.fd.q
    S = singular_series(sh, B_series, method, budget).value
    I = singular_integral(sh.base, B_integral, method, budget)
    return S * I * Fraction(q) ** ((n - d * R) * P - d * R * sh.deg_m)


# --- reports

def deligne_rows(sh: ShiftedSystem, max_deg: int, method: str = "auto", budget=None):
    """Per prime: N(pi), |pi|^{n-R} and the normalized deviation."""
    from .poly import irreducibles
    n, R = sh.n, sh.R
    rows = []
    for pi in irreducibles(sh.fd, max_deg):
        if multiplicity(pi, sh.m):
            continue
        Q = pi.norm()
        N = prime_power_count(sh, pi, 1, method, budget).total
        dev = abs(N - Q ** (n - R)) / Q ** ((n - R + 1) / 2)
        rows.append({"pi": str(pi), "deg": pi.degree, "N": N, "main": Q ** (n - R),
                     "ratio": dev})
    return rows


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def series_csv(trunc: SeriesTruncation) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["g", "deg", "A(g)", "running_S"])
    running = Fraction(0)
    for g, a in trunc.terms.items():
        running += a * trunc.weight
        w.writerow([str(g), g.degree, fraction_str(a), fraction_str(running)])
    return buf.getvalue()


def tail_exponent(tails: dict, q: int) -> dict:
    """Observed log_q of the degree-T tail mass."""
    return {T: (math.log(float(v), q) if v else float("-inf")) for T, v in tails.items()}
