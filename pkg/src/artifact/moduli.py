"""Point counts of moduli spaces of rational curves via tuple censuses."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct

import numpy as np

from . import batch
from .charsum import value_histogram
from .errors import InstanceError, InvariantBreach, check_budget
from .forms import FormSystem, ShiftedSystem, projective_points, shift as make_shift
from .poly import digits_box, gcd_many, irreducibles, mobius, monics


@dataclass(frozen=True)
class CensusSpec:
    sys: FormSystem
    e: int
    constraints: tuple = ()  # ((c_j, a_j), ...) with c_j a code and a_j a tuple of codes

    def __post_init__(self):
        cs = [c for c, _ in self.constraints]
        if len(set(cs)) != len(cs):
            raise InstanceError("constraint parameters c_j must be distinct")
        for _, a in self.constraints:
            if len(a) != self.sys.n:
                raise InstanceError("constraint points must have n coordinates")
            if not any(a):
                raise InstanceError("constraint points must be nonzero")
            if any(self.sys.evaluate_constants(tuple(a))):
                raise InstanceError(f"constraint point {a} is not on X")
        if self.e < 0:
            raise ValueError("degree must be nonnegative")
        object.__setattr__(self, "constraints",
                           tuple((int(c), tuple(int(x) for x in a)) for c, a in self.constraints))

    @property
    def b(self) -> int:
        return len(self.constraints)

    def scaled(self, lams) -> "CensusSpec":
        fd = self.sys.fd
        cons = tuple((c, tuple(fd.mul(l, x) for x in a)) for (c, a), l in zip(self.constraints, lams))
        return CensusSpec(self.sys, self.e, cons)


@dataclass
class CensusResult:
    q: int
    e: int
    b: int
    N_qe: int
    M_count: int
    expected_dim: int

    @property
    def dim_estimate(self) -> float:
        return math.log(self.M_count, self.q) if self.M_count > 0 else float("-inf")


def _eval_at(fd, G: np.ndarray, c: int) -> np.ndarray:
    """Values g_i(c) for a batch G (N, n, L), by Horner."""
    acc = np.zeros(G.shape[:-1], dtype=np.int64)
    cc = np.int64(c)
    for j in range(G.shape[-1] - 1, -1, -1):
        acc = fd.vadd(fd.vmul(acc, cc), G[..., j])
    return acc


def _coprime_mask(fd, G: np.ndarray, e: int) -> np.ndarray:
    """gcd(g_1, ..., g_n) = 1 for each row; rows are not all zero.

    A nontrivial common factor of polynomials of degree <= e has an
    irreducible factor of degree <= e.
    """
    ok = np.any(G != 0, axis=(1, 2))
    if e < 1:
        return ok
    for pi in irreducibles(fd, e):
        r = batch.bmod(fd, G, pi)
        ok &= np.any(r != 0, axis=(1, 2))
    return ok


def _tuple_chunk(spec: CensusSpec, start: int, stop: int) -> int:
    sys, e = spec.sys, spec.e
    fd = sys.fd
    G = batch.box_digits(fd, sys.n, e + 1, start, stop)
    keep = np.any(G[:, :, e] != 0, axis=1)
    for c, a in spec.constraints:
        keep &= np.all(_eval_at(fd, G, c) == np.array(a, dtype=np.int64), axis=1)
    G = G[keep]
    vals = sys.eval_batch(G)
    G = G[np.all(vals == 0, axis=(1, 2))]
    return int(_coprime_mask(fd, G, e).sum())


def count_tuples(spec: CensusSpec, budget=None, workers: int = 1) -> int:
    """N(q, e; a_1, ..., a_b)."""
    sys = spec.sys
    total = sys.q ** (sys.n * (spec.e + 1))
    check_budget(total, budget, "tuple census")
    parts = batch.run_chunks(_tuple_chunk, [(spec, s, t) for s, t in batch.chunk_ranges(total)],
                             workers)
    return sum(parts)


def count_tuples_naive(spec: CensusSpec) -> int:
    """Reference scan with polynomial objects."""
    sys, e = spec.sys, spec.e
    fd = sys.fd
    hits = 0
    for g in digits_box(fd, sys.n, e + 1):
        if max(x.degree for x in g) != e or all(x.is_zero() for x in g):
            continue
        if any(tuple(x(c) for x in g) != a for c, a in spec.constraints):
            continue
        if any(not v.is_zero() for v in sys.evaluate(g)):
            continue
        if gcd_many(list(g)).degree == 0:
            hits += 1
    return hits


def pgl2_order(q: int) -> int:
    return q**3 - q


def moduli_count(sys: FormSystem, e: int, budget=None, workers: int = 1) -> CensusResult:
    """#M_{0,0}(X, e)(F_q) = N(q, e) / ((q-1)(q^3-q))."""
    q = sys.q
    N = count_tuples(CensusSpec(sys, e), budget, workers)
    div = (q - 1) * pgl2_order(q)
    if N % div:
        raise InvariantBreach(f"N(q,e) = {N} is not divisible by {div}")
    mu, _ = expected_dims(sys.n, sys.d, sys.R, e, 0)
    return CensusResult(q, e, 0, N, N // div, mu)


def moduli_count_b(spec: CensusSpec, budget=None, workers: int = 1) -> CensusResult:
    """#M_{e,b}(F_q) from the sum over scalings of the constraint points."""
    sys = spec.sys
    q = sys.q
    units = range(1, q)
    total = sum(count_tuples(spec.scaled(lams), budget, workers)
                for lams in iproduct(units, repeat=spec.b))
    if total % (q - 1):
        raise InvariantBreach(f"scalar-orbit sum {total} is not divisible by q-1")
    _, dim = expected_dims(sys.n, sys.d, sys.R, spec.e, spec.b)
    return CensusResult(q, spec.e, spec.b, total, total // (q - 1), dim)


def count_orbit_direct(spec: CensusSpec) -> int:
    """#N_{e,b}: tuples with g(c_j) in F_q^* a_j, by a single naive scan."""
    sys, e = spec.sys, spec.e
    fd = sys.fd
    hits = 0
    for g in digits_box(fd, sys.n, e + 1):
        if max(x.degree for x in g) != e or all(x.is_zero() for x in g):
            continue
        ok = True
        for c, a in spec.constraints:
            val = tuple(x(c) for x in g)
            if not any(val == tuple(fd.mul(l, y) for y in a) for l in range(1, fd.q)):
                ok = False
                break
        if not ok or any(not v.is_zero() for v in sys.evaluate(g)):
            continue
        hits += gcd_many(list(g)).degree == 0
    return hits


def expected_dims(n: int, d: int, R: int, e: int, b: int) -> tuple[int, int]:
    """(mu(e, R), expected dim M_{e,b})."""
    mu = e * (n - R * d) + n - R - 4
    return mu, e * (n - R * d) + (n - 1 - R) * (1 - b)


def _N_box(sys: FormSystem, P: int, budget=None) -> int:
    return value_histogram(make_shift(sys), P, budget=budget).zero_count()


def primitive_count_mobius(sh, P: int, budget=None) -> int:
    """N*(f; P) = sum_{k monic, |k| < q^P} mu(k) (N(f; P - deg k) - 1)."""
    sys = _unshifted_base(sh)
    fd = sys.fd
    total = 0
    for j in range(P):
        mu_sum = sum(mobius(k) for k in monics(fd, j))
        if mu_sum:
            total += mu_sum * (_N_box(sys, P - j, budget) - 1)
    return total


def primitive_count_direct(sh, P: int, budget=None) -> int:
    """#{g : 1 <= |g| < q^P, gcd(g) = 1, f(g) = 0} by scanning the box."""
    sys = _unshifted_base(sh)
    fd = sys.fd
    total = fd.q ** (sys.n * P)
    check_budget(total, budget, "primitive scan")
    hits = 0
    for s, t in batch.chunk_ranges(total):
        G = batch.box_digits(fd, sys.n, P, s, t)
        G = G[np.all(sys.eval_batch(G) == 0, axis=(1, 2))]
        hits += int(_coprime_mask(fd, G, P - 1).sum())
    return hits


def _unshifted_base(sh) -> FormSystem:
    if isinstance(sh, ShiftedSystem):
        if not sh.is_trivial():
            raise ValueError("Mobius inversion needs m = 1 and b = 0")
        return sh.base
    return sh


def n_bound(d: int, R: int) -> int:
    return 33 * R if d == 2 else d * (d - 1) * 2 ** (d + 1) * R + R


def nu(d: int) -> int:
    return 1 if d == 2 else 0


def delta_J(d: int, R: int, J: int) -> int:
    return R * (d - 1) * (J - 1)


def hypothesis_profile(n: int, d: int, R: int, e: int, b: int, q: int, sigma_f: int | None = None,
                       p: int | None = None) -> dict:
    """Every threshold and constant gating the asymptotic counts, evaluated.

    sigma_f defaults to its upper bound R - 1.
    """
    sig = R - 1 if sigma_f is None else sigma_f
    mu, dim_b = expected_dims(n, d, R, e, b)
    wa_bound = 17 * R if d == 2 else d * (d - 1) * 2**d * R + R
    cal_c = ((1 - math.log(d - 1, q)) * n - R + 1) / (2 ** (d + nu(d)) * (d - 1))
    delta0 = Fraction(n - sig, (d - 1) * 2 ** (d - 1) * R)
    delta2 = (1 - Fraction(1, d)) * (Fraction(n, d) - R) - 1
    return {
        "n": n, "d": d, "R": R, "e": e, "b": b, "q": q, "sigma_f": sig,
        "fano": n >= R * d,
        "char_ok": (p if p is not None else q) > d,
        "n_threshold": n_bound(d, R),
        "n_bound_ok": n >= n_bound(d, R),
        "points_condition": e >= (d + 1 + R) * b,
        "low_degree_condition": e >= 2 * (d - 1) * R + 3 * d,
        "weak_approx_threshold": wa_bound,
        "weak_approx_n_ok": n > wa_bound,
        "q_condition": q >= (d - 1) ** n,
        "nu": nu(d),
        "weyl_constant": Fraction(1, 2 ** (d + nu(d)) * (d - 1)),
        "cal_C": cal_c,
        "cal_C_exceeds_dR": cal_c > d * R,
        "delta0": delta0,
        "delta1": float(delta0) * (1 - d * R / cal_c) if cal_c else float("nan"),
        "delta2": delta2,
        "delta2_positive": delta2 > 0,
        "Delta": {J: delta_J(d, R, J) for J in range(1, e + 2)},
        "mu": mu,
        "dim_M_eb": dim_b,
        "dim_Mor": mu + 3,
    }


def lines_on(sys: FormSystem, budget=None) -> int:
    """Lines of P^{n-1}(F_q) contained in X, via ordered pairs of distinct points."""
    fd = sys.fd
    q = fd.q
    pts = []
    for chunk in projective_points(fd, sys.n):
        vals = sys.eval_batch(chunk[:, :, None])
        pts.append(chunk[np.all(vals == 0, axis=(1, 2))])
    X = np.concatenate(pts)
    check_budget(X.shape[0] ** 2, budget, "point pairs")
    hits = 0
    scal = np.arange(q, dtype=np.int64)
    for i in range(X.shape[0]):
        A = X[i][None, :]
        B = X
        # points y + s x for s in F_q, plus y itself; x is on X already
        line = fd.vadd(B[:, None, :], fd.vmul(scal[None, :, None], A[:, None, :]))
        vals = sys.eval_batch(line.reshape(-1, sys.n)[:, :, None]).reshape(B.shape[0], -1)
        on = np.all(vals == 0, axis=1)
        distinct = np.any(B != X[i], axis=1)
        hits += int((on & distinct).sum())
    return hits // ((q + 1) * q)


def split_quadric(p: int) -> FormSystem:
    """x1 x2 - x3 x4 over F_p."""
    return FormSystem.from_dict({"field": f"{p}^1", "n": 4, "d": 2, "R": 1, "forms": [[
        {"exps": [1, 1, 0, 0], "c": "1"}, {"exps": [0, 0, 1, 1], "c": str(p - 1)}]]})


def trend_rows(systems, e: int = 1, budget=None) -> list[CensusResult]:
    return [moduli_count(s, e, budget) for s in systems]


def census_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q", "e", "b", "N_qe", "M_count", "dim_estimate", "expected_dim"])
    for r in sorted(rows, key=lambda r: (r.q, r.e, r.b)):
        w.writerow([r.q, r.e, r.b, r.N_qe, r.M_count, f"{r.dim_estimate:.6f}", r.expected_dim])
    return buf.getvalue()


def trend_table(rows) -> str:
    """Distance of log_q #M from the expected dimension as q grows."""
    out = ["q  e  M  log_q(M)  mu  |log_q(M)-mu|"]
    for r in sorted(rows, key=lambda r: r.q):
        dev = abs(r.dim_estimate - r.expected_dim)
        out.append(f"{r.q}  {r.e}  {r.M_count}  {r.dim_estimate:.4f}  {r.expected_dim}  {dev:.4f}")
    return "\n".join(out)


def smallest_q_nonempty(rows):
    """Smallest q among the rows with a nonempty moduli count, or None."""
    qs = [r.q for r in rows if r.M_count > 0]
    return min(qs) if qs else None
