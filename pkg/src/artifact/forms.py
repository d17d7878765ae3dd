"""Systems of forms f_1..f_R of equal degree d, their tensors and shifts."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import batch
from .errors import InstanceError, check_budget
from .field import FieldDescriptor
from .laurent import LaurentElement
from .poly import Poly, gcd_many, parse_poly_vector


def _multinomial(exps) -> int:
    r = math.factorial(sum(exps))
    for e in exps:
        r //= math.factorial(e)
    return r


def _exps_of(indices, n) -> tuple[int, ...]:
    e = [0] * n
    for i in indices:
        e[i] += 1
    return tuple(e)


@dataclass(frozen=True)
class FormSystem:
    fd: FieldDescriptor
    n: int
    d: int
    R: int
    forms: tuple  # per form: tuple of (exps, coefficient code), sorted

    def __post_init__(self):
        if self.fd.p <= self.d:
            raise InstanceError(f"characteristic {self.fd.p} must exceed the degree {self.d}")
        if len(self.forms) != self.R:
            raise InstanceError("number of forms differs from R")
        clean = []
        for form in self.forms:
            acc: dict[tuple[int, ...], int] = {}
            for exps, c in form:
                exps = tuple(int(e) for e in exps)
                if len(exps) != self.n or sum(exps) != self.d or min(exps) < 0:
                    raise InstanceError(f"monomial {exps} is not of degree {self.d} in {self.n} variables")
                acc[exps] = self.fd.add(acc.get(exps, 0), int(c))
            clean.append(tuple(sorted((e, c) for e, c in acc.items() if c)))
        object.__setattr__(self, "forms", tuple(clean))

    # loading
    @classmethod
    def from_dict(cls, obj: dict) -> "FormSystem":
        try:
            fd = FieldDescriptor.parse(obj["field"])
            n, d, R = int(obj["n"]), int(obj["d"]), int(obj["R"])
            forms = []
            for form in obj["forms"]:
                forms.append(tuple((tuple(mon["exps"]), fd.parse_element(str(mon["c"])))
                                   for mon in form))
        except (KeyError, TypeError) as exc:
            raise InstanceError(f"malformed instance: {exc}") from exc
        return cls(fd, n, d, R, tuple(forms))

    @classmethod
    def from_json(cls, text: str) -> "FormSystem":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"instance is not valid JSON: {exc}") from exc
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        return {
            "field": str(self.fd), "n": self.n, "d": self.d, "R": self.R,
            "forms": [[{"exps": list(e), "c": self.fd.format_element(c)} for e, c in form]
                      for form in self.forms],
        }

    @property
    def q(self) -> int:
        return self.fd.q

    # tensors and multilinear forms
    @cached_property
    def tensors(self) -> np.ndarray:
        """Symmetric coefficient arrays c[k, i_1, ..., i_d] (field codes)."""
        fd, n, d = self.fd, self.n, self.d
        T = np.zeros((self.R,) + (n,) * d, dtype=np.int64)
        for k, form in enumerate(self.forms):
            for exps, c in form:
                val = fd.mul(c, fd.inv(fd.from_int(_multinomial(exps))))
                base = [i for i, e in enumerate(exps) for _ in range(e)]
                for perm in set(itertools.permutations(base)):
                    T[(k,) + perm] = val
        return T

    def expand_tensors(self) -> tuple:
        """Monomial maps recovered from the tensors (round-trip check)."""
        fd = self.fd
        out = []
        T = self.tensors
        for k in range(self.R):
            acc: dict[tuple[int, ...], int] = {}
            for idx in itertools.product(range(self.n), repeat=self.d):
                c = int(T[(k,) + idx])
                if c:
                    e = _exps_of(idx, self.n)
                    acc[e] = fd.add(acc.get(e, 0), c)
            out.append(tuple(sorted((e, c) for e, c in acc.items() if c)))
        return tuple(out)

    @cached_property
    def psi_terms(self):
        """psi_terms[k][i]: list of (indices i_1..i_{d-1}, coefficient) of Psi_i^(k).

        The coefficient d! c_{i_1..i_{d-1} i} equals the monomial coefficient
        times prod_j e_j!, so no inversion is needed.
        """
        fd, n, d = self.fd, self.n, self.d
        out = []
        for form in self.forms:
            coef = dict(form)
            per_i = []
            for i in range(n):
                terms = []
                for idx in itertools.product(range(n), repeat=d - 1):
                    e = _exps_of(idx + (i,), n)
                    c = coef.get(e, 0)
                    if c:
                        w = 1
                        for ej in e:
                            w *= math.factorial(ej)
                        terms.append((idx, fd.mul(c, fd.from_int(w))))
                per_i.append(terms)
            out.append(per_i)
        return out

    @cached_property
    def gradient_terms(self):
        """gradient_terms[k][i]: monomial list of the partial derivative d f_k / d x_i."""
        fd = self.fd
        out = []
        for form in self.forms:
            per_i = []
            for i in range(self.n):
                terms = []
                for exps, c in form:
                    if exps[i]:
                        e = list(exps)
                        e[i] -= 1
                        terms.append((tuple(e), fd.mul(c, fd.from_int(exps[i]))))
                per_i.append(terms)
            out.append(per_i)
        return out

    # evaluation
    def evaluate(self, x):
        """Values f_1(x), ..., f_R(x) for a vector of Poly or LaurentElement."""
        if len(x) != self.n:
            raise ValueError("vector length differs from n")
        if all(isinstance(v, Poly) for v in x):
            return tuple(_eval_poly_terms(self.fd, form, x) for form in self.forms)
        xs = [v if isinstance(v, LaurentElement) else LaurentElement.from_poly(v) for v in x]
        return tuple(_eval_laurent_terms(self.fd, form, xs) for form in self.forms)

    def evaluate_constants(self, x) -> tuple[int, ...]:
        fd = self.fd
        out = []
        for form in self.forms:
            acc = 0
            for exps, c in form:
                term = c
                for xi, e in zip(x, exps):
                    if e:
                        term = fd.mul(term, fd.pow(xi, e))
                acc = fd.add(acc, term)
            out.append(acc)
        return tuple(out)

    def gradient(self, x):
        """Matrix of partial derivatives d f_k / d x_i at a polynomial vector."""
        return [[_eval_poly_terms(self.fd, self.gradient_terms[k][i], x) for i in range(self.n)]
                for k in range(self.R)]

    def multilinear_psi(self, k: int, i: int, *us):
        """Psi_i^(k)(u^(1), ..., u^(d-1)) for polynomial vectors u^(j)."""
        if len(us) != self.d - 1:
            raise ValueError("need d-1 vectors")
        fd = self.fd
        acc = Poly.zero(fd)
        for idx, c in self.psi_terms[k][i]:
            term = Poly.const(fd, c)
            for j, ij in enumerate(idx):
                term = term * us[j][ij]
            acc = acc + term
        return acc

    def eval_batch(self, Z: np.ndarray) -> np.ndarray:
        """Values (N, R, d(L-1)+1) for a batch Z of shape (N, n, L)."""
        L = Z.shape[2]
        out_len = self.d * (L - 1) + 1
        return np.stack([batch.eval_terms(self.fd, form, Z, out_len) for form in self.forms],
                        axis=1)

    def psi_batch(self, Us) -> np.ndarray:
        """Psi values (N, R, n, Lout) for a list of d-1 batches, each (N, n, L_j)."""
        fd = self.fd
        N = Us[0].shape[0]
        out_len = sum(U.shape[2] - 1 for U in Us) + 1
        out = np.zeros((N, self.R, self.n, out_len), dtype=np.int64)
        for k in range(self.R):
            for i in range(self.n):
                acc = np.zeros((N, out_len), dtype=np.int64)
                for idx, c in self.psi_terms[k][i]:
                    term = np.full((N, 1), c, dtype=np.int64)
                    for j, ij in enumerate(idx):
                        term = batch.bmul(fd, term, Us[j][:, ij, :])
                    acc = fd.vadd(acc, batch.pad(term, out_len)[:, :out_len])
                out[:, k, i, :] = acc
        return out

    def jacobian_constants(self, x) -> list[list[int]]:
        """Jacobian matrix (R x n) at a constant point (codes)."""
        fd = self.fd
        rows = []
        for k in range(self.R):
            row = []
            for i in range(self.n):
                acc = 0
                for exps, c in self.gradient_terms[k][i]:
                    term = c
                    for xi, e in zip(x, exps):
                        if e:
                            term = fd.mul(term, fd.pow(xi, e))
                    acc = fd.add(acc, term)
                row.append(acc)
            rows.append(row)
        return rows

    def over_extension(self, s: int) -> "FormSystem":
        """The same system with coefficients embedded in F_{q^s}."""
        big, emb = self.fd.extension(s)
        forms = tuple(tuple((e, int(emb[c])) for e, c in form) for form in self.forms)
        return FormSystem(big, self.n, self.d, self.R, forms)


def _eval_poly_terms(fd, form, x) -> Poly:
    acc = Poly.zero(fd)
    for exps, c in form:
        term = Poly.const(fd, c)
        for xi, e in zip(x, exps):
            if e:
                term = term * (xi ** e)
        acc = acc + term
    return acc


def _eval_laurent_terms(fd, form, xs) -> LaurentElement:
    acc = LaurentElement(fd)
    for exps, c in form:
        term = LaurentElement(fd, ((0, c),))
        for xi, e in zip(xs, exps):
            for _ in range(e):
                term = term * xi
        acc = acc + term
    return acc


def rank_mod(fd: FieldDescriptor, rows) -> int:
    """Rank of a matrix of field codes by Gaussian elimination."""
    M = [list(r) for r in rows]
    rank = 0
    ncols = len(M[0]) if M else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(M)) if M[r][col]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = fd.inv(M[rank][col])
        M[rank] = [fd.mul(v, inv) for v in M[rank]]
        for r in range(len(M)):
            if r != rank and M[r][col]:
                c = M[r][col]
                M[r] = [fd.sub(a, fd.mul(c, b)) for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class ShiftedSystem:
    """F(x) = f(m x + b) for monic m and deg b_i < deg m."""

    base: FormSystem
    m: Poly
    b: tuple = field(default=())

    def __post_init__(self):
        fd = self.base.fd
        if not self.m.is_monic():
            raise InstanceError("m must be monic")
        b = tuple(self.b) if self.b else tuple(Poly.zero(fd) for _ in range(self.base.n))
        if len(b) != self.base.n:
            raise InstanceError("b must have length n")
        if any(bi.degree >= self.m.degree for bi in b):
            raise InstanceError("each b_i must have degree below deg m")
        object.__setattr__(self, "b", b)
        g = gcd_many(list(b) + [self.m])
        if g.degree != 0:
            raise InstanceError("gcd(b, m) must be 1")
        for v in self.base.evaluate(b):
            if not (v % self.m).is_zero():
                raise InstanceError("f(b) is not divisible by m")

    @property
    def fd(self):
        return self.base.fd

    @property
    def n(self):
        return self.base.n

    @property
    def d(self):
        return self.base.d

    @property
    def R(self):
        return self.base.R

    @property
    def deg_m(self) -> int:
        return self.m.degree

    def is_trivial(self) -> bool:
        return self.m.degree == 0

    def point(self, y):
        """m y + b for a polynomial vector y."""
        return tuple(self.m * yi + bi for yi, bi in zip(y, self.b))

    def evaluate(self, y):
        return self.base.evaluate(self.point(y))

    def shifted_batch(self, Y: np.ndarray) -> np.ndarray:
        """m Y + b for a batch Y (N, n, L)."""
        fd = self.fd
        L = Y.shape[2] + self.deg_m
        Z = batch.bmul(fd, Y, batch.poly_array(self.m)[None, None, :])
        Z = batch.pad(Z, L)[:, :, :L]
        B = np.stack([batch.poly_array(bi, L)[:L] for bi in self.b])
        return fd.vadd(Z, B[None, :, :])

    def eval_batch(self, Y: np.ndarray) -> np.ndarray:
        """F values (N, R, d(L - 1 + deg m) + 1) for a batch Y (N, n, L)."""
        if self.is_trivial():
            return self.base.eval_batch(Y)
        return self.base.eval_batch(self.shifted_batch(Y))

    def value_degree_bound(self, P: int) -> int:
        return self.d * (P - 1 + self.deg_m)


def shift(sys: FormSystem, m: Poly | None = None, b=None) -> ShiftedSystem:
    fd = sys.fd
    m = Poly.one(fd) if m is None else m
    if b is None:
        b = tuple(Poly.zero(fd) for _ in range(sys.n))
    else:
        b = parse_poly_vector(fd, b) if not all(isinstance(v, Poly) for v in b) else tuple(b)
    return ShiftedSystem(sys, m, b)


# --- projective scans, smoothness and Birch-locus censuses

@dataclass
class SmoothnessVerdict:
    checked_degrees: list
    witnesses: list
    complete: bool
    point_counts: dict

    @property
    def smooth(self) -> bool:
        return not self.witnesses


def projective_points(fd: FieldDescriptor, n: int):
    """Batches of normalized projective points (first nonzero coordinate 1)."""
    q = fd.q
    for lead in range(n):
        free = n - 1 - lead
        total = q**free
        for s, e in batch.chunk_ranges(total):
            tail = batch.box_digits(fd, free, 1, s, e)[:, :, 0] if free else np.zeros((e - s, 0), dtype=np.int64)
            pts = np.zeros((e - s, n), dtype=np.int64)
            pts[:, lead] = 1
            pts[:, lead + 1:] = tail
            yield pts


def _const_values(sys: FormSystem, terms, pts: np.ndarray) -> np.ndarray:
    return batch.eval_terms(sys.fd, terms, pts[:, :, None], 1)[:, 0]


def projective_census(sys: FormSystem, budget=None):
    """(#X(F_q), singular points) by exhaustive scan of P^{n-1}(F_q)."""
    fd = sys.fd
    check_budget(fd.q ** (sys.n - 1), budget, "projective scan")
    count = 0
    witnesses = []
    for pts in projective_points(fd, sys.n):
        vals = np.stack([_const_values(sys, form, pts) for form in sys.forms], axis=1)
        on = np.all(vals == 0, axis=1)
        pts_on = pts[on]
        count += int(pts_on.shape[0])
        if not pts_on.shape[0]:
            continue
        jac = np.stack([np.stack([_const_values(sys, sys.gradient_terms[k][i], pts_on)
                                  if sys.gradient_terms[k][i] else np.zeros(pts_on.shape[0], dtype=np.int64)
                                  for i in range(sys.n)], axis=1)
                        for k in range(sys.R)], axis=1)  # (N, R, n)
        if sys.R == 1:
            sing = np.all(jac[:, 0, :] == 0, axis=1)
            for idx in np.nonzero(sing)[0]:
                witnesses.append(tuple(int(v) for v in pts_on[idx]))
        else:
            for idx in range(pts_on.shape[0]):
                if rank_mod(fd, jac[idx].tolist()) < sys.R:
                    witnesses.append(tuple(int(v) for v in pts_on[idx]))
    return count, witnesses


def smoothness_check(sys: FormSystem, s_max: int, budget=None) -> SmoothnessVerdict:
    if s_max < 1:
        raise ValueError("s_max must be at least 1")
    checked, witnesses, counts = [], [], {}
    for s in range(1, s_max + 1):
        ext = sys.over_extension(s)
        count, wit = projective_census(ext, budget)
        checked.append(s)
        counts[s] = count
        if wit:
            witnesses.append((s, wit[0]))
            break
    return SmoothnessVerdict(checked, witnesses, True, counts)


@dataclass
class Census:
    s: int
    q: int
    count: int
    dim_estimate: float


def _affine_points(fd, n, start, stop):
    return batch.box_digits(fd, n, 1, start, stop)[:, :, 0]


def _locus_count(sys: FormSystem, hs, budget=None) -> int:
    """#{x in A^n: the Jacobian rows combined by h vanish, for one h} or rank < R."""
    fd = sys.fd
    total = fd.q**sys.n
    check_budget(total, budget, "affine census")
    count = 0
    for s, e in batch.chunk_ranges(total):
        pts = _affine_points(fd, sys.n, s, e)
        jac = np.stack([np.stack([_const_values(sys, sys.gradient_terms[k][i], pts)
                                  if sys.gradient_terms[k][i] else np.zeros(pts.shape[0], dtype=np.int64)
                                  for i in range(sys.n)], axis=1)
                        for k in range(sys.R)], axis=1)
        if hs is None:
            if sys.R == 1:
                count += int(np.all(jac[:, 0, :] == 0, axis=1).sum())
            else:
                count += sum(1 for j in jac if rank_mod(fd, j.tolist()) < sys.R)
        else:
            h = np.asarray(hs, dtype=np.int64)
            comb = np.zeros((pts.shape[0], sys.n), dtype=np.int64)
            for k in range(sys.R):
                comb = fd.vadd(comb, fd.vmul(jac[:, k, :], h[k]))
            count += int(np.all(comb == 0, axis=1).sum())
    return count


def birch_locus_census(sys: FormSystem, s: int = 1, budget=None) -> Census:
    """Affine count of {x: rank of the Jacobian < R} over F_{q^s}."""
    ext = sys.over_extension(s)
    c = _locus_count(ext, None, budget)
    return Census(s, ext.q, c, math.log(c, ext.q) if c else float("-inf"))


def sigma_f_census(sys: FormSystem, s: int = 1, budget=None) -> Census:
    """Max over nonzero constant h (up to scalar) of #V_{h.f}(F_{q^s})."""
    ext = sys.over_extension(s)
    best = 0
    for h in projective_points(ext.fd, sys.R):
        for row in h:
            best = max(best, _locus_count(ext, row.tolist(), budget))
    return Census(s, ext.q, best, math.log(best, ext.q) if best else float("-inf"))


def affine_cone_count(sys: FormSystem, s: int = 1, budget=None) -> int:
    """#{x in F_{q^s}^n : f(x) = 0} through the projective scan."""
    ext = sys.over_extension(s)
    count, _ = projective_census(ext, budget)
    return 1 + (ext.q - 1) * count


def sigma_readings(census: Census) -> dict:
    """Two readings of the Birch dimension from an affine census.

    projective: 0 when only the origin is found, else the projective dimension
    estimate plus one; log_count: ceiling of log_{q^s} of the affine count.
    """
    Q, c = census.q, census.count
    if c <= 1:
        proj = 0
    else:
        proj = round(math.log((c - 1) / (Q - 1), Q)) + 1
    return {"projective": proj, "log_count": math.ceil(math.log(c, Q) - 1e-12) if c else 0}
