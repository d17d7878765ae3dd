"""Vectorized kernels: polynomial batches as numpy code arrays.

A batch of polynomials is an int64 array whose last axis holds little-endian
coefficient codes.  Leading axes broadcast.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .field import FieldDescriptor
from .poly import Poly

CHUNK = 1 << 16


def box_digits(fd: FieldDescriptor, n: int, P: int, start: int, stop: int) -> np.ndarray:
    """Coefficient arrays (N, n, P) for box indices start..stop-1.

    Index digit j (base q, least significant first) is coefficient j % P of
    coordinate j // P.
    """
    q = fd.q
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((stop - start, n * P), dtype=np.int64)
    for j in range(n * P):
        out[:, j] = idx % q
        idx //= q
    return out.reshape(stop - start, n, P)


def digit_grid(fd: FieldDescriptor, width: int, start: int = 0, stop: int | None = None):
    """All digit vectors of the given width (least significant first)."""
    total = fd.q**width
    stop = total if stop is None else stop
    return box_digits(fd, 1, width, start, stop)[:, 0, :]


def pad(A: np.ndarray, L: int) -> np.ndarray:
    if A.shape[-1] >= L:
        return A
    widths = [(0, 0)] * (A.ndim - 1) + [(0, L - A.shape[-1])]
    return np.pad(A, widths)


def badd(fd, A, B):
    L = max(A.shape[-1], B.shape[-1])
    return fd.vadd(pad(A, L), pad(B, L))


def bsub(fd, A, B):
    L = max(A.shape[-1], B.shape[-1])
    return fd.vsub(pad(A, L), pad(B, L))


def bscale(fd, A, c: int):
    return fd.vmul(A, np.int64(c))


def bmul(fd: FieldDescriptor, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Convolution of coefficient arrays along the last axis."""
    La, Lb = A.shape[-1], B.shape[-1]
    shape = np.broadcast_shapes(A.shape[:-1], B.shape[:-1]) + (La + Lb - 1,)
    out = np.zeros(shape, dtype=np.int64)
    if fd.k == 1:
        p = fd.p
        for i in range(La):
            out[..., i:i + Lb] += A[..., i:i + 1] * B
            if (i + 1) % 64 == 0:
                out %= p
        return out % p
    add, mul = fd.tables["add"], fd.tables["mul"]
    for i in range(La):
        out[..., i:i + Lb] = add[out[..., i:i + Lb], mul[A[..., i:i + 1], B]]
    return out


def poly_array(g: Poly, L: int | None = None) -> np.ndarray:
    c = np.array(g.c if g.c else (0,), dtype=np.int64)
    return pad(c, L) if L else c


def bmod(fd: FieldDescriptor, A: np.ndarray, g: Poly) -> np.ndarray:
    """Reduce each polynomial of the batch modulo g (result length deg g)."""
    dg = g.degree
    if dg == 0:
        return np.zeros(A.shape[:-1] + (0,), dtype=np.int64)
    A = A.copy()
    inv = fd.inv(g.lc)
    garr = np.array(g.c, dtype=np.int64)
    for top in range(A.shape[-1] - 1, dg - 1, -1):
        c = fd.vmul(A[..., top], np.int64(inv))
        s = top - dg
        A[..., s:top + 1] = fd.vsub(A[..., s:top + 1], fd.vmul(c[..., None], garr))
    return pad(A[..., :dg], dg)


def bdivmod(fd: FieldDescriptor, A: np.ndarray, g: Poly):
    """Quotient and remainder of each polynomial of the batch by g."""
    dg = g.degree
    A = A.copy()
    L = A.shape[-1]
    qlen = max(1, L - dg)
    Q = np.zeros(A.shape[:-1] + (qlen,), dtype=np.int64)
    inv = fd.inv(g.lc)
    garr = np.array(g.c, dtype=np.int64)
    for top in range(L - 1, dg - 1, -1):
        c = fd.vmul(A[..., top], np.int64(inv))
        s = top - dg
        Q[..., s] = c
        A[..., s:top + 1] = fd.vsub(A[..., s:top + 1], fd.vmul(c[..., None], garr))
    return Q, pad(A[..., :dg], dg) if dg > 0 else np.zeros(A.shape[:-1] + (0,), dtype=np.int64)


def eval_terms(fd: FieldDescriptor, terms, Z: np.ndarray, out_len: int) -> np.ndarray:
    """Evaluate sum_c c * prod_i z_i^{e_i} over a batch Z of shape (N, n, L)."""
    N = Z.shape[0]
    acc = np.zeros((N, out_len), dtype=np.int64)
    powers: dict[tuple[int, int], np.ndarray] = {}

    def zpow(i, e):
        key = (i, e)
        if key not in powers:
            if e == 1:
                powers[key] = Z[:, i, :]
            else:
                powers[key] = bmul(fd, zpow(i, e - 1), Z[:, i, :])
        return powers[key]

    for exps, coef in terms:
        mon = np.ones((N, 1), dtype=np.int64)
        for i, e in enumerate(exps):
            if e:
                mon = bmul(fd, mon, zpow(i, e))
        mon = bscale(fd, mon, coef)
        acc = fd.vadd(acc, pad(mon, out_len)[:, :out_len])
    return acc


def encode_rows(values: np.ndarray, q: int):
    """Integer keys for rows of a 2-d code array, or None if they overflow."""
    width = values.shape[1]
    if width == 0:
        return np.zeros(values.shape[0], dtype=np.int64)
    if q**width >= 2**62:
        return None
    weights = q ** np.arange(width, dtype=np.int64)
    return values @ weights


def decode_keys(keys: np.ndarray, q: int, width: int) -> np.ndarray:
    out = np.empty((keys.shape[0], width), dtype=np.int64)
    k = keys.copy()
    for j in range(width):
        out[:, j] = k % q
        k //= q
    return out


class Histogram:
    """Multiset of value vectors (rows) with multiplicities."""

    def __init__(self, values: np.ndarray, counts: np.ndarray, shape: tuple[int, int]):
        self.values = values  # (B, R*L)
        self.counts = counts  # (B,)
        self.shape = shape  # (R, L)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def count_of(self, row) -> int:
        row = np.asarray(row, dtype=np.int64).ravel()
        hit = np.all(self.values == row, axis=1)
        return int(self.counts[hit].sum())

    def zero_count(self) -> int:
        return self.count_of(np.zeros(self.values.shape[1], dtype=np.int64))

    def rows(self) -> np.ndarray:
        return self.values.reshape((-1,) + self.shape)


def histogram_from_rows(rows_list, q: int, shape) -> Histogram:
    width = shape[0] * shape[1]
    allrows = [r.reshape(r.shape[0], width) for r in rows_list if r.shape[0]]
    if not allrows:
        return Histogram(np.zeros((0, width), dtype=np.int64), np.zeros(0, dtype=np.int64), shape)
    rows = np.concatenate(allrows)
    keys = encode_rows(rows, q)
    if keys is not None:
        uk, counts = np.unique(keys, return_counts=True)
        return Histogram(decode_keys(uk, q, width), counts.astype(np.int64), shape)
    uv, counts = np.unique(rows, axis=0, return_counts=True)
    return Histogram(uv, counts.astype(np.int64), shape)


def merge_histograms(hists, q: int, shape) -> Histogram:
    width = shape[0] * shape[1]
    vals = [h.values for h in hists if h.values.shape[0]]
    if not vals:
        return Histogram(np.zeros((0, width), dtype=np.int64), np.zeros(0, dtype=np.int64), shape)
    values = np.concatenate(vals)
    counts = np.concatenate([h.counts for h in hists if h.values.shape[0]])
    keys = encode_rows(values, q)
    if keys is None:
        uv, inv = np.unique(values, axis=0, return_inverse=True)
    else:
        uk, inv = np.unique(keys, return_inverse=True)
        uv = decode_keys(uk, q, width)
    summed = np.zeros(uv.shape[0], dtype=np.int64)
    np.add.at(summed, inv.ravel(), counts)
    return Histogram(uv, summed, shape)


def char_exponents(fd: FieldDescriptor, A: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Matrix of tr(sum_j A[a, j] W[b, j]) mod p.

    A has shape (Na, M), W has shape (B, M); both hold field codes.
    """
    p = fd.p
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], W.shape[0]), dtype=np.int64)
    if fd.k == 1:
        return (A @ W.T) % p
    coords = fd.tables["coords"]
    T = fd.tables["tform"]
    Ac = (coords[A] @ T) % p  # (Na, M, k)
    Wc = coords[W]  # (B, M, k)
    return (Ac.reshape(A.shape[0], -1) @ Wc.reshape(W.shape[0], -1).T) % p


def weighted_exponent_counts(E: np.ndarray, weights: np.ndarray, p: int) -> np.ndarray:
    """Row-wise counts (Na, p): sum of weights with exponent j."""
    out = np.empty((E.shape[0], p), dtype=np.int64)
    for j in range(p):
        out[:, j] = (E == j) @ weights
    return out


def run_chunks(func, args_list, workers: int = 1):
    """Map func over argument tuples, optionally in worker processes.

    Results come back in submission order so reductions are deterministic.
    """
    if workers <= 1 or len(args_list) <= 1:
        return [func(*a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futs = [ex.submit(func, *a) for a in args_list]
        return [f.result() for f in futs]


def chunk_ranges(total: int, chunk: int = CHUNK):
    return [(s, min(total, s + chunk)) for s in range(0, total, chunk)]
