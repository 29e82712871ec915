"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

Set ``RANKEMBED_DISABLE_NUMBA=1`` to force the numpy versions (useful for
debugging and for the agreement tests).  Both backends implement the same
algorithms; they agree to rounding.
"""

from __future__ import annotations

import itertools
import math
import os

import numpy as np

_DISABLED = os.environ.get("RANKEMBED_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:  # pragma: no cover - import guard
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


BACKEND = "numba" if HAVE_NUMBA else "numpy"


# --------------------------------------------------------------------------
# symmetric eigenvalues: cyclic Jacobi


def _jacobi_eigvalsh_py(a, tol=1e-15, max_sweeps=100):
    a = a.copy()
    m = a.shape[0]
    for _ in range(max_sweeps):
        off = 0.0
        diag = 0.0
        for i in range(m):
            diag += a[i, i] * a[i, i]
            for j in range(i + 1, m):
                off += a[i, j] * a[i, j]
        if off <= tol * tol * diag or off == 0.0:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(m):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(m):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
    out = np.empty(m)
    for i in range(m):
        out[i] = a[i, i]
    out.sort()
    return out


_jacobi_eigvalsh_nb = njit(cache=True)(_jacobi_eigvalsh_py)


def jacobi_eigvalsh(a: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a real symmetric matrix."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    if HAVE_NUMBA:
        return _jacobi_eigvalsh_nb(a)
    return np.linalg.eigvalsh(a)


# --------------------------------------------------------------------------
# general SPD distance


@njit(cache=True)
def _spd_distance_nb(p, q):
    low = np.linalg.cholesky(p)
    inv = np.linalg.inv(low)
    c = inv @ q @ inv.T
    c = 0.5 * (c + c.T)
    lam = _jacobi_eigvalsh_nb(c)
    acc = 0.0
    for v in lam:
        acc += math.log(v) ** 2
    return math.sqrt(acc)


def _spd_distance_np(p, q):
    low = np.linalg.cholesky(p)
    inv = np.linalg.inv(low)
    c = inv @ q @ inv.T
    lam = np.linalg.eigvalsh(0.5 * (c + c.T))
    return float(np.sqrt(np.sum(np.log(lam) ** 2)))


def spd_distance_raw(p: np.ndarray, q: np.ndarray) -> float:
    """sqrt(sum log^2 lambda_k(P^-1 Q)) by Cholesky congruence and a symmetric eigensolve."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    q = np.ascontiguousarray(q, dtype=np.float64)
    if HAVE_NUMBA:
        return float(_spd_distance_nb(p, q))
    return _spd_distance_np(p, q)


# --------------------------------------------------------------------------
# AN-subgroup distance via compound matrices
#
# For M = exp(diag x) (I + sum s_i E_{a_i b_i}) the k-th compound factors as
# C_k(exp diag x) * prod_i C_k(I + s_i E_{a_i b_i}).  Each elementary compound
# has entries in {0, +-1, +-s_i}; their product has single-monomial entries,
# so no cancellation occurs.  log sigma_1 + ... + log sigma_k is the log of
# the top singular value of C_k(M), evaluated in log-scale.


class CompoundTables:
    """Precomputed subset and sign tables for matrices of size m with given root pairs."""

    def __init__(self, m: int, pairs):
        self.m = m
        self.pairs = [tuple(p) for p in pairs]
        self.subsets = [list(itertools.combinations(range(m), k)) for k in range(1, m)]
        big = max(len(s) for s in self.subsets)
        nk = m - 1
        nf = len(self.pairs)
        self.sizes = np.array([len(s) for s in self.subsets], dtype=np.int64)
        self.member = np.zeros((nk, big, m), dtype=np.float64)
        self.pattern = np.zeros((nk, nf, big, big), dtype=np.float64)
        for k, subs in enumerate(self.subsets):
            index = {s: r for r, s in enumerate(subs)}
            for r, s in enumerate(subs):
                self.member[k, r, list(s)] = 1.0
                for f, (a, b) in enumerate(self.pairs):
                    # (I + s E_ab)[I, J] with J = I - {a} + {b}
                    if a in s and b not in s:
                        j = tuple(sorted((set(s) - {a}) | {b}))
                        lo, hi = min(a, b), max(a, b)
                        between = sum(1 for c in s if lo < c < hi)
                        self.pattern[k, f, r, index[j]] = -1.0 if between % 2 else 1.0


@njit(cache=True)
def _an_logsv_nb(x, s, member, pattern, sizes):
    nk = sizes.shape[0]
    nf = s.shape[0]
    out = np.empty(nk)
    for k in range(nk):
        b = sizes[k]
        c = np.eye(b)
        for f in range(nf):
            fac = np.eye(b) + s[f] * pattern[k, f, :b, :b]
            c = c @ fac
        logd = np.zeros(b)
        for r in range(b):
            for j in range(x.shape[0]):
                logd[r] += member[k, r, j] * x[j]
        top = -np.inf
        for r in range(b):
            for j in range(b):
                if c[r, j] != 0.0:
                    v = logd[r] + math.log(abs(c[r, j]))
                    if v > top:
                        top = v
        a = np.zeros((b, b))
        for r in range(b):
            for j in range(b):
                if c[r, j] != 0.0:
                    v = math.exp(logd[r] + math.log(abs(c[r, j])) - top)
                    a[r, j] = v if c[r, j] > 0 else -v
        g = a @ a.T
        lam = _jacobi_eigvalsh_nb(g)
        out[k] = top + 0.5 * math.log(lam[-1])
    return out


@njit(cache=True)
def _an_distance_batch_nb(xs, ss, member, pattern, sizes):
    npairs = xs.shape[0]
    nk = sizes.shape[0]
    out = np.empty(npairs)
    for i in range(npairs):
        cum = _an_logsv_nb(xs[i], ss[i], member, pattern, sizes)
        acc = 0.0
        prev = 0.0
        for k in range(nk):
            acc += (2.0 * (cum[k] - prev)) ** 2
            prev = cum[k]
        acc += (2.0 * (0.0 - prev)) ** 2
        out[i] = math.sqrt(acc)
    return out


def _an_distance_batch_np(xs, ss, member, pattern, sizes):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        cum = _an_logsv_np(xs[i], ss[i], member, pattern, sizes)
        logsv = np.diff(np.concatenate(([0.0], cum, [0.0])))
        out[i] = math.sqrt(float(np.sum((2.0 * logsv) ** 2)))
    return out


def _an_logsv_np(x, s, member, pattern, sizes):
    nk = sizes.shape[0]
    out = np.empty(nk)
    for k in range(nk):
        b = int(sizes[k])
        c = np.eye(b)
        for f in range(s.shape[0]):
            c = c @ (np.eye(b) + s[f] * pattern[k, f, :b, :b])
        logd = member[k, :b, :] @ x
        nz = c != 0.0
        with np.errstate(divide="ignore"):
            logabs = np.where(nz, logd[:, None] + np.log(np.abs(np.where(nz, c, 1.0))), -np.inf)
        top = logabs.max()
        a = np.where(nz, np.sign(c) * np.exp(logabs - top), 0.0)
        lam = np.linalg.eigvalsh(a @ a.T)
        out[k] = top + 0.5 * math.log(lam[-1])
    return out


def an_log_singular_values(x, s, tables: CompoundTables) -> np.ndarray:
    """log sigma_1 >= ... >= log sigma_m of exp(diag x)(I + sum s_i E_{a_i b_i})."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    s = np.ascontiguousarray(s, dtype=np.float64)
    if HAVE_NUMBA:
        cum = _an_logsv_nb(x, s, tables.member, tables.pattern, tables.sizes)
    else:
        cum = _an_logsv_np(x, s, tables.member, tables.pattern, tables.sizes)
    return np.diff(np.concatenate(([0.0], cum, [0.0])))


def an_distance_batch(xs, ss, tables: CompoundTables, backend: str | None = None) -> np.ndarray:
    """Distance from the base point to exp(diag x)(I + sum s Z) for each row of (xs, ss)."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ss = np.ascontiguousarray(ss, dtype=np.float64)
    use = backend or BACKEND
    if use == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is disabled or missing")
        return _an_distance_batch_nb(xs, ss, tables.member, tables.pattern, tables.sizes)
    return _an_distance_batch_np(xs, ss, tables.member, tables.pattern, tables.sizes)
