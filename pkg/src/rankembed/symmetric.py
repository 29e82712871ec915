"""Products of hyperbolic planes inside SL(n+1, R)/SO(n+1) via an AN-subgroup.

Hyperbolic points are affine-group coordinates (t, s), standing for the
matrix [[e^t, s e^t], [0, e^-t]] applied to i in the upper half plane, so
z = s e^{2t} + i e^{2t}.  The group law is

    (t, s) * (t', s') = (t + t', s e^{-2t'} + s').

The embedding sends a tuple of such points to g g^T with
g = exp(sum t_i X_i) (I + sum s_i Z_i).  Symmetric-space distances use the
trace-form metric d(P, Q) = sqrt(sum log^2 lambda(P^-1 Q)).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import EmptyBin, NotSPD, PostconditionViolated
from .reports import VerificationReport
from .roots import CartanType, Root, enumerate_positive_roots, select_strongly_commuting_roots

# sup over L >= 0 of 2 asinh(sinh(L/2) e^{-L}); attained at e^{-L} = 1/3
RANK_ONE_DELTA_SUP = 2.0 * math.asinh(1.0 / (3.0 * math.sqrt(3.0)))


@dataclass(frozen=True)
class HyperbolicPoint:
    t: float
    s: float

    @property
    def z(self) -> complex:
        y = math.exp(2.0 * self.t)
        return complex(self.s * y, y)

    @classmethod
    def from_upper_half_plane(cls, x: float, y: float) -> "HyperbolicPoint":
        return cls(0.5 * math.log(y), x / y)

    def __mul__(self, other: "HyperbolicPoint") -> "HyperbolicPoint":
        return HyperbolicPoint(self.t + other.t, self.s * math.exp(-2.0 * other.t) + other.s)

    def inverse(self) -> "HyperbolicPoint":
        return HyperbolicPoint(-self.t, -self.s * math.exp(2.0 * self.t))


@dataclass(frozen=True)
class ProductPoint:
    factors: tuple[HyperbolicPoint, ...]

    @classmethod
    def of(cls, pairs) -> "ProductPoint":
        return cls(tuple(HyperbolicPoint(float(t), float(s)) for t, s in pairs))

    @classmethod
    def zero(cls, n: int) -> "ProductPoint":
        return cls(tuple(HyperbolicPoint(0.0, 0.0) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.factors)

    def __mul__(self, other: "ProductPoint") -> "ProductPoint":
        return ProductPoint(tuple(a * b for a, b in zip(self.factors, other.factors)))

    def inverse(self) -> "ProductPoint":
        return ProductPoint(tuple(a.inverse() for a in self.factors))

    def ts(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([f.t for f in self.factors]), np.array([f.s for f in self.factors]))


@dataclass(frozen=True)
class ANEmbedding:
    n: int
    roots: tuple[Root, ...]
    X: tuple[tuple[Fraction, ...], ...]  # diagonals of the X_i
    Z: tuple[tuple[int, int], ...]  # Z_i = E_{ab}, 0-based
    tables: _kernels.CompoundTables = field(compare=False, repr=False)

    @property
    def dim(self) -> int:
        return self.n + 1

    @property
    def x_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.X])

    def frobenius_norms(self) -> list[float]:
        return [math.sqrt(sum(float(v) ** 2 for v in row)) for row in self.X]

    def upper_ratio_bound(self) -> float:
        """Proven cap on d_spd / d_product: max_i ||X_i||_F."""
        return max(self.frobenius_norms())

    def z_matrix(self, i: int) -> np.ndarray:
        m = np.zeros((self.dim, self.dim))
        a, b = self.Z[i]
        m[a, b] = 1.0
        return m

    def group_element(self, p: ProductPoint) -> np.ndarray:
        t, s = p.ts()
        g = np.diag(np.exp(t @ self.x_float))
        u = np.eye(self.dim)
        for i, (a, b) in enumerate(self.Z):
            u[a, b] += s[i]
        return g @ u


def _solve_exact(a, rhs):
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(r)] for row, r in zip(a, rhs)]
    for c in range(n):
        piv = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        pv = m[c][c]
        m[c] = [x / pv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return tuple(m[r][n] for r in range(n))


def build_an_embedding(n: int) -> ANEmbedding:
    if not 1 <= n <= 6:
        raise ValueError(f"n must be in 1..6, got {n}")
    R = enumerate_positive_roots(CartanType.of("A", n))
    roots = tuple(select_strongly_commuting_roots(R))
    dim = n + 1
    pairs = []
    for r in roots:
        a = next(k for k, v in enumerate(r.ambient) if v == 1)
        b = next(k for k, v in enumerate(r.ambient) if v == -1)
        pairs.append((a, b))
    # alpha_j(X_i) = 2 delta_ij, trace X_i = 0: n + 1 equations in n + 1 unknowns
    system = [list(r.ambient) for r in roots] + [[1] * dim]
    xs = tuple(_solve_exact(system, [2 * (j == i) for j in range(n)] + [0]) for i in range(n))

    for i, x in enumerate(xs):
        if sum(x) != 0:
            raise PostconditionViolated("X_i not traceless")
        for j, (a, b) in enumerate(pairs):
            if x[a] - x[b] != 2 * (i == j):
                raise PostconditionViolated("alpha_j(X_i) != 2 delta_ij")
    # exp(X_i) commutes with I + Z_j iff the diagonal agrees at a_j, b_j, i.e. alpha_j(X_i) = 0;
    # the Z's commute pairwise because no pairwise sum of the roots is a root
    for i, (a, b) in enumerate(pairs):
        for j, (c, d) in enumerate(pairs):
            if i != j and (b == c or d == a):
                raise PostconditionViolated("Z_i and Z_j do not commute")
    return ANEmbedding(n, roots, xs, tuple(pairs), _kernels.CompoundTables(dim, pairs))


@dataclass(frozen=True)
class SPDPoint:
    P: np.ndarray
    # (embedding, ProductPoint) when the point came from embed(); enables the stable distance
    source: tuple | None = field(default=None, compare=False, repr=False)

    def check(self) -> None:
        P = self.P
        scale = max(1.0, float(np.max(np.abs(P))))
        if not np.allclose(P, P.T, rtol=0.0, atol=1e-12 * scale):
            raise NotSPD("matrix is not symmetric")
        try:
            np.linalg.cholesky(P)
        except np.linalg.LinAlgError as exc:
            raise NotSPD("matrix is not positive definite") from exc
        sign, logdet = np.linalg.slogdet(P)
        if sign <= 0 or abs(math.expm1(logdet)) > 1e-9:
            raise NotSPD(f"det = {sign * math.exp(logdet)} is not 1")


def embed(E: ANEmbedding, p: ProductPoint) -> SPDPoint:
    g = E.group_element(p)
    return SPDPoint(g @ g.T, (E, p))


def an_distance(E: ANEmbedding, p: ProductPoint, q: ProductPoint) -> float:
    """d(embed p, embed q), computed as the distance from I to embed(p^-1 q)."""
    h = p.inverse() * q
    t, s = h.ts()
    return float(_kernels.an_distance_batch((t @ E.x_float)[None, :], s[None, :], E.tables)[0])


def spd_distance(P: SPDPoint, Q: SPDPoint) -> float:
    if P.source is not None and Q.source is not None and P.source[0] is Q.source[0]:
        return an_distance(P.source[0], P.source[1], Q.source[1])
    P.check()
    Q.check()
    return _kernels.spd_distance_raw(P.P, Q.P)


def _hyp_dist_arrays(ta, sa, tb, sb):
    u = tb - ta
    dx = sb * np.exp(u) - sa * np.exp(-u)
    dy = 2.0 * np.sinh(u)
    return 2.0 * np.arcsinh(0.5 * np.hypot(dx, dy))


def hyperbolic_distance(a: HyperbolicPoint, b: HyperbolicPoint) -> float:
    """Curvature -1 distance, in the cancellation-free form 2 asinh(|z_a - z_b| / (2 sqrt(y_a y_b)))."""
    return float(_hyp_dist_arrays(a.t, a.s, b.t, b.s))


def product_distance(p: ProductPoint, q: ProductPoint) -> float:
    return sum(hyperbolic_distance(a, b) for a, b in zip(p.factors, q.factors))


# --------------------------------------------------------------------------
# quasi-isometry certification


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    N: int = 10_000
    d_min: float = 1.0
    d_max: float = 64.0
    threads: int = 1
    c_floor_from: float = 10.0
    # optional asserted thresholds (None = report only)
    max_ratio_cap: float | None = None
    min_ratio_floor: float | None = None


def dyadic_bins(d_min: float, d_max: float) -> list[tuple[float, float]]:
    if not 0 < d_min < d_max:
        raise ValueError("need 0 < d_min < d_max")
    edges = [d_min]
    while edges[-1] * 2 < d_max * (1 - 1e-12):
        edges.append(edges[-1] * 2)
    edges.append(d_max)
    return list(zip(edges[:-1], edges[1:]))


def _point_at_distance(d, phi):
    """(t, s) of the point at hyperbolic distance d from i in direction phi."""
    # y = 1 / (cosh d - sinh d cos phi), x = sinh d sin phi * y, without cancellation
    denom = np.exp(-d) + 2.0 * np.sinh(d) * np.sin(0.5 * phi) ** 2
    return -0.5 * np.log(denom), np.sinh(d) * np.sin(phi)


def _sample_bin(E: ANEmbedding, lo, hi, count, seed_seq, max_rounds=50):
    rng = np.random.default_rng(seed_seq)
    n = E.n
    pt = np.empty((0, n))
    ps = np.empty((0, n))
    qt = np.empty((0, n))
    qs = np.empty((0, n))
    dprod = np.empty(0)
    for _ in range(max_rounds):
        need = count - len(dprod)
        if need <= 0:
            break
        m = 2 * need + 8
        target = rng.uniform(lo, hi, m)
        w = rng.dirichlet(np.ones(n), m)
        phi = rng.uniform(0.0, 2.0 * np.pi, (m, n))
        ht, hs = _point_at_distance(target[:, None] * w, phi)
        at = rng.uniform(-2.0, 2.0, (m, n))
        as_ = rng.uniform(-2.0, 2.0, (m, n))
        bt = at + ht
        bs = as_ * np.exp(-2.0 * ht) + hs
        d = _hyp_dist_arrays(at, as_, bt, bs).sum(axis=1)
        ok = np.flatnonzero((d >= lo) & (d < hi))[:need]
        pt = np.vstack([pt, at[ok]])
        ps = np.vstack([ps, as_[ok]])
        qt = np.vstack([qt, bt[ok]])
        qs = np.vstack([qs, bs[ok]])
        dprod = np.concatenate([dprod, d[ok]])
    if len(dprod) < count:
        raise EmptyBin(f"could not fill bin [{lo}, {hi}) with {count} pairs")
    # left-invariance: d(p, q) = d(I, p^-1 q)
    ht = qt - pt
    hs = qs - ps * np.exp(-2.0 * ht)
    dspd = _kernels.an_distance_batch(ht @ E.x_float, hs, E.tables)
    return pt, ps, qt, qs, dprod, dspd


def _witness(pt, ps, qt, qs, dprod, dspd, k):
    return {
        "p": [[float(a), float(b)] for a, b in zip(pt[k], ps[k])],
        "q": [[float(a), float(b)] for a, b in zip(qt[k], qs[k])],
        "d_product": float(dprod[k]),
        "d_spd": float(dspd[k]),
        "ratio": float(dspd[k] / dprod[k]),
    }


def certify_qi(E: ANEmbedding, cfg: SamplerConfig, check_name: str = "symmetric.certify_qi") -> VerificationReport:
    if cfg.N < 1:
        raise ValueError("N must be positive")
    t0 = time.perf_counter()
    bins = dyadic_bins(cfg.d_min, cfg.d_max)
    counts = [cfg.N // len(bins) + (k < cfg.N % len(bins)) for k in range(len(bins))]
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(bins))
    jobs = [(E, lo, hi, c, s) for (lo, hi), c, s in zip(bins, counts, seeds)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as ex:
            parts = list(ex.map(lambda j: _sample_bin(*j), jobs))
    else:
        parts = [_sample_bin(*j) for j in jobs]

    bin_rows = []
    cap = E.upper_ratio_bound()
    lam_hat, c_hat = -math.inf, math.inf
    wmax = wmin = None
    all_below_cap = True
    for (lo, hi), part in zip(bins, parts):
        pt, ps, qt, qs, dprod, dspd = part
        if len(dprod) == 0:
            bin_rows.append({"range": [lo, hi], "max_ratio": None, "min_ratio": None, "count": 0})
            continue
        r = dspd / dprod
        kmax, kmin = int(np.argmax(r)), int(np.argmin(r))
        bin_rows.append({"range": [lo, hi], "max_ratio": float(r[kmax]), "min_ratio": float(r[kmin]),
                         "count": int(len(r))})
        all_below_cap &= bool(np.all(r <= cap * (1 + 1e-9)))
        if r[kmax] > lam_hat:
            lam_hat, wmax = float(r[kmax]), {"kind": "max_ratio", **_witness(*part, kmax)}
        far = np.flatnonzero(dprod >= cfg.c_floor_from)
        if len(far):
            k = far[int(np.argmin(r[far]))]
            if r[k] < c_hat:
                c_hat, wmin = float(r[k]), {"kind": "min_ratio", **_witness(*part, k)}

    passed = all_below_cap and c_hat > 0 and math.isfinite(c_hat)
    if cfg.max_ratio_cap is not None:
        passed &= all(b["max_ratio"] is None or b["max_ratio"] <= cfg.max_ratio_cap for b in bin_rows)
    if cfg.min_ratio_floor is not None:
        passed &= c_hat >= cfg.min_ratio_floor
    constants = {
        "lambda_hat": lam_hat,
        "c_hat": c_hat,
        "proven_ratio_cap": cap,
        "bins": bin_rows,
    }
    if cfg.max_ratio_cap is not None:
        constants["max_ratio_threshold"] = cfg.max_ratio_cap
    if cfg.min_ratio_floor is not None:
        constants["min_ratio_threshold"] = cfg.min_ratio_floor
    return VerificationReport(
        check_name,
        {"n": E.n, "seed": cfg.seed, "N": cfg.N, "d_min": cfg.d_min, "d_max": cfg.d_max},
        bool(passed),
        constants,
        [w for w in (wmax, wmin) if w is not None],
        int(1000 * (time.perf_counter() - t0)),
    )


def sample_pairs(E: ANEmbedding, cfg: SamplerConfig):
    """Raw stratified samples (for CSV dumps): rows of (bin, d_product, d_spd, ratio)."""
    rows = []
    bins = dyadic_bins(cfg.d_min, cfg.d_max)
    counts = [cfg.N // len(bins) + (k < cfg.N % len(bins)) for k in range(len(bins))]
    for k, ((lo, hi), c, s) in enumerate(zip(bins, counts, np.random.SeedSequence(cfg.seed).spawn(len(bins)))):
        *_, dprod, dspd = _sample_bin(E, lo, hi, c, s)
        rows.extend((k, float(a), float(b), float(b / a)) for a, b in zip(dprod, dspd))
    return rows


# --------------------------------------------------------------------------
# rank-one quasi-path toward the point at infinity


@dataclass(frozen=True)
class QuasiPath:
    points: tuple[HyperbolicPoint, ...]  # x, x'', y'', y
    length: float
    distance: float
    delta: float  # d(x'', y''), the additive slack


def busemann_infinity(p: HyperbolicPoint) -> float:
    """Busemann function of the vertical end, normalized to vanish at i: -log(Im z)."""
    return -2.0 * p.t


def rank_one_quasi_path(a: HyperbolicPoint, b: HyperbolicPoint) -> QuasiPath:
    """Path x -> x'' -> y'' -> y where x'' and y'' sit a distance d(x', y) up the vertical rays."""
    x, y = (a, b) if busemann_infinity(a) >= busemann_infinity(b) else (b, a)
    d = hyperbolic_distance(x, y)
    xr = x.z.real
    yz = y.z
    # x' on the vertical ray from x, on the horocycle through y
    xp = HyperbolicPoint.from_upper_half_plane(xr, yz.imag)
    lift = hyperbolic_distance(xp, y)
    h = busemann_infinity(x) - busemann_infinity(y)
    xpp = HyperbolicPoint(xp.t + 0.5 * lift, xr / math.exp(2.0 * (xp.t + 0.5 * lift)))
    ypp = HyperbolicPoint(y.t + 0.5 * lift, yz.real / math.exp(2.0 * (y.t + 0.5 * lift)))
    top = hyperbolic_distance(xpp, ypp)
    length = (h + lift) + top + lift
    if length > 3.0 * d + top + 1e-9 * (1.0 + d):
        raise PostconditionViolated(f"quasi-path length {length} exceeds 3d + delta for d = {d}")
    pts = (x, xpp, ypp, y) if x is a else (y, ypp, xpp, x)
    return QuasiPath(pts, length, d, top)


def certify_rank_one_paths(seed: int, N: int = 1000, d_max: float = 30.0,
                           check_name: str = "symmetric.rank_one_path") -> VerificationReport:
    t0 = time.perf_counter()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    # log-uniform distances so both short and long pairs appear
    dist = np.exp(rng.uniform(math.log(0.01), math.log(d_max), N))
    phi = rng.uniform(0.0, 2.0 * np.pi, N)
    ht, hs = _point_at_distance(dist, phi)
    at = rng.uniform(-2.0, 2.0, N)
    as_ = rng.uniform(-2.0, 2.0, N)
    delta_hat, worst, excess = 0.0, None, -math.inf
    ok = True
    paths = []
    for k in range(N):
        a = HyperbolicPoint(float(at[k]), float(as_[k]))
        b = a * HyperbolicPoint(float(ht[k]), float(hs[k]))
        path = rank_one_quasi_path(a, b)
        paths.append(path)
        if path.delta > delta_hat:
            delta_hat, worst = path.delta, k
    for path in paths:
        e = path.length - 3.0 * path.distance
        excess = max(excess, e)
        ok &= e <= delta_hat + 1e-9 * (1.0 + path.distance)
    ok &= delta_hat <= RANK_ONE_DELTA_SUP + 1e-12
    w = paths[worst] if worst is not None else None
    witnesses = [] if w is None else [{
        "points": [[p.t, p.s] for p in w.points], "length": w.length, "d": w.distance, "delta": w.delta,
    }]
    return VerificationReport(
        check_name,
        {"seed": seed, "N": N, "d_max": d_max},
        bool(ok),
        {"delta_hat": delta_hat, "delta_sup_closed_form": RANK_ONE_DELTA_SUP, "max_length_minus_3d": excess},
        witnesses,
        int(1000 * (time.perf_counter() - t0)),
    )


def certify_sl2_exactness(seed: int, N: int = 1000, d_min: float = 0.01, d_max: float = 50.0,
                          check_name: str = "symmetric.sl2_exactness") -> VerificationReport:
    """n = 1: d_spd = sqrt(2) d_H up to 1e-8 (1 + d), on log-uniformly spread pairs."""
    t0 = time.perf_counter()
    E = build_an_embedding(1)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    dist = np.exp(rng.uniform(math.log(d_min), math.log(d_max), N))
    phi = rng.uniform(0.0, 2.0 * np.pi, N)
    ht, hs = _point_at_distance(dist, phi)
    at = rng.uniform(-2.0, 2.0, N)
    as_ = rng.uniform(-2.0, 2.0, N)
    bt = at + ht
    bs = as_ * np.exp(-2.0 * ht) + hs
    dh = _hyp_dist_arrays(at, as_, bt, bs)
    st = bt - at
    ss = bs - as_ * np.exp(-2.0 * st)
    dspd = _kernels.an_distance_batch((st[:, None] @ E.x_float), ss[:, None], E.tables)
    err = np.abs(dspd - math.sqrt(2.0) * dh) / (1.0 + dh)
    k = int(np.argmax(err))
    return VerificationReport(
        check_name,
        {"seed": seed, "N": N, "d_min": d_min, "d_max": d_max},
        bool(err[k] <= 1e-8),
        {"max_scaled_error": float(err[k]), "d_range": [float(dh.min()), float(dh.max())], "tolerance": 1e-8},
        [{"p": [float(at[k]), float(as_[k])], "q": [float(bt[k]), float(bs[k])], "d_h": float(dh[k]),
          "d_spd": float(dspd[k])}],
        int(1000 * (time.perf_counter() - t0)),
    )
