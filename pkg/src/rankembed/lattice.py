"""Z_p-lattices in Q_p^d, up to homothety, with exact rational arithmetic.

Only lattices spanned by rational vectors are handled; every computation
takes place in Z_(p) = {x in Q : v_p(x) >= 0}, which is enough for exact
canonical forms.  A class is stored as an upper-triangular basis with
diagonal p^{a_i} and entries above the diagonal reduced to integers in
[0, p^{a_i}), scaled so that the lattice lies in Z_p^d but not in p Z_p^d.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import SingularBasis

Matrix = tuple[tuple[Fraction, ...], ...]


def valuation(x, p: int) -> float | int:
    x = Fraction(x)
    if x == 0:
        return float("inf")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def residue(x: Fraction, p: int, a: int) -> int:
    """Integer representative in [0, p^a) of x in Z_(p) modulo p^a."""
    if a <= 0:
        return 0
    mod = p**a
    return (x.numerator * pow(x.denominator, -1, mod)) % mod


def det(m) -> Fraction:
    m = [list(map(Fraction, r)) for r in m]
    n = len(m)
    out = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            out = -out
        out *= m[c][c]
        for r in range(c + 1, n):
            if m[r][c] != 0:
                f = m[r][c] / m[c][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return out


def _triangularize(cols, p: int, dim: int):
    """Column echelon form over Z_(p): column r is zero below row r, diag = p^{a_r}."""
    rem = [list(map(Fraction, c)) for c in cols]
    out: list[list[Fraction] | None] = [None] * dim
    for r in reversed(range(dim)):
        live = [i for i, c in enumerate(rem) if c[r] != 0]
        if not live:
            raise SingularBasis("generators do not span a full-rank lattice")
        idx = min(live, key=lambda i: valuation(rem[i][r], p))
        piv = rem.pop(idx)
        unit = Fraction(p) ** valuation(piv[r], p) / piv[r]
        piv = [x * unit for x in piv]
        new = []
        for c in rem:
            if c[r] != 0:
                f = c[r] / piv[r]
                c = [x - f * y for x, y in zip(c, piv)]
            new.append(c)
        rem = new
        out[r] = piv
    return out


@dataclass(frozen=True)
class LatticeClass:
    p: int
    exps: tuple[int, ...]  # diagonal exponents a_i
    upper: tuple[int, ...]  # entries above the diagonal, row-major

    @property
    def dim(self) -> int:
        return len(self.exps)

    @property
    def type(self) -> int:
        return sum(self.exps) % self.dim

    def basis(self) -> Matrix:
        """Columns span the lattice; returned as rows of a d x d matrix."""
        d = self.dim
        m = [[Fraction(0)] * d for _ in range(d)]
        it = iter(self.upper)
        for i in range(d):
            m[i][i] = Fraction(self.p) ** self.exps[i]
            for j in range(i + 1, d):
                m[i][j] = Fraction(next(it))
        return tuple(tuple(r) for r in m)

    def columns(self) -> list[list[Fraction]]:
        b = self.basis()
        return [[b[i][j] for i in range(self.dim)] for j in range(self.dim)]

    def to_strings(self) -> list[list[str]]:
        return [[f"{x.numerator}/{x.denominator}" for x in row] for row in self.basis()]


def canonicalize_columns(cols, p: int = 2, dim: int | None = None) -> LatticeClass:
    cols = [list(map(Fraction, c)) for c in cols]
    dim = dim or len(cols[0])
    tri = _triangularize(cols, p, dim)
    m = min(valuation(x, p) for c in tri for x in c if x != 0)
    scale = Fraction(p) ** (-m)
    tri = [[x * scale for x in c] for c in tri]
    exps = [valuation(tri[i][i], p) for i in range(dim)]
    for i in reversed(range(dim - 1)):
        pa = Fraction(p) ** exps[i]
        for j in range(i + 1, dim):
            x = tri[j][i]
            q = (x - residue(x, p, exps[i])) / pa
            if q:
                tri[j] = [a - q * b for a, b in zip(tri[j], tri[i])]
    upper = tuple(int(tri[j][i]) for i in range(dim) for j in range(i + 1, dim))
    return LatticeClass(p, tuple(int(e) for e in exps), upper)


def canonicalize(basis, p: int = 2) -> LatticeClass:
    """Class of the lattice spanned by the columns of a square rational matrix."""
    b = [list(map(Fraction, r)) for r in basis]
    d = len(b)
    if det(b) == 0:
        raise SingularBasis("basis matrix is singular")
    return canonicalize_columns([[b[i][j] for i in range(d)] for j in range(d)], p, d)


@lru_cache(maxsize=None)
def subspaces(p: int, d: int = 3) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """Proper nonzero subspaces of F_p^d, each as a tuple of spanning vectors (d = 3)."""
    vecs = [v for v in itertools.product(range(p), repeat=d) if any(v)]
    normed = [v for v in vecs if v[next(i for i, x in enumerate(v) if x)] == 1]
    out = [(v,) for v in normed]
    for f in normed:
        i0 = next(i for i, x in enumerate(f) if x)
        inv = pow(f[i0], -1, p)
        basis = []
        for j in range(d):
            if j == i0:
                continue
            v = [0] * d
            v[j] = 1
            v[i0] = (-f[j] * inv) % p
            basis.append(tuple(v))
        out.append(tuple(basis))
    return tuple(out)


def neighbors(L: LatticeClass) -> list[LatticeClass]:
    """Classes of M with pL < M < L, M / pL a proper nonzero subspace of L / pL."""
    p, d = L.p, L.dim
    cols = L.columns()
    pl = [[p * x for x in c] for c in cols]
    out = []
    for sub in subspaces(p, d):
        gens = [[sum(s[j] * cols[j][i] for j in range(d)) for i in range(d)] for s in sub]
        out.append(canonicalize_columns(gens + pl, p, d))
    return out


def _minors_valuations(t, p):
    d = len(t)
    vals = []
    for k in range(1, d + 1):
        best = float("inf")
        for rows in itertools.combinations(range(d), k):
            for cs in itertools.combinations(range(d), k):
                best = min(best, valuation(det([[t[r][c] for c in cs] for r in rows]), p))
        vals.append(best)
    return vals


def _inverse(m):
    d = len(m)
    a = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(d)] for i, r in enumerate(m)]
    for c in range(d):
        piv = next(r for r in range(c, d) if a[r][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        pv = a[c][c]
        a[c] = [x / pv for x in a[c]]
        for r in range(d):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [r[d:] for r in a]


def elementary_divisors(L: LatticeClass, M: LatticeClass) -> tuple[int, ...]:
    """Exponents e_1 <= ... <= e_d of M relative to L (from gcd valuations of minors)."""
    t = _matmul(_inverse(L.basis()), M.basis())
    v = _minors_valuations(t, L.p)
    return tuple(int(v[0] if k == 0 else v[k] - v[k - 1]) for k in range(len(v)))


def _matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def graph_distance(L: LatticeClass, M: LatticeClass) -> int:
    """Distance in the 1-skeleton: largest minus smallest elementary divisor exponent."""
    e = elementary_divisors(L, M)
    return e[-1] - e[0]


def intersect_coordinates(L: LatticeClass, coords) -> list[list[Fraction]]:
    """Basis (in the listed coordinates) of L intersected with span(e_c : c in coords)."""
    d = L.dim
    order = list(coords) + [c for c in range(d) if c not in coords]
    cols = [[col[i] for i in order] for col in L.columns()]
    tri = _triangularize(cols, L.p, d)
    k = len(coords)
    return [tri[j][:k] for j in range(k)]


def _det_columns(cols) -> Fraction:
    k = len(cols)
    return det([[cols[j][i] for j in range(k)] for i in range(k)])


def splits_along(L: LatticeClass, blocks) -> bool:
    """True iff L is the direct sum of its intersections with the coordinate blocks."""
    p = L.p
    total = valuation(det(L.basis()), p)
    parts = sum(valuation(_det_columns(intersect_coordinates(L, b)), p) for b in blocks)
    return total == parts


def quotient_class(L: LatticeClass, drop: int) -> LatticeClass:
    """Class of the image of L in Q_p^d / span(e_drop), in the remaining coordinates."""
    keep = [i for i in range(L.dim) if i != drop]
    gens = [[c[i] for i in keep] for c in L.columns()]
    return canonicalize_columns(gens, L.p, len(keep))


def sublattice_class(cols, p: int) -> LatticeClass:
    return canonicalize_columns(cols, p, len(cols[0]))
