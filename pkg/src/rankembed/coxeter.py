"""Spherical Coxeter complexes: Weyl groups, walls, vertices and maximally
distributed vertex configurations.

Everything is exact.  Vertex directions are stored as primitive integer
vectors in the ambient space of the root system, so two vertices are equal
exactly when their stored directions are equal.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce

import numpy as np

from .errors import DegenerateBarycenter, NotFound, RankTooLarge, WrongCardinality
from .roots import Root, RootSystem, dot, rational_rank

MAX_ENUM_RANK = 6
MAX_SEARCH_RANK = 4


def primitive(v) -> tuple[int, ...]:
    """Positive rescaling of a nonzero rational vector to a primitive integer vector."""
    fr = [Fraction(x) for x in v]
    den = reduce(lambda a, b: a * b // math.gcd(a, b), (x.denominator for x in fr), 1)
    ints = [int(x * den) for x in fr]
    g = reduce(math.gcd, (abs(i) for i in ints), 0)
    if g == 0:
        raise ValueError("zero vector has no direction")
    return tuple(i // g for i in ints)


def reflect(v, a, aa=None):
    aa = dot(a, a) if aa is None else aa
    c = 2 * dot(v, a) / aa
    return tuple(x - c * y for x, y in zip(v, a))


def weyl_group_order(R: RootSystem) -> int:
    order = 1
    for fam, n in R.cartan_type.components:
        order *= {
            "A": math.factorial(n + 1),
            "B": 2**n * math.factorial(n),
            "C": 2**n * math.factorial(n),
            "D": 2 ** (n - 1) * math.factorial(n),
            "E": {6: 51840, 7: 2903040, 8: 696729600}.get(n, 0),
            "F": 1152,
            "G": 12,
        }[fam]
    return order


@dataclass(frozen=True)
class WeylGroup:
    """Finite Weyl group, enumerated as permutations of the full root list.

    ``elements[k]`` maps the index of each root of ``R.all_roots`` to the index
    of its image; ``words[k]`` is a word in the simple reflections giving it.
    """

    root_system: RootSystem
    generators: tuple[tuple[tuple[Fraction, ...], ...], ...]
    elements: np.ndarray
    words: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def matrix(self, k: int):
        """Exact ambient matrix of element ``k`` (product of generators along its word)."""
        dim = self.root_system.ambient_dim
        m = [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]
        for g in self.words[k]:
            gen = self.generators[g]
            m = [[sum(gen[i][l] * m[l][j] for l in range(dim)) for j in range(dim)] for i in range(dim)]
        return tuple(tuple(r) for r in m)

    @cached_property
    def matrices(self):
        return [self.matrix(k) for k in range(self.order)]


def generate_weyl_group(R: RootSystem) -> WeylGroup:
    if R.rank > MAX_ENUM_RANK:
        raise RankTooLarge(f"rank {R.rank} exceeds enumeration limit {MAX_ENUM_RANK}")
    roots = R.all_roots
    index = {r.simple_coords: i for i, r in enumerate(roots)}
    dim = R.ambient_dim
    gens = []
    perms = []
    for a in R.simple_roots:
        aa = dot(a.ambient, a.ambient)
        mat = tuple(
            tuple(Fraction(int(i == j)) - 2 * a.ambient[i] * a.ambient[j] / aa for j in range(dim))
            for i in range(dim)
        )
        gens.append(mat)
        perm = []
        for r in roots:
            img = reflect(r.ambient, a.ambient, aa)
            perm.append(index[_coords_from_ambient(R, img)])
        perms.append(np.array(perm, dtype=np.int16))

    ident = np.arange(len(roots), dtype=np.int16)
    seen = {ident.tobytes(): 0}
    elements = [ident]
    words: list[tuple[int, ...]] = [()]
    frontier = [0]
    while frontier:
        nxt = []
        for k in frontier:
            w = elements[k]
            for g, p in enumerate(perms):
                img = p[w]
                key = img.tobytes()
                if key not in seen:
                    seen[key] = len(elements)
                    elements.append(img)
                    words.append((g,) + words[k])
                    nxt.append(len(elements) - 1)
        frontier = nxt
    return WeylGroup(R, tuple(gens), np.array(elements), tuple(words))


def _coords_from_ambient(R: RootSystem, v) -> tuple[int, ...]:
    # (v, a_k) against the Gram matrix of simple roots; solved once per system
    inv = _gram_inverse(R)
    pair = [dot(v, a.ambient) for a in R.simple_roots]
    coords = tuple(sum(inv[i][j] * pair[j] for j in range(R.rank)) for i in range(R.rank))
    assert all(c.denominator == 1 for c in coords)
    return tuple(int(c) for c in coords)


_GRAM_INV_CACHE: dict = {}


def _gram_inverse(R: RootSystem):
    key = R.cartan_type
    if key not in _GRAM_INV_CACHE:
        n = R.rank
        g = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(R.gram)]
        for c in range(n):
            piv = next(r for r in range(c, n) if g[r][c] != 0)
            g[c], g[piv] = g[piv], g[c]
            pv = g[c][c]
            g[c] = [x / pv for x in g[c]]
            for r in range(n):
                if r != c and g[r][c] != 0:
                    f = g[r][c]
                    g[r] = [x - f * y for x, y in zip(g[r], g[c])]
        _GRAM_INV_CACHE[key] = tuple(tuple(row[n:]) for row in g)
    return _GRAM_INV_CACHE[key]


@dataclass(frozen=True)
class Wall:
    normal: Root

    def contains(self, v) -> bool:
        return dot(self.normal.ambient, v) == 0


@dataclass(frozen=True, order=True)
class SphericalVertex:
    type_index: int
    direction: tuple[int, ...]

    @property
    def antipode_direction(self) -> tuple[int, ...]:
        return tuple(-x for x in self.direction)

    def unit(self) -> np.ndarray:
        v = np.array(self.direction, dtype=float)
        return v / np.linalg.norm(v)


def fundamental_coweights(R: RootSystem) -> list[tuple[Fraction, ...]]:
    """Extreme rays of the closed fundamental chamber, dual to the simple roots."""
    inv = _gram_inverse(R)
    out = []
    for k in range(R.rank):
        out.append(tuple(
            sum((inv[k][j] * R.simple_roots[j].ambient[d] for j in range(R.rank)), Fraction(0))
            for d in range(R.ambient_dim)
        ))
    return out


def _vertex_key(v: SphericalVertex):
    return (v.type_index, tuple(-c for c in v.direction))


def vertex_set(R: RootSystem, W: WeylGroup | None = None) -> list[SphericalVertex]:
    """All vertices of the Coxeter complex in canonical order (type, then descending coordinates)."""
    simple = [a.ambient for a in R.simple_roots]
    norms = [dot(a, a) for a in simple]
    out = set()
    for t, w in enumerate(fundamental_coweights(R)):
        start = primitive(w)
        orbit = {start}
        frontier = [start]
        while frontier:
            nxt = []
            for v in frontier:
                for a, aa in zip(simple, norms):
                    img = primitive(reflect(v, a, aa))
                    if img not in orbit:
                        orbit.add(img)
                        nxt.append(img)
            frontier = nxt
        out.update(SphericalVertex(t, d) for d in orbit)
    return sorted(out, key=_vertex_key)


def walls_containing(vs, R: RootSystem) -> list[Wall]:
    return [Wall(a) for a in R.positive_roots if all(dot(a.ambient, v.direction) == 0 for v in vs)]


def spanned_wall(vs, R: RootSystem) -> Wall | None:
    ws = walls_containing(vs, R)
    return ws[0] if len(ws) == 1 else None


def spans_wall(vs, R: RootSystem, W: WeylGroup | None = None) -> bool:
    """True iff exactly one wall hyperplane contains every vertex of ``vs``."""
    vs = list(vs)
    if not vs:
        raise ValueError("spans_wall needs a nonempty vertex set")
    return spanned_wall(vs, R) is not None


def _antipodal(u: SphericalVertex, v: SphericalVertex) -> bool:
    return u.direction == v.antipode_direction


def is_maximally_distributed(vs, R: RootSystem, W: WeylGroup | None = None) -> bool:
    vs = list(vs)
    n = R.rank
    if len(vs) != n or n < 2:
        raise WrongCardinality(f"need exactly rank={n} >= 2 vertices, got {len(vs)}")
    # (i)
    if any(_antipodal(u, v) for u, v in itertools.combinations(vs, 2)):
        return False
    if walls_containing(vs, R):
        return False
    # (ii)
    for i in range(n):
        if not spans_wall(vs[:i] + vs[i + 1:], R):
            return False
    # (iii)
    for a in R.positive_roots:
        vals = [dot(a.ambient, v.direction) for v in vs]
        if all(x >= 0 for x in vals) or all(x <= 0 for x in vals):
            if sum(1 for x in vals if x != 0) > 1:
                return False
    return True


@dataclass(frozen=True)
class MaxDistConfig:
    root_system: RootSystem
    vertices: tuple[SphericalVertex, ...]
    walls: tuple[Wall, ...]
    etas: tuple[tuple[float, ...], ...]
    # each chamber of Hull(vertices) as the sorted tuple of its vertex directions
    delta: tuple[tuple[tuple[int, ...], ...], ...]

    @property
    def rank(self) -> int:
        return len(self.vertices)

    def to_dict(self) -> dict:
        def fr(x):
            return f"{x.numerator}/{x.denominator}"
        return {
            "type": self.root_system.cartan_type.name,
            "vertices": [{"type": v.type_index, "direction": [f"{c}/1" for c in v.direction]} for v in self.vertices],
            "walls": [{"normal": [fr(x) for x in w.normal.ambient], "simple_coords": list(w.normal.simple_coords)}
                      for w in self.walls],
            "etas": [list(e) for e in self.etas],
            "theta": theta_angles(self),
            "delta_chambers": [[list(r) for r in ch] for ch in self.delta],
        }


def walls_meet_trivially(walls) -> bool:
    """The n wall spheres have empty common intersection iff their normals are independent."""
    return rational_rank([w.normal.simple_coords for w in walls]) == len(walls)


def pairwise_wall_intersections_ok(config: MaxDistConfig) -> bool:
    """For every j the walls other than s_j meet exactly in {xi_j, -xi_j}."""
    n = config.rank
    for j in range(n):
        others = [config.walls[k] for k in range(n) if k != j]
        if rational_rank([w.normal.simple_coords for w in others]) != n - 1:
            return False
        if not all(w.contains(config.vertices[j].direction) for w in others):
            return False
    return True


def _chambers(R: RootSystem):
    simple = [a.ambient for a in R.simple_roots]
    norms = [dot(a, a) for a in simple]
    start = tuple(sorted(primitive(w) for w in fundamental_coweights(R)))
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for ch in frontier:
            for a, aa in zip(simple, norms):
                img = tuple(sorted(primitive(reflect(v, a, aa)) for v in ch))
                if img not in seen:
                    seen.add(img)
                    nxt.append(img)
        frontier = nxt
    return sorted(seen)


def _cone_coefficients(gens, v):
    """Solve v = sum c_i gens_i for independent gens spanning v's space (exact)."""
    n = len(gens)
    gram = [[Fraction(dot(a, b)) for b in gens] + [Fraction(dot(a, v))] for a in gens]
    for c in range(n):
        piv = next(r for r in range(c, n) if gram[r][c] != 0)
        gram[c], gram[piv] = gram[piv], gram[c]
        pv = gram[c][c]
        gram[c] = [x / pv for x in gram[c]]
        for r in range(n):
            if r != c and gram[r][c] != 0:
                f = gram[r][c]
                gram[r] = [x - f * y for x, y in zip(gram[r], gram[c])]
    return [gram[i][n] for i in range(n)]


def hull_chambers(vs, R: RootSystem):
    gens = [v.direction for v in vs]
    return tuple(
        ch for ch in _chambers(R)
        if all(min(_cone_coefficients(gens, ray)) >= 0 for ray in ch)
    )


def _is_interior(eta, R: RootSystem, others) -> bool:
    for a in R.positive_roots:
        on_wall = abs(float(np.dot(np.array(a.ambient, dtype=float), eta))) < 1e-12
        fixes_all = all(dot(a.ambient, v.direction) == 0 for v in others)
        if on_wall != fixes_all:
            return False
    return True


def eta_point(config: MaxDistConfig, i: int, max_tries: int = 64) -> tuple[float, ...]:
    """Normalized barycenter of the unit vectors xi_j, j != i.

    When the hull of the other vertices has several top cells the plain
    barycenter can sit on a cell boundary; then deterministic unequal weights
    1 + j/(m+2) are tried, m = 1, 2, ...  The returned point is fixed only by
    reflections fixing every xi_j, j != i.
    """
    R = config.root_system
    others = [v for k, v in enumerate(config.vertices) if k != i]
    units = [v.unit() for v in others]
    for m in range(max_tries):
        weights = [1.0] * len(units) if m == 0 else [1.0 + j / (m + 2) for j in range(len(units))]
        total = sum(w * u for w, u in zip(weights, units))
        norm = float(np.linalg.norm(total))
        if norm < 1e-12:
            raise DegenerateBarycenter(f"barycenter of vertices other than {i} vanishes")
        eta = total / norm
        if _is_interior(eta, R, others):
            return tuple(float(x) for x in eta)
    raise DegenerateBarycenter(f"no interior point found for the hull opposite vertex {i}")


def theta_sin_squared(config: MaxDistConfig) -> list[Fraction]:
    """Exact sin^2 of the spherical distance from xi_i to the wall s_i."""
    out = []
    for v, w in zip(config.vertices, config.walls):
        a = w.normal.ambient
        out.append(dot(a, v.direction) ** 2 / (dot(a, a) * dot(v.direction, v.direction)))
    return out


def theta_angles(config: MaxDistConfig) -> list[float]:
    return [math.asin(math.sqrt(s)) for s in theta_sin_squared(config)]


def build_config(vs, R: RootSystem) -> MaxDistConfig:
    vs = tuple(vs)
    walls = tuple(spanned_wall(vs[:i] + vs[i + 1:], R) for i in range(len(vs)))
    proto = MaxDistConfig(R, vs, walls, (), ())
    etas = tuple(eta_point(proto, i) for i in range(len(vs)))
    return MaxDistConfig(R, vs, walls, etas, hull_chambers(vs, R))


def find_maximally_distributed(R: RootSystem, W: WeylGroup | None = None) -> MaxDistConfig:
    """First maximally distributed tuple in canonical vertex order (exhaustive search)."""
    if R.rank > MAX_SEARCH_RANK:
        raise RankTooLarge(f"exhaustive search limited to rank {MAX_SEARCH_RANK}")
    verts = vertex_set(R, W)
    for combo in itertools.combinations(verts, R.rank):
        if is_maximally_distributed(list(combo), R):
            config = build_config(combo, R)
            if not walls_meet_trivially(config.walls):
                raise NotFound("walls of a maximally distributed tuple meet; search is inconsistent")
            return config
    raise NotFound(f"no maximally distributed vertices for {R.cartan_type}")


def apply_matrix(m, v: SphericalVertex) -> SphericalVertex:
    img = [sum(Fraction(m[i][j]) * v.direction[j] for j in range(len(v.direction))) for i in range(len(m))]
    return SphericalVertex(v.type_index, primitive(img))
