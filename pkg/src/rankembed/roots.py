"""Finite crystallographic root systems with exact rational coordinates.

Roots are realized in the usual ambient Euclidean spaces (``e_i - e_j`` for
type A and so on) and carried together with their integer coordinates on the
simple roots.  Reducible systems are orthogonal direct sums of irreducible
factors, each factor living in its own block of ambient coordinates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .errors import IllegalType, PostconditionViolated, RootNotInSystem

Vector = tuple[Fraction, ...]

_LEGAL = {
    "A": lambda r: r >= 1,
    "B": lambda r: r >= 2,
    "C": lambda r: r >= 2,
    "D": lambda r: r >= 3,
    "E": lambda r: r in (6, 7, 8),
    "F": lambda r: r == 4,
    "G": lambda r: r == 2,
}
MAX_CLASSICAL_RANK = 12


@dataclass(frozen=True)
class CartanType:
    """A Cartan type, possibly reducible, e.g. ``A3`` or ``A1xA1``."""

    components: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if not self.components:
            raise IllegalType("empty Cartan type")
        for fam, rank in self.components:
            if fam not in _LEGAL:
                raise IllegalType(f"unknown family {fam!r}")
            if not isinstance(rank, int) or not _LEGAL[fam](rank) or rank > MAX_CLASSICAL_RANK:
                raise IllegalType(f"illegal rank {rank} for family {fam}")

    @classmethod
    def of(cls, family: str, rank: int) -> "CartanType":
        return cls(((family.upper(), int(rank)),))

    @classmethod
    def parse(cls, text: str) -> "CartanType":
        parts = re.split(r"[x×*]", text.strip())
        comps = []
        for part in parts:
            m = re.fullmatch(r"\s*([A-Ga-g])_?(\d+)\s*", part)
            if not m:
                raise IllegalType(f"cannot parse Cartan type {text!r}")
            comps.append((m.group(1).upper(), int(m.group(2))))
        return cls(tuple(comps))

    @property
    def rank(self) -> int:
        return sum(r for _, r in self.components)

    @property
    def is_irreducible(self) -> bool:
        return len(self.components) == 1

    @property
    def family(self) -> str:
        return "x".join(f for f, _ in self.components)

    @property
    def name(self) -> str:
        return "x".join(f"{f}{r}" for f, r in self.components)

    def __str__(self) -> str:
        return self.name


def _e(dim: int, *pairs) -> Vector:
    v = [Fraction(0)] * dim
    for idx, coef in pairs:
        v[idx] += Fraction(coef)
    return tuple(v)


def _irreducible_simple_roots(family: str, n: int) -> list[Vector]:
    if family == "A":
        return [_e(n + 1, (i, 1), (i + 1, -1)) for i in range(n)]
    if family in "BCD":
        simple = [_e(n, (i, 1), (i + 1, -1)) for i in range(n - 1)]
        if family == "B":
            simple.append(_e(n, (n - 1, 1)))
        elif family == "C":
            simple.append(_e(n, (n - 1, 2)))
        else:
            simple.append(_e(n, (n - 2, 1), (n - 1, 1)))
        return simple
    if family == "G":
        # short root first
        return [_e(3, (0, 1), (1, -1)), _e(3, (0, -2), (1, 1), (2, 1))]
    if family == "F":
        h = Fraction(1, 2)
        return [
            _e(4, (1, 1), (2, -1)),
            _e(4, (2, 1), (3, -1)),
            _e(4, (3, 1)),
            _e(4, (0, h), (1, -h), (2, -h), (3, -h)),
        ]
    if family == "E":
        h = Fraction(1, 2)
        e8 = [
            _e(8, (0, h), (7, h), *[(k, -h) for k in range(1, 7)]),
            _e(8, (0, 1), (1, 1)),
            _e(8, (1, 1), (0, -1)),
            _e(8, (2, 1), (1, -1)),
            _e(8, (3, 1), (2, -1)),
            _e(8, (4, 1), (3, -1)),
            _e(8, (5, 1), (4, -1)),
            _e(8, (6, 1), (5, -1)),
        ]
        return e8[:n]
    raise IllegalType(family)


def dot(u, v) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def rational_rank(vectors) -> int:
    """Rank over Q of a list of rational (or integer) vectors."""
    rows = [[Fraction(x) for x in v] for v in vectors]
    if not rows:
        return 0
    rank, ncols = 0, len(rows[0])
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pv = rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / pv[col]
                rows[r] = [a - f * b for a, b in zip(rows[r], pv)]
        rank += 1
    return rank


@dataclass(frozen=True)
class Root:
    ambient: Vector
    simple_coords: tuple[int, ...]

    @property
    def height(self) -> int:
        return sum(self.simple_coords)

    def sort_key(self):
        return (self.height, self.simple_coords)

    def __neg__(self) -> "Root":
        return Root(tuple(-a for a in self.ambient), tuple(-c for c in self.simple_coords))


@dataclass(frozen=True)
class RootSystem:
    cartan_type: CartanType
    simple_roots: tuple[Root, ...]
    positive_roots: tuple[Root, ...]
    # simple-root index ranges of the irreducible factors
    factor_slices: tuple[tuple[int, int], ...] = field(default=())

    @property
    def rank(self) -> int:
        return len(self.simple_roots)

    @property
    def ambient_dim(self) -> int:
        return len(self.simple_roots[0].ambient)

    @cached_property
    def _coords_index(self) -> dict:
        return {r.simple_coords: r for r in self.positive_roots}

    @cached_property
    def all_coords(self) -> frozenset:
        pos = set(self._coords_index)
        return frozenset(pos | {tuple(-c for c in k) for k in pos})

    @cached_property
    def all_roots(self) -> tuple[Root, ...]:
        return self.positive_roots + tuple(-r for r in self.positive_roots)

    def is_root(self, coords) -> bool:
        return tuple(coords) in self.all_coords

    def contains(self, root: Root) -> bool:
        return self._coords_index.get(root.simple_coords) == root

    def root(self, coords) -> Root:
        """Look up a positive root by simple coordinates."""
        try:
            return self._coords_index[tuple(coords)]
        except KeyError:
            raise RootNotInSystem(f"{tuple(coords)} is not a positive root of {self.cartan_type}")

    def ambient_of(self, coords) -> Vector:
        dim = self.ambient_dim
        out = [Fraction(0)] * dim
        for c, a in zip(coords, self.simple_roots):
            if c:
                for k in range(dim):
                    out[k] += c * a.ambient[k]
        return tuple(out)

    def factor_roots(self, k: int) -> list[Root]:
        lo, hi = self.factor_slices[k]
        return [
            r for r in self.positive_roots
            if all(c == 0 for i, c in enumerate(r.simple_coords) if not lo <= i < hi)
        ]

    @cached_property
    def gram(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(tuple(dot(a.ambient, b.ambient) for b in self.simple_roots) for a in self.simple_roots)


def expected_positive_root_count(t: CartanType) -> int:
    total = 0
    for fam, n in t.components:
        total += {
            "A": n * (n + 1) // 2,
            "B": n * n,
            "C": n * n,
            "D": n * (n - 1),
            "E": {6: 36, 7: 63, 8: 120}.get(n, 0),
            "F": 24,
            "G": 6,
        }[fam]
    return total


def enumerate_positive_roots(t: CartanType) -> RootSystem:
    """All positive roots of ``t``, ordered by height then simple coordinates."""
    if isinstance(t, str):
        t = CartanType.parse(t)
    blocks = [_irreducible_simple_roots(f, n) for f, n in t.components]
    dim = sum(len(b[0]) for b in blocks)
    simple_vectors: list[Vector] = []
    slices = []
    offset = 0
    for block in blocks:
        width = len(block[0])
        slices.append((len(simple_vectors), len(simple_vectors) + len(block)))
        for v in block:
            simple_vectors.append(tuple([Fraction(0)] * offset + list(v) + [Fraction(0)] * (dim - offset - width)))
        offset += width

    n = len(simple_vectors)
    norms = [dot(a, a) for a in simple_vectors]
    # cartan[i][k] = 2 (a_i, a_k) / (a_k, a_k), integral for crystallographic systems
    cartan = []
    for i in range(n):
        row = []
        for k in range(n):
            c = 2 * dot(simple_vectors[i], simple_vectors[k]) / norms[k]
            assert c.denominator == 1
            row.append(int(c))
        cartan.append(row)

    simple_coords = [tuple(int(i == k) for i in range(n)) for k in range(n)]
    seen = set(simple_coords)
    frontier = list(simple_coords)
    while frontier:
        nxt = []
        for beta in frontier:
            for k in range(n):
                if beta == simple_coords[k]:
                    continue
                pairing = sum(beta[i] * cartan[i][k] for i in range(n))
                if pairing == 0:
                    continue
                img = list(beta)
                img[k] -= pairing
                img = tuple(img)
                if img not in seen:
                    seen.add(img)
                    nxt.append(img)
        frontier = nxt

    def amb(coords):
        out = [Fraction(0)] * dim
        for c, a in zip(coords, simple_vectors):
            if c:
                for j in range(dim):
                    out[j] += c * a[j]
        return tuple(out)

    positive = sorted((Root(amb(c), c) for c in seen), key=Root.sort_key)
    if any(min(r.simple_coords) < 0 for r in positive):
        raise PostconditionViolated("closure produced a mixed-sign root")
    simple = tuple(Root(simple_vectors[k], simple_coords[k]) for k in range(n))
    return RootSystem(t, simple, tuple(positive), tuple(slices))


def dominance_leq(alpha: Root, beta: Root, R: RootSystem) -> bool:
    """``alpha <= beta`` iff ``beta - alpha`` has nonnegative simple coordinates."""
    for r in (alpha, beta):
        if not R.contains(r):
            raise RootNotInSystem(f"{r.simple_coords} not a positive root of {R.cartan_type}")
    return all(b - a >= 0 for a, b in zip(alpha.simple_coords, beta.simple_coords))


class _Echelon:
    """Incrementally maintained row-echelon basis over Q."""

    def __init__(self):
        self.rows: list[tuple[int, list[Fraction]]] = []

    def reduce(self, v) -> list[Fraction]:
        v = [Fraction(x) for x in v]
        for piv, row in self.rows:
            if v[piv]:
                f = v[piv] / row[piv]
                v = [a - f * b for a, b in zip(v, row)]
        return v

    def contains(self, v) -> bool:
        return not any(self.reduce(v))

    def add(self, v) -> None:
        r = self.reduce(v)
        piv = next(i for i, x in enumerate(r) if x)
        self.rows.append((piv, r))


def is_sum_free_independent(roots, R: RootSystem) -> bool:
    roots = list(roots)
    if rational_rank([r.simple_coords for r in roots]) != len(roots):
        return False
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            s = tuple(a + b for a, b in zip(roots[i].simple_coords, roots[j].simple_coords))
            if R.is_root(s):
                return False
    return True


def select_strongly_commuting_roots(R: RootSystem) -> list[Root]:
    """Greedy choice of ``rank`` independent positive roots with no pairwise sum a root.

    At each step take a maximal element (for the dominance order) among the
    positive roots outside the span of those already chosen; ties between
    incomparable maxima go to the largest in (height, coordinates) order.
    Factors of a reducible system are handled one after another.
    """
    chosen: list[Root] = []
    for k in range(len(R.factor_slices)):
        pool = R.factor_roots(k)
        lo, hi = R.factor_slices[k]
        picked: list[Root] = []
        span = _Echelon()
        for _ in range(hi - lo):
            cands = [r for r in pool if not span.contains(r.simple_coords)]
            maximal = [
                c for c in cands
                if not any(d is not c and all(y >= x for x, y in zip(c.simple_coords, d.simple_coords)) for d in cands)
            ]
            best = max(maximal, key=Root.sort_key)
            picked.append(best)
            span.add(best.simple_coords)
        chosen.extend(picked)
    if not is_sum_free_independent(chosen, R):
        raise PostconditionViolated(f"selection for {R.cartan_type} is not sum-free independent")
    return chosen
