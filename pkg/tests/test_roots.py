import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rankembed.errors import IllegalType, RootNotInSystem
from rankembed.roots import (
    CartanType, dominance_leq, enumerate_positive_roots, is_sum_free_independent, rational_rank,
    select_strongly_commuting_roots,
)

# Positive root counts, written out independently of the library's own table.
COUNTS = {
    "A1": 1, "A2": 3, "A3": 6, "A4": 10, "A7": 28, "B2": 4, "B3": 9, "B7": 49, "C3": 9, "C7": 49,
    "D4": 12, "D5": 20, "D7": 42, "G2": 6, "F4": 24, "E6": 36, "E7": 63, "E8": 120, "A1xA1": 2, "A2xB2": 7,
}


def unit(n, *pairs):
    v = [Fraction(0)] * n
    for i, c in pairs:
        v[i] += c
    return tuple(v)


def classical_roots(fam, n):
    """Full root set from the textbook description in the standard coordinates."""
    out = set()
    if fam == "A":
        return {unit(n + 1, (i, 1), (j, -1)) for i in range(n + 1) for j in range(n + 1) if i != j}
    for i, j in itertools.combinations(range(n), 2):
        for a, b in itertools.product((1, -1), repeat=2):
            out.add(unit(n, (i, a), (j, b)))
    if fam in "BC":
        k = 1 if fam == "B" else 2
        out |= {unit(n, (i, s * k)) for i in range(n) for s in (1, -1)}
    return out


def e8_roots():
    h = Fraction(1, 2)
    out = {unit(8, (i, a), (j, b)) for i, j in itertools.combinations(range(8), 2)
           for a, b in itertools.product((1, -1), repeat=2)}
    for signs in itertools.product((h, -h), repeat=8):
        if sum(s < 0 for s in signs) % 2 == 0:
            out.add(tuple(signs))
    return out


@pytest.mark.parametrize("name,count", sorted(COUNTS.items()))
def test_positive_root_counts(name, count):
    R = enumerate_positive_roots(CartanType.parse(name))
    assert len(R.positive_roots) == count
    assert len(set(R.all_roots)) == 2 * count


@pytest.mark.parametrize("fam,n", [("A", 4), ("B", 4), ("C", 4), ("D", 5)])
def test_classical_root_sets_match_textbook(fam, n):
    R = enumerate_positive_roots(CartanType.of(fam, n))
    assert {r.ambient for r in R.all_roots} == classical_roots(fam, n)


def test_e8_root_set_matches_textbook():
    R = enumerate_positive_roots(CartanType.of("E", 8))
    assert {r.ambient for r in R.all_roots} == e8_roots()


def test_simple_coords_reproduce_ambient():
    R = enumerate_positive_roots(CartanType.of("F", 4))
    for r in R.positive_roots:
        assert R.ambient_of(r.simple_coords) == r.ambient
        assert min(r.simple_coords) >= 0


def test_parse_and_illegal_types():
    assert CartanType.parse("A1xA1").rank == 2
    assert CartanType.parse("b_3").name == "B3"
    for bad in [("D", 2), ("A", 13), ("A", 0), ("E", 5), ("E", 9), ("G", 3), ("F", 5), ("Q", 2), ("B", 1)]:
        with pytest.raises(IllegalType):
            CartanType.of(*bad)
    with pytest.raises(IllegalType):
        CartanType.parse("A")


def test_dominance_examples():
    R = enumerate_positive_roots(CartanType.of("A", 2))
    a1, a2, a12 = (R.root(c) for c in [(1, 0), (0, 1), (1, 1)])
    assert dominance_leq(a1, a12, R) and dominance_leq(a2, a12, R)
    assert not dominance_leq(a1, a2, R) and not dominance_leq(a2, a1, R)
    other = enumerate_positive_roots(CartanType.of("A", 3)).root((1, 1, 1))
    with pytest.raises(RootNotInSystem):
        dominance_leq(other, a1, R)
    with pytest.raises(RootNotInSystem):
        R.root((2, 1))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["A4", "B3", "C4", "D4", "G2", "F4"]), st.data())
def test_dominance_is_a_partial_order(name, data):
    R = enumerate_positive_roots(CartanType.parse(name))
    a, b, c = (data.draw(st.sampled_from(R.positive_roots)) for _ in range(3))
    assert dominance_leq(a, a, R)
    if dominance_leq(a, b, R) and dominance_leq(b, a, R):
        assert a == b
    if dominance_leq(a, b, R) and dominance_leq(b, c, R):
        assert dominance_leq(a, c, R)


@pytest.mark.parametrize("name", ["A1", "A2", "A3", "A5", "B2", "B4", "C3", "D4", "D6", "G2", "F4", "E6", "E7", "E8",
                                  "A1xA1", "A2xG2"])
def test_selection_is_sum_free_and_independent(name):
    t = CartanType.parse(name)
    R = enumerate_positive_roots(t)
    sel = select_strongly_commuting_roots(R)
    assert len(sel) == t.rank
    assert rational_rank([r.ambient for r in sel]) == t.rank
    ambient = {r.ambient for r in R.all_roots}
    for x, y in itertools.combinations(sel, 2):
        assert tuple(a + b for a, b in zip(x.ambient, y.ambient)) not in ambient
    assert is_sum_free_independent(sel, R)


def test_known_selections():
    R = enumerate_positive_roots(CartanType.of("A", 3))
    assert [r.simple_coords for r in select_strongly_commuting_roots(R)] == [(1, 1, 1), (1, 1, 0), (0, 1, 1)]
    R = enumerate_positive_roots(CartanType.parse("A1xA1"))
    assert [r.simple_coords for r in select_strongly_commuting_roots(R)] == [(1, 0), (0, 1)]
    # the highest root is always chosen first
    for name in ["B3", "G2", "E6"]:
        R = enumerate_positive_roots(CartanType.parse(name))
        assert select_strongly_commuting_roots(R)[0] == R.positive_roots[-1]


def test_sum_free_rejects_bad_sets():
    R = enumerate_positive_roots(CartanType.of("A", 2))
    a1, a2 = R.root((1, 0)), R.root((0, 1))
    assert not is_sum_free_independent([a1, a2], R)  # a1 + a2 is a root
    assert not is_sum_free_independent([a1, a1], R)
