import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rankembed import trees as T
from rankembed.errors import NoSharedChamber, NotAsymptotic

Q = 3


@st.composite
def vertices(draw, q=Q, max_depth=6):
    n = draw(st.integers(0, max_depth))
    word = []
    for _ in range(n):
        word.append(draw(st.sampled_from([a for a in range(q) if not word or a != word[-1]])))
    return T.TreeVertex(tuple(word))


@st.composite
def ends(draw, q=Q):
    v = draw(vertices(q, 4))
    return T.end_through(v.address, q)


def busemann_by_limit(x, eta, big=40):
    """lim d(eta(t), x) - t along the ray from the root."""
    return T.tree_distance(eta.vertex(big), x) - big


@pytest.mark.parametrize("q,r", [(2, 4), (3, 3), (4, 2)])
def test_ball_size(q, r):
    assert len(T.tree_ball(q, r)) == 1 + sum(q * (q - 1) ** (k - 1) for k in range(1, r + 1))


def test_words_are_reduced():
    with pytest.raises(ValueError):
        T.TreeVertex((1, 1))
    with pytest.raises(ValueError):
        T.TreeEnd((0,), (1, 1))
    with pytest.raises(ValueError):
        T.TreeEnd((0,), ())


@settings(max_examples=150, deadline=None)
@given(vertices(), vertices(), ends())
def test_busemann_and_branching_match_oracles(x, y, eta):
    assert T.busemann(x, eta) == busemann_by_limit(x, eta)
    assert T.busemann(x, eta, base=y) == busemann_by_limit(x, eta) - busemann_by_limit(y, eta)
    assert T.branching_point(x, y, eta) == T.branching_point_oracle(x, y, eta)


@settings(max_examples=100, deadline=None)
@given(vertices(), vertices(), vertices())
def test_tree_metric(x, y, z):
    assert T.tree_distance(x, y) == T.tree_distance(y, x)
    assert T.tree_distance(x, z) <= T.tree_distance(x, y) + T.tree_distance(y, z)
    # four-point condition: trees are 0-hyperbolic
    w = T.ROOT
    s = sorted([T.tree_distance(x, y) + T.tree_distance(z, w), T.tree_distance(x, z) + T.tree_distance(y, w),
                T.tree_distance(x, w) + T.tree_distance(y, z)])
    assert s[1] == s[2]


def test_ray_walks_toward_the_end():
    eta = T.TreeEnd((1, 2), (0, 1))
    x = T.TreeVertex((2, 0, 2))
    r = T.ray(x, eta, 10)
    assert all(T.tree_distance(a, b) == 1 for a, b in zip(r, r[1:]))
    assert [T.busemann(v, eta) for v in r] == [T.busemann(x, eta) - k for k in range(11)]


def test_line_positions():
    line = T.standard_line(Q)
    for k in range(-6, 7):
        v = line.vertex(k)
        assert line.position(v) == k
        assert T.tree_distance(v, line.vertex(k + 1)) == 1
    assert line.position(T.TreeVertex((1,))) is None


def test_projection_checks_small():
    r = T.projection_checks(Q, 2, 3)
    assert r.passed and r.constants["oracle_mismatches"] == 0 and r.constants["lipschitz_max_step"] == 1


def test_step1_constant_is_one_for_orthogonal_walls():
    F = T.standard_apartment(Q, 2)
    r = T.step1_constant_check(F, [1, 1], 3)
    assert r.passed and r.constants["alpha"] == 1 and r.constants["max_ratio"] == 1
    # a wrong constant breaks the equality cases
    assert not T.step1_constant_check(F, [Fraction(1, 2)] * 2, 2).passed


def test_beta_squared():
    assert T.beta_squared([1, 1]) == Fraction(1, 2)
    assert T.beta_squared([1, 2]) == Fraction(5, 4)
    with pytest.raises(ValueError):
        T.beta_squared([1, 0])


@pytest.mark.parametrize("speeds", [[1, 1], [1, 2], [2, 3, 5]])
def test_beta_matches_angle_formula(speeds):
    v = np.array(speeds, dtype=float)
    # theta = twice the angle from eta to the nearest wall of the chamber
    phi = np.arcsin(v.min() / np.linalg.norm(v))
    theta = 2 * phi
    assert math.sqrt(T.beta_squared(speeds)) == pytest.approx(1 / math.sqrt(2 * (1 - math.cos(theta))))


@pytest.mark.parametrize("speeds", [[1, 1], [1, 2]])
def test_branching_bound_is_sharp(speeds):
    r = T.branching_bound_check(Q, 2, speeds, 3, samples=50, seed=1)
    assert r.passed and r.constants["oracle_agrees"]
    assert r.constants["max_ratio"] == pytest.approx(r.constants["beta"])


def test_product_branching_requires_strong_asymptoticity():
    F = T.standard_apartment(Q, 2)
    ends = [line.plus for line in F.lines]
    x = F.point([0, 0])
    y = F.point([1, 0])
    with pytest.raises(NotAsymptotic):
        T.product_branching(x, y, ends, [1, 1])


def test_shared_chamber():
    base = T.standard_line(Q)
    F1 = T.ApartmentT((base, base))
    F2 = T.ApartmentT((T.branched_line(base, 2, Q), base))
    assert [e.period for e in T.shared_chamber(F1, F2)] == [(0, 1), (0, 1)]
    other = T.LineT(T.TreeEnd((1,), (0, 2)), T.TreeEnd((1, 2), (0, 1)))
    with pytest.raises(NoSharedChamber):
        T.shared_chamber(F1, T.ApartmentT((other, base)))


@settings(max_examples=80, deadline=None)
@given(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4))
def test_union_of_flats_path(k, x1, x2, y1, y2):
    base = T.standard_line(Q)
    F1 = T.ApartmentT((base, base))
    F2 = T.ApartmentT((T.branched_line(base, k, Q), base))
    x, y = F1.point([x1, x2]), F2.point([y1, y2])
    path = T.union_of_flats_path(F1, F2, x, y)
    beta = math.sqrt(T.beta_squared([1, 1]))
    assert path.length <= (2 * beta + 2) * T.product_distance_l2(x, y) + 1e-9
    assert path.points[0] == x and path.points[-1] == y


def test_union_of_flats_path_rejects_points_off_the_flats():
    base = T.standard_line(Q)
    F1 = T.ApartmentT((base, base))
    F2 = T.ApartmentT((T.branched_line(base, 0, Q), base))
    off = T.ProductPointT((T.TreeVertex((1,)), T.ROOT))
    assert not F1.contains(off)
    with pytest.raises(ValueError):
        T.union_of_flats_path(F1, F2, off, F2.point([0, 0]))


def test_union_of_flats_check_small():
    r = T.union_of_flats_check(Q, 2, 3, samples=30, seed=2)
    assert r.passed and r.constants["explicit_paths_agree"]
    assert r.constants["max_ratio"] <= r.constants["lambda"]
