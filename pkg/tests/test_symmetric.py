import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rankembed import symmetric as S
from rankembed.errors import NotSPD

coord = st.floats(-4, 4, allow_nan=False)
hpoint = st.builds(S.HyperbolicPoint, coord, coord)


def uhp_distance(a, b):
    """Textbook formula on the upper half plane."""
    za, zb = a.z, b.z
    return math.acosh(1 + abs(za - zb) ** 2 / (2 * za.imag * zb.imag))


@settings(max_examples=60, deadline=None)
@given(hpoint, hpoint, hpoint)
def test_group_law_associative_with_inverse(a, b, c):
    l, r = (a * b) * c, a * (b * c)
    assert l.t == pytest.approx(r.t, abs=1e-9)
    assert l.s == pytest.approx(r.s, rel=1e-9, abs=1e-9)
    e = a * a.inverse()
    assert abs(e.t) < 1e-12 and abs(e.s) < 1e-6 * (1 + abs(a.s) * math.exp(2 * abs(a.t)))


@settings(max_examples=60, deadline=None)
@given(hpoint, hpoint, hpoint)
def test_hyperbolic_distance_matches_upper_half_plane_and_is_left_invariant(a, b, g):
    d = S.hyperbolic_distance(a, b)
    assert d == pytest.approx(uhp_distance(a, b), rel=1e-9, abs=1e-7)
    assert S.hyperbolic_distance(g * a, g * b) == pytest.approx(d, rel=1e-8, abs=1e-7)


def test_group_action_matches_matrix_action():
    a, b = S.HyperbolicPoint(0.3, -1.2), S.HyperbolicPoint(-0.7, 0.4)
    def mat(p):
        return np.array([[math.exp(p.t), p.s * math.exp(p.t)], [0, math.exp(-p.t)]])
    g = mat(a) @ mat(b)
    z = (g[0, 0] * 1j + g[0, 1]) / (g[1, 1])
    assert (a * b).z == pytest.approx(z)
    assert S.HyperbolicPoint.from_upper_half_plane(2.0, 3.0).z == pytest.approx(2 + 3j)


@pytest.mark.parametrize("n", range(1, 7))
def test_embedding_invariants(n):
    E = S.build_an_embedding(n)
    assert len(E.X) == len(E.Z) == n
    for i, x in enumerate(E.X):
        assert sum(x) == 0
        for j, (a, b) in enumerate(E.Z):
            assert x[a] - x[b] == (2 if i == j else 0)
    # Z's commute and each exp(t X_i) commutes with Z_j for j != i
    Zs = [E.z_matrix(i) for i in range(n)]
    for i in range(n):
        for j in range(n):
            assert np.array_equal(Zs[i] @ Zs[j], Zs[j] @ Zs[i])
            if i != j:
                D = np.diag(np.exp(E.x_float[i]))
                np.testing.assert_allclose(D @ Zs[j], Zs[j] @ D)


def test_known_small_embeddings():
    E = S.build_an_embedding(2)
    assert E.Z == ((0, 2), (0, 1))
    assert E.X[0] == (Fraction(2, 3), Fraction(2, 3), Fraction(-4, 3))
    assert E.frobenius_norms()[0] == pytest.approx(math.sqrt(24) / 3)
    assert S.build_an_embedding(3).frobenius_norms() == pytest.approx([2, math.sqrt(3), math.sqrt(3)])
    for bad in (0, 7):
        with pytest.raises(ValueError):
            S.build_an_embedding(bad)


def test_embedded_matrices_are_spd_unimodular():
    E = S.build_an_embedding(3)
    rng = np.random.default_rng(0)
    for _ in range(10):
        p = S.ProductPoint.of(rng.uniform(-2, 2, (3, 2)))
        P = S.embed(E, p)
        P.check()


def test_spd_check_errors():
    with pytest.raises(NotSPD):
        S.SPDPoint(np.array([[1.0, 2.0], [0.0, 1.0]])).check()
    with pytest.raises(NotSPD):
        S.SPDPoint(np.diag([1.0, -1.0])).check()
    with pytest.raises(NotSPD):
        S.SPDPoint(np.diag([2.0, 2.0])).check()


def test_stable_and_raw_distances_agree_at_moderate_scale():
    E = S.build_an_embedding(2)
    rng = np.random.default_rng(4)
    for _ in range(20):
        p, q = (S.ProductPoint.of(rng.uniform(-1.5, 1.5, (2, 2))) for _ in range(2))
        P, Q = S.embed(E, p), S.embed(E, q)
        raw = S.spd_distance(S.SPDPoint(P.P), S.SPDPoint(Q.P))
        assert S.spd_distance(P, Q) == pytest.approx(raw, rel=1e-8, abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(hpoint, hpoint)
def test_rank_one_map_scales_by_sqrt2(a, b):
    E = S.build_an_embedding(1)
    p, q = S.ProductPoint((a,)), S.ProductPoint((b,))
    d = S.hyperbolic_distance(a, b)
    assert S.an_distance(E, p, q) == pytest.approx(math.sqrt(2) * d, rel=1e-9, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 4), st.integers(0, 3), hpoint, hpoint)
def test_single_factor_bounds(n, i, a, b):
    """Moving one factor: sqrt 2 d_H <= d <= ||X_i||_F d_H."""
    i %= n
    E = S.build_an_embedding(n)
    base = [S.HyperbolicPoint(0.0, 0.0)] * n
    p = S.ProductPoint(tuple(a if k == i else f for k, f in enumerate(base)))
    q = S.ProductPoint(tuple(b if k == i else f for k, f in enumerate(base)))
    d = S.hyperbolic_distance(a, b)
    got = S.an_distance(E, p, q)
    assert got >= math.sqrt(2) * d * (1 - 1e-9) - 1e-9
    assert got <= E.frobenius_norms()[i] * d * (1 + 1e-9) + 1e-9


def test_dyadic_bins():
    assert S.dyadic_bins(1, 64) == [(1, 2), (2, 4), (4, 8), (8, 16), (16, 32), (32, 64)]
    assert S.dyadic_bins(1, 5) == [(1, 2), (2, 4), (4, 5)]
    with pytest.raises(ValueError):
        S.dyadic_bins(2, 1)


def test_point_at_distance():
    d = np.array([0.5, 3.0, 40.0])
    t, s = S._point_at_distance(d, np.array([0.3, 2.0, 5.0]))
    got = S._hyp_dist_arrays(np.zeros(3), np.zeros(3), t, s)
    np.testing.assert_allclose(got, d, rtol=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_certify_qi_is_bounded_and_thread_independent(n):
    E = S.build_an_embedding(n)
    cfg = S.SamplerConfig(seed=5, N=1200, threads=1)
    r1 = S.certify_qi(E, cfg)
    r4 = S.certify_qi(E, S.SamplerConfig(seed=5, N=1200, threads=4))
    assert r1.passed
    assert r1.to_dict() == r4.to_dict()
    c = r1.constants
    assert c["lambda_hat"] <= c["proven_ratio_cap"] * (1 + 1e-9)
    assert c["c_hat"] >= 0.05
    assert sum(b["count"] for b in c["bins"]) == 1200
    kinds = [w["kind"] for w in r1.witnesses]
    assert kinds == ["max_ratio", "min_ratio"]
    assert r1.witnesses[0]["ratio"] == pytest.approx(c["lambda_hat"])


def test_certify_qi_threshold_failure_is_reported():
    E = S.build_an_embedding(2)
    r = S.certify_qi(E, S.SamplerConfig(seed=1, N=600, max_ratio_cap=1.0))
    assert not r.passed and r.constants["max_ratio_threshold"] == 1.0


def test_rank_one_delta_closed_form():
    L = np.linspace(0, 20, 200001)
    sup = np.max(2 * np.arcsinh(np.sinh(L / 2) * np.exp(-L)))
    assert sup == pytest.approx(S.RANK_ONE_DELTA_SUP, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(hpoint, hpoint)
def test_rank_one_quasi_path(a, b):
    path = S.rank_one_quasi_path(a, b)
    assert path.length <= 3 * path.distance + path.delta + 1e-9 * (1 + path.distance)
    assert path.delta <= S.RANK_ONE_DELTA_SUP + 1e-12
    x, xpp, ypp, y = path.points
    legs = [S.hyperbolic_distance(u, v) for u, v in zip(path.points, path.points[1:])]
    assert sum(legs) == pytest.approx(path.length, rel=1e-7, abs=1e-7)
    # x'' and y'' lie on a common horocycle
    assert S.busemann_infinity(xpp) == pytest.approx(S.busemann_infinity(ypp), abs=1e-9)


def test_rank_one_paths_stable_between_seeds():
    a, b = S.certify_rank_one_paths(1), S.certify_rank_one_paths(2)
    assert a.passed and b.passed
    da, db = a.constants["delta_hat"], b.constants["delta_hat"]
    assert abs(da - db) <= 0.05 * max(da, db)


def test_sl2_exactness_report():
    r = S.certify_sl2_exactness(3, N=300)
    assert r.passed and r.constants["max_scaled_error"] < 1e-10
