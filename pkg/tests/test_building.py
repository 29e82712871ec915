import math

import pytest

from rankembed import building as B
from rankembed.errors import DisconnectedXDelta, RadiusTooLarge
from rankembed.lattice import graph_distance


@pytest.fixture(scope="module")
def ball2():
    return B.x_delta_ball(2, 2, 2)


def test_ball_sizes():
    assert [len(B.build_ball(2, r).vertices) for r in range(3)] == [1, 15, 113]
    assert len(B.build_ball(3, 1).vertices) == 27
    with pytest.raises(RadiusTooLarge):
        B.build_ball(2, 5)
    with pytest.raises(RadiusTooLarge):
        B.build_ball(2, -1)


def test_ball_edges_are_adjacencies(ball2):
    for i, j in ball2.edges[:200]:
        assert graph_distance(ball2.vertices[i], ball2.vertices[j]) == 1


def test_boundary_config():
    c = B.BoundaryConfig3().check()
    assert c["maximally_distributed"] and c["delta_matches_hull"] and c["walls_contain_opposite_vertex"]
    assert c["angle"] == pytest.approx(2 * math.pi / 3)


def test_projection_formula_matches_ray(ball2):
    r = B.projection_agreement(ball2)
    assert r.passed and r.constants["mismatches"] == 0


def test_projection_on_apartment():
    v = B.apartment_vertex(2, 1, 0)
    # pi_1 drops e2, pi_2 drops e1
    assert B.projection_pi(1, v).exps == (2, 0)
    assert B.projection_pi(2, v).exps == (1, 0)


def test_x_delta_marks_match_oracle(ball2):
    r = B.x_delta_consistency(ball2)
    assert r.passed and r.constants["oracle_mismatches"] == 0 and r.constants["unmarked"] > 0


def test_certify_radius_two(ball2):
    r = B.certify_building_embedding(ball2)
    c = r.constants
    assert r.passed
    assert c["injective_on_marked"] and c["ambient_non_injective"]
    assert c["lipschitz_max_step"] == 1
    assert c["step1_equality_cases"] > 0 and c["step1_tangent_form_violations"] > 0
    kinds = {w["kind"] for w in r.witnesses}
    assert {"max_dX_over_sum", "max_sum_over_dX", "ambient_non_injective"} <= kinds
    wit = next(w for w in r.witnesses if w["kind"] == "ambient_non_injective")
    assert not (wit["x"]["marked"] and wit["y"]["marked"])


def test_radius_zero_is_trivial():
    ball = B.x_delta_ball(2, 0, 0)
    r = B.certify_building_embedding(ball)
    assert r.passed and r.constants["vertices"] == 1 and r.constants["marked"] == 1


def test_disconnected_marks_are_reported():
    ball = B.build_ball(2, 2)
    ball.in_x_delta = [False] * len(ball.vertices)
    ball.in_x_delta[0] = True
    ball.in_x_delta[-1] = True
    with pytest.raises(DisconnectedXDelta):
        B.certify_building_embedding(ball)


def test_apartment_step1_constant():
    ok, graph, euclid, eq, tan = B._apartment_step1(2, 3)
    assert ok and graph == 1.0 and euclid == pytest.approx(1.0)
    assert eq > 0 and tan > 0


def test_ball_json_shape():
    d = B.build_ball(2, 1).to_dict()
    assert len(d["vertices"]) == 15 and len(d["edges"]) > 0
    assert all(isinstance(x, str) and "/" in x for row in d["vertices"][0] for x in row)
