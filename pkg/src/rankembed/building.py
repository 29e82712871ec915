"""Finite balls in the Bruhat-Tits building of SL(3, Q_p) and the embedding of
a product of two trees through the cross-section projections.

Conventions.  The standard apartment F0 consists of the classes of
span(p^a e1, p^b e2, p^c e3).  The ray from [L] toward the boundary vertex of a
line D is [L + p^-k (L n D)]_k.  xi_1, xi_2 are the lines span(e1), span(e2);
eta_1 = xi_2 and eta_2 = xi_1, so pi_1 reads off the image of L in
Q_p^3 / span(e2) and pi_2 the image in Q_p^3 / span(e1).
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .coxeter import SphericalVertex, hull_chambers, is_maximally_distributed
from .errors import DisconnectedXDelta, RadiusTooLarge
from .lattice import (
    LatticeClass,
    canonicalize,
    canonicalize_columns,
    graph_distance,
    intersect_coordinates,
    neighbors,
    quotient_class,
    splits_along,
    sublattice_class,
)
from .reports import VerificationReport
from .roots import CartanType, enumerate_positive_roots

MAX_RADIUS = {2: 4, 3: 3}

# line D_i defining eta_i, and the complementary coordinates
_LINE = {1: 1, 2: 0}


def apartment_vertex(a: int, b: int, c: int, p: int = 2) -> LatticeClass:
    P = Fraction(p)
    return canonicalize([[P**a, 0, 0], [0, P**b, 0], [0, 0, P**c]], p)


def unipotent_vertex(a: Fraction, b: Fraction, x: int, y: int, z: int, p: int = 2) -> LatticeClass:
    """u(a, b) . apartment_vertex(x, y, z) with u(a, b) = I + a E13 + b E23."""
    P = Fraction(p)
    cols = [[P**x, 0, 0], [0, P**y, 0], [a * P**z, b * P**z, P**z]]
    return canonicalize_columns(cols, p, 3)


def base_vertex(p: int = 2) -> LatticeClass:
    return apartment_vertex(0, 0, 0, p)


def tree_base(p: int = 2) -> LatticeClass:
    return canonicalize([[1, 0], [0, 1]], p)


@dataclass
class BuildingBall:
    p: int
    radius: int
    vertices: list[LatticeClass]
    depth: list[int]
    edges: list[tuple[int, int]]
    in_x_delta: list[bool] = field(default_factory=list)
    index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.index = {v: k for k, v in enumerate(self.vertices)}

    @property
    def center(self) -> LatticeClass:
        return self.vertices[0]

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in self.vertices]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "radius": self.radius,
            "vertices": [v.to_strings() for v in self.vertices],
            "types": [v.type for v in self.vertices],
            "depth": self.depth,
            "edges": [list(e) for e in self.edges],
            "in_x_delta": list(self.in_x_delta),
        }


def build_ball(p: int = 2, radius: int = 2) -> BuildingBall:
    """BFS ball around [Z_p^3]; vertices ordered by depth, then canonical key."""
    if radius < 0 or radius > MAX_RADIUS.get(p, 2):
        raise RadiusTooLarge(f"radius {radius} exceeds the desk-scale limit for p={p}")
    start = base_vertex(p)
    layers = [[start]]
    seen = {start}
    nbrs: dict[LatticeClass, list[LatticeClass]] = {}
    for _ in range(radius):
        nxt = set()
        for v in layers[-1]:
            nbrs[v] = neighbors(v)
            for w in nbrs[v]:
                if w not in seen:
                    nxt.add(w)
        seen |= nxt
        layers.append(sorted(nxt, key=lambda L: (L.exps, L.upper)))
    verts = [v for layer in layers for v in layer]
    depth = [d for d, layer in enumerate(layers) for _ in layer]
    index = {v: k for k, v in enumerate(verts)}
    edges = set()
    for v in verts:
        if v not in nbrs:
            nbrs[v] = neighbors(v)
        i = index[v]
        for w in nbrs[v]:
            j = index.get(w)
            if j is not None:
                edges.add((min(i, j), max(i, j)))
    ball = BuildingBall(p, radius, verts, depth, sorted(edges))
    ball.in_x_delta = [False] * len(verts)
    return ball


# --------------------------------------------------------------------------
# boundary configuration and projections


@dataclass(frozen=True)
class BoundaryConfig3:
    """xi_1 = span(e1), xi_2 = span(e2) seen in the exponent coordinates of F0.

    The ray toward the line span(e_k) lowers the k-th exponent, so xi_k has
    direction -e_k projected to the sum-zero plane (scaled to integers).
    """

    xi: tuple[tuple[int, ...], ...] = ((-2, 1, 1), (1, -2, 1))
    xi_hat: tuple[tuple[int, ...], ...] = ((2, -1, -1), (-1, 2, -1))  # planes span(e2,e3), span(e1,e3)
    walls: tuple[tuple[int, ...], ...] = ((1, 0, -1), (0, 1, -1))  # normals of s_1, s_2
    delta: tuple[tuple[tuple[int, ...], ...], ...] = (((-2, 1, 1), (-1, -1, 2)), ((-1, -1, 2), (1, -2, 1)))

    def vertices(self) -> list[SphericalVertex]:
        return [SphericalVertex(1, v) for v in self.xi]

    def angle(self) -> float:
        u, v = self.xi
        c = sum(a * b for a, b in zip(u, v)) / math.sqrt(sum(a * a for a in u) * sum(b * b for b in v))
        return math.acos(c)

    def check(self) -> dict:
        R = enumerate_positive_roots(CartanType.of("A", 2))
        verts = self.vertices()
        chambers = hull_chambers(verts, R)
        return {
            "maximally_distributed": is_maximally_distributed(verts, R),
            "angle": self.angle(),
            "delta_matches_hull": sorted(tuple(sorted(c)) for c in chambers)
            == sorted(tuple(sorted(c)) for c in self.delta),
            "walls_contain_opposite_vertex": all(
                sum(a * b for a, b in zip(self.walls[i], self.xi[1 - i])) == 0 for i in range(2)
            ),
        }


def projection_pi(i: int, L: LatticeClass) -> LatticeClass:
    """Quotient formula: class of the image of L modulo the line D_i."""
    return quotient_class(L, _LINE[i])


def projection_pi_ray(i: int, L: LatticeClass, max_steps: int = 64) -> tuple[LatticeClass, int]:
    """Follow L_k = L + p^-k (L n D_i) until L_k splits along D_i + complement.

    Returns the class of L_k n complement (the cross-section coordinate) and the
    number of steps taken to enter the parallel set.
    """
    d = _LINE[i]
    rest = [c for c in range(3) if c != d]
    cur = L
    for k in range(max_steps + 1):
        if splits_along(cur, [[d], rest]):
            return sublattice_class(intersect_coordinates(cur, rest), L.p), k
        (gen,) = intersect_coordinates(cur, [d])
        vec = [Fraction(0)] * 3
        vec[d] = gen[0] / cur.p
        cur = canonicalize_columns(cur.columns() + [vec], cur.p, 3)
    raise AssertionError("ray did not enter the parallel set")


def in_x_delta_oracle(L: LatticeClass) -> bool:
    """L lies in an apartment containing both chambers of Delta iff L n span(e1, e2) splits."""
    k = sublattice_class(intersect_coordinates(L, [0, 1]), L.p)
    return splits_along(k, [[0], [1]])


def in_parallel_set(i: int, L: LatticeClass) -> bool:
    d = _LINE[i]
    return splits_along(L, [[d], [c for c in range(3) if c != d]])


def x_delta_candidates(p: int, radius: int, val_bound: int):
    """Classes u(a, b) F0 that can lie within ``radius`` of the base vertex.

    With z = 0, v(det) = x + y and the largest elementary divisor is at least
    (x + y) / 3; a vertex within distance R therefore has every basis entry of
    valuation >= ceil((x + y) / 3) - R, which bounds x, y and the valuations of
    a, b.  a matters modulo p^x and b modulo p^y.
    """
    out = set()
    for s in range(-6 * radius, 3 * radius + 1):
        lo = -((radius * 3 - s) // 3)  # ceil(s / 3) - R
        if lo > 0:
            continue
        for x in range(lo, s - lo + 1):
            y = s - x
            if y < lo:
                continue
            la = max(lo, -val_bound)
            for ja in range(p ** max(0, x - la)):
                a = Fraction(ja) * Fraction(p) ** la
                for jb in range(p ** max(0, y - la)):
                    b = Fraction(jb) * Fraction(p) ** la
                    out.add(unipotent_vertex(a, b, x, y, 0, p))
    return out


def x_delta_ball(p: int = 2, radius: int = 2, val_bound: int = 2, ball: BuildingBall | None = None) -> BuildingBall:
    ball = ball or build_ball(p, radius)
    marked = x_delta_candidates(p, radius, val_bound)
    ball.in_x_delta = [v in marked for v in ball.vertices]
    return ball


# --------------------------------------------------------------------------
# certification


def _bfs(adj, src, allowed):
    dist = {src: 0}
    dq = deque([src])
    while dq:
        u = dq.popleft()
        for w in adj[u]:
            if allowed[w] and w not in dist:
                dist[w] = dist[u] + 1
                dq.append(w)
    return dist


def _apartment_step1(p: int, radius: int):
    """Exact Step-1 check on F0: d_euclid <= alpha (h_1 + h_2), alpha = 1/sin(pi/3).

    Exponent vectors are compared in the sum-zero plane with the trace-form
    length; a tree edge in a cross section is the distance 1/sqrt(2) between
    adjacent parallel lines.  Squares keep it exact: alpha^2 / 2 = 2/3.
    """
    pts = [(a, b) for a in range(-radius, radius + 1) for b in range(-radius, radius + 1)
           if max(a, b, 0) - min(a, b, 0) <= radius]
    ok, worst_graph, worst_euclid = True, Fraction(0), Fraction(0)
    equality_cases = tangent_violations = 0
    for i, (a1, b1) in enumerate(pts):
        for a2, b2 in pts[i + 1:]:
            da, db, dc = a2 - a1, b2 - b1, 0
            d1, d2 = abs(da - dc), abs(db - dc)
            e2 = Fraction(da * da + db * db + dc * dc) - Fraction((da + db + dc) ** 2, 3)
            graph = max(da, db, dc) - min(da, db, dc)
            rhs = Fraction(2, 3) * (d1 + d2) ** 2
            # with alpha = 1/tan(pi/3) the same bound would read e2 <= (1/6)(d1 + d2)^2
            tangent_violations += e2 > Fraction(1, 6) * (d1 + d2) ** 2
            ok &= e2 <= rhs and graph <= d1 + d2
            if d1 == 0 or d2 == 0:
                ok &= e2 == rhs
                equality_cases += 1
            worst_graph = max(worst_graph, Fraction(graph, d1 + d2))
            worst_euclid = max(worst_euclid, e2 / rhs)
    return ok, float(worst_graph), math.sqrt(worst_euclid), equality_cases, tangent_violations


def certify_building_embedding(ball: BuildingBall, check_name: str = "building.certify") -> VerificationReport:
    t0 = time.perf_counter()
    p = ball.p
    verts = ball.vertices
    proj = [(projection_pi(1, v), projection_pi(2, v)) for v in verts]
    marks = ball.in_x_delta
    adj = ball.adjacency()
    tb = tree_base(p)

    # (a) injectivity on marked vertices, and a witness off X_Delta
    seen: dict = {}
    collisions = []
    for k, m in enumerate(marks):
        if m:
            if proj[k] in seen:
                collisions.append((seen[proj[k]], k))
            seen.setdefault(proj[k], k)
    injective = not collisions
    amb: dict = {}
    ambient_witness = None
    for k in range(len(verts)):
        if proj[k] in amb and ambient_witness is None:
            ambient_witness = (amb[proj[k]], k)
        amb.setdefault(proj[k], k)

    # (b) 1-Lipschitz on every edge
    lip = max((max(graph_distance(proj[i][0], proj[j][0]), graph_distance(proj[i][1], proj[j][1]))
               for i, j in ball.edges), default=0)

    # (c) bi-Lipschitz constants with the X_Delta-internal metric
    marked_idx = [k for k, m in enumerate(marks) if m]
    up, down = 0.0, 0.0
    wit_up = wit_down = None
    tdist: dict = {}

    def td(a, b):
        key = (a, b)
        if key not in tdist:
            tdist[key] = graph_distance(a, b)
        return tdist[key]

    for k in marked_idx:
        dist = _bfs(adj, k, marks)
        if len(dist) != len(marked_idx):
            raise DisconnectedXDelta(f"marked set is disconnected at radius {ball.radius}; raise val_bound")
        for j in marked_idx:
            if j <= k:
                continue
            dx = dist[j]
            dsum = td(proj[k][0], proj[j][0]) + td(proj[k][1], proj[j][1])
            if dsum and dx / dsum > up:
                up, wit_up = dx / dsum, (k, j, dx, dsum)
            if dx and dsum / dx > down:
                down, wit_down = dsum / dx, (k, j, dx, dsum)

    # (d) Step-1 constant on F0
    step1_ok, step1_graph, step1_euclid, eq_cases, tan_viol = _apartment_step1(p, ball.radius)

    # image coverage of the product of tree balls (reported, not asserted)
    image = set(seen)
    radius_t = ball.radius
    firsts = {q for q, _ in image if td(tb, q) <= radius_t}
    seconds = {q for _, q in image if td(tb, q) <= radius_t}
    covered = sum(1 for a, b in image if a in firsts and b in seconds)
    coverage = covered / max(1, len(firsts) * len(seconds))

    def vw(k):
        return {"index": k, "basis": verts[k].to_strings(), "marked": bool(marks[k])}

    witnesses = []
    if wit_up:
        witnesses.append({"kind": "max_dX_over_sum", "x": vw(wit_up[0]), "y": vw(wit_up[1]),
                          "d_x_delta": wit_up[2], "d1_plus_d2": wit_up[3]})
    if wit_down:
        witnesses.append({"kind": "max_sum_over_dX", "x": vw(wit_down[0]), "y": vw(wit_down[1]),
                          "d_x_delta": wit_down[2], "d1_plus_d2": wit_down[3]})
    if ambient_witness:
        a, b = ambient_witness
        witnesses.append({"kind": "ambient_non_injective", "x": vw(a), "y": vw(b)})
    for a, b in collisions[:3]:
        witnesses.append({"kind": "marked_collision", "x": vw(a), "y": vw(b)})

    passed = injective and lip <= 1 and step1_ok
    return VerificationReport(
        check_name,
        {"p": p, "radius": ball.radius},
        bool(passed),
        {
            "vertices": len(verts),
            "marked": len(marked_idx),
            "injective_on_marked": injective,
            "ambient_non_injective": ambient_witness is not None,
            "lipschitz_max_step": lip,
            "max_dX_over_sum": up,
            "max_sum_over_dX": down,
            "step1_alpha": 2 / math.sqrt(3),
            "step1_graph_ratio_max": step1_graph,
            "step1_euclid_ratio_max": step1_euclid,
            "step1_equality_cases": eq_cases,
            "step1_tangent_form_violations": tan_viol,
            "tree_edge_hausdorff_scale": 1 / math.sqrt(2),
            "image_coverage": coverage,
        },
        witnesses,
        int(1000 * (time.perf_counter() - t0)),
    )


def projection_agreement(ball: BuildingBall) -> VerificationReport:
    """Quotient formula vs ray following on every vertex of the ball."""
    t0 = time.perf_counter()
    bad = []
    steps_max = 0
    for k, v in enumerate(ball.vertices):
        for i in (1, 2):
            via_ray, steps = projection_pi_ray(i, v)
            steps_max = max(steps_max, steps)
            if via_ray != projection_pi(i, v):
                bad.append({"index": k, "i": i, "basis": v.to_strings()})
    return VerificationReport(
        "building.projection_agreement",
        {"p": ball.p, "radius": ball.radius},
        not bad,
        {"vertices": len(ball.vertices), "mismatches": len(bad), "max_steps_to_parallel_set": steps_max},
        bad[:5],
        int(1000 * (time.perf_counter() - t0)),
    )


def x_delta_consistency(ball: BuildingBall) -> VerificationReport:
    """Constructive marks vs the splitting oracle, F0 and P(s_i) inclusion, X_Delta != X."""
    t0 = time.perf_counter()
    oracle = [in_x_delta_oracle(v) for v in ball.vertices]
    mismatch = [k for k, (a, b) in enumerate(zip(ball.in_x_delta, oracle)) if a != b]
    f0 = [k for k, v in enumerate(ball.vertices) if v.upper == (0, 0, 0)]
    f0_marked = all(ball.in_x_delta[k] for k in f0)
    par = [k for k, v in enumerate(ball.vertices) if in_parallel_set(1, v) or in_parallel_set(2, v)]
    par_marked = all(ball.in_x_delta[k] for k in par)
    unmarked = [k for k, m in enumerate(ball.in_x_delta) if not m]
    proper = bool(unmarked) or ball.radius < 2
    wit = [{"kind": "unmarked", "index": unmarked[0], "basis": ball.vertices[unmarked[0]].to_strings()}] if unmarked else []
    wit += [{"kind": "mismatch", "index": k, "basis": ball.vertices[k].to_strings()} for k in mismatch[:3]]
    return VerificationReport(
        "building.x_delta",
        {"p": ball.p, "radius": ball.radius},
        not mismatch and f0_marked and par_marked and proper,
        {"marked": sum(ball.in_x_delta), "vertices": len(ball.vertices), "oracle_mismatches": len(mismatch),
         "apartment_vertices": len(f0), "parallel_set_vertices": len(par), "unmarked": len(unmarked)},
        wit,
        int(1000 * (time.perf_counter() - t0)),
    )
