"""The glued sphere-plus-cone space: distances, projections, oracles."""
import math

import numpy as np
import pytest

from catflow import SphereSpace, build_theorem1_space, net_graph_distance
from catflow.errors import PreconditionError
from catflow.glued import (
    ArcOnSphere,
    CrossingPolicy,
    GluedSpace,
    glued_from_gate_csv,
    save_gates_csv,
)
from catflow.sampling import sphere_cap_point, stream


@pytest.fixture(scope="module")
def setup():
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    arc = ArcOnSphere.from_endpoints(space, pole, space.point([1, 0, 0]))
    glued, driving = build_theorem1_space(space, arc, pole, eps_k=math.pi / 100)
    return space, pole, arc, glued, driving


def brute_force_cross_distance(space, arc, glued, x_u, tau, sigma_y, n=20001):
    """Independent oracle: dense minimization of the crossing formula."""
    sigmas = np.linspace(0.0, arc.length, n)
    best = math.inf
    for s in sigmas:
        g = arc.point_at(float(s))
        du = space.distance(x_u, g)
        arg = min(1.0, max(-1.0, math.sin(tau) * math.cos(abs(s - sigma_y))))
        dj = math.acos(arg)
        best = min(best, du + dj)
    return best


def test_gate_count_and_isometry(setup):
    space, pole, arc, glued, driving = setup
    eps = math.pi / 100
    assert glued.n_gates == int(math.ceil(arc.length / eps)) + 1
    for i in range(0, glued.n_gates, 7):
        for j in range(0, glued.n_gates, 11):
            du = space.distance(glued.gates_u[i], glued.gates_u[j])
            dj = glued.piece_j.distance(glued.gates_j[i], glued.gates_j[j])
            assert abs(du - dj) <= 1e-9


def test_interface_distances(setup):
    space, pole, arc, glued, driving = setup
    # gate-to-gate across pieces recovers the interface metric
    i, j = 10, 40
    d, bound = glued.distance_with_bound(glued.point_u(glued.gates_u[i]),
                                         glued.point_j(glued.gates_j[j]))
    want = abs(glued.gate_sigmas[i] - glued.gate_sigmas[j])
    assert d == pytest.approx(want, abs=1e-9)
    # p to the tip is exactly pi/2
    d_tip = glued.distance(glued.point_u(pole), glued.tip)
    assert d_tip == pytest.approx(math.pi / 2, abs=1e-9)


def test_same_piece_equals_intrinsic(setup):
    space, pole, arc, glued, driving = setup
    rng = stream(30, "piece")
    for _ in range(20):
        x = sphere_cap_point(space, pole, math.pi / 2, rng)
        y = sphere_cap_point(space, pole, math.pi / 2, rng)
        d, _ = glued.distance_with_bound(glued.point_u(x), glued.point_u(y))
        assert d == pytest.approx(space.distance(x, y), abs=1e-12)
        assert d <= space.distance(x, y) + 1e-12


def test_driving_geodesic_unit_speed(setup):
    space, pole, arc, glued, driving = setup
    for t1, t2 in ((0.0, 0.4), (0.3, 1.1), (1.2, math.pi / 2)):
        d = glued.distance(driving.at(t1), driving.at(t2))
        assert d == pytest.approx(abs(t2 - t1), abs=1e-9)


def test_cross_distance_vs_brute_force(setup):
    space, pole, arc, glued, driving = setup
    rng = stream(31, "brute")
    for _ in range(6):
        x = sphere_cap_point(space, pole, math.pi / 2, rng)
        t = float(rng.uniform(0.1, math.pi / 2))
        y = driving.at(t)
        d, bound = glued.distance_with_bound(glued.point_u(x), y)
        oracle = brute_force_cross_distance(space, arc, glued, x,
                                            math.pi / 2 - t, driving.sigma_p)
        assert d == pytest.approx(oracle, abs=1e-6)


def test_cross_distance_vs_net_graph(setup):
    space, pole, arc, glued, driving = setup
    rng = stream(32, "net")
    x = glued.point_u(sphere_cap_point(space, pole, 1.2, rng))
    y = driving.at(0.9)
    d, _ = glued.distance_with_bound(x, y)
    net = net_graph_distance(glued, x, y, n_sphere=900, n_sigma=48, n_tau=16,
                             radius=0.3)
    # the net overestimates by O(net spacing)
    assert net >= d - 1e-6
    assert net <= d + 0.08


def test_decreasing_balls(setup):
    space, pole, arc, glued, driving = setup
    rng = stream(33, "balls")
    r = math.pi / 2
    eps = glued.eps_k
    for _ in range(10):
        x = glued.point_u(sphere_cap_point(space, pole, math.pi / 2, rng))
        t1, t2 = sorted(rng.uniform(0.0, math.pi / 2, size=2))
        if glued.distance(x, driving.at(float(t2))) <= r:
            assert glued.distance(x, driving.at(float(t1))) <= r + 2 * eps


def test_project_to_ball(setup):
    space, pole, arc, glued, driving = setup
    rng = stream(34, "project")
    r = 1.1
    center = driving.at(0.8)
    for _ in range(10):
        x = glued.point_u(sphere_cap_point(space, pole, math.pi / 2, rng))
        d0, bound = glued.distance_with_bound(x, center)
        out = glued.project_to_ball(center, r, x)
        if d0 <= r:
            assert out is x
        else:
            d1, _ = glued.distance_with_bound(out, center)
            assert abs(d1 - r) <= 2 * glued.eps_k
    # a K point at distance exactly pi/2 from the tip stays fixed
    k_pt = glued.point_u(glued.gates_u[20])
    assert glued.project_to_ball(glued.tip, math.pi / 2, k_pt) is k_pt


def test_theorem1_build_guards():
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    # an arc that leaves the pi/2 ball around p violates the hypothesis
    equ = space.point([1, 0, 0])
    far = ArcOnSphere(space, equ, np.array([0.0, 0.0, -1.0]), 2.0)
    with pytest.raises(PreconditionError):
        build_theorem1_space(space, far, pole)
    # kappa = 1 requires the base point on K
    short_arc = ArcOnSphere.from_endpoints(space, equ, space.point([0, 1, 0]))
    with pytest.raises(PreconditionError):
        build_theorem1_space(space, short_arc, pole)


def test_singleton_k():
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    arc = ArcOnSphere.singleton(space, pole)
    glued, driving = build_theorem1_space(space, arc, pole)
    assert glued.n_gates == 1
    assert glued.distance(glued.point_u(pole), glued.tip) == pytest.approx(
        math.pi / 2, abs=1e-9)


def test_mesh_halving_and_relaxation(setup):
    space, pole, arc, glued, driving = setup
    rng = stream(35, "mesh")
    eps = math.pi / 100

    def build(eps_k, relax=False):
        w, geo = build_theorem1_space(space, arc, pole, eps_k=eps_k,
                                      crossing_policy=CrossingPolicy(relax=relax))
        return GluedSpace(w.piece_u, w.piece_j, w.gates_u, w.gates_j,
                          w.gate_sigmas, w.eps_k, crossing_policy=w.crossing_policy,
                          arc=None, policy=w.policy), geo

    w1, g1 = build(eps)
    w2, g2 = build(eps / 2)
    wr, gr = build(eps, relax=True)
    for _ in range(8):
        x = sphere_cap_point(space, pole, math.pi / 2, rng)
        t = float(rng.uniform(0.2, 1.4))
        d1 = w1.distance(w1.point_u(x), g1.at(t))
        d2 = w2.distance(w2.point_u(x), g2.at(t))
        dr = wr.distance(wr.point_u(x), gr.at(t))
        assert abs(d1 - d2) <= 5 * eps
        assert abs(d1 - dr) <= 10 * eps


def test_gate_csv_roundtrip(tmp_path, setup):
    space, pole, arc, glued, driving = setup
    path = tmp_path / "gates.csv"
    save_gates_csv(path, glued)
    rebuilt = glued_from_gate_csv(path, space)
    assert rebuilt.n_gates == glued.n_gates
    rng = stream(36, "csv")
    for _ in range(5):
        x = sphere_cap_point(space, pole, math.pi / 2, rng)
        t = float(rng.uniform(0.2, 1.4))
        a = glued.distance(glued.point_u(x), driving.at(t))
        j2 = rebuilt.piece_j
        y2 = rebuilt.point_j(j2.cone_point(j2.left.point(driving.sigma_p),
                                           math.pi / 2 - t))
        b = rebuilt.distance(rebuilt.point_u(x), y2)
        # the rebuilt space lacks the arc refinement; gates alone match to eps
        assert abs(a - b) <= rebuilt.eps_k


def test_glued_has_no_exp_log(setup):
    space, pole, arc, glued, driving = setup
    from catflow.errors import CapabilityError
    from catflow import tractrix_flow_gradient
    from catflow.tractrix import DrivingCurve
    x = glued.point_u(pole)
    with pytest.raises(CapabilityError):
        glued.log_map(x, glued.tip)
    gamma = DrivingCurve(glued, driving.interval, driving.at)
    with pytest.raises(CapabilityError):
        tractrix_flow_gradient(glued, gamma, math.pi / 2, 1e-2, x)


def test_glued_triangle_inequality(setup):
    """Sampled triangle inequality with the approximate-backend allowance."""
    space, pole, arc, glued, driving = setup
    rng = stream(37, "triangle")
    pts = []
    for _ in range(12):
        pts.append(glued.point_u(sphere_cap_point(space, pole, math.pi / 2, rng)))
    for t in rng.uniform(0.0, math.pi / 2, size=6):
        pts.append(driving.at(float(t)))
    for _ in range(60):
        x, y, z = (pts[int(i)] for i in rng.integers(0, len(pts), size=3))
        dxz, bxz = glued.distance_with_bound(x, z)
        dxy, _ = glued.distance_with_bound(x, y)
        dyz, _ = glued.distance_with_bound(y, z)
        assert dxz <= dxy + dyz + 2 * bxz + 1e-9


def test_gate_tie_warning():
    """Two equidistant, far-apart gates trigger the ambiguity warning."""
    from catflow.joins import spherical_cone
    from catflow.spaces import IntervalSpace
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    equ = space.point([1, 0, 0])
    base = IntervalSpace(math.pi / 2)
    cone = spherical_cone(base)
    gates_u = [pole, equ]
    gates_j = [cone.cone_point(base.point(0.0), math.pi / 2),
               cone.cone_point(base.point(math.pi / 2), math.pi / 2)]
    w = GluedSpace(space, cone, gates_u, gates_j, [0.0, math.pi / 2],
                   eps_k=0.1, arc=None)
    # the bisector point is equidistant from both gates
    x = w.point_u(space.point([math.sin(math.pi / 4), 0.0, math.cos(math.pi / 4)]))
    w.project_to_ball(w.tip, 1.0, x)
    assert any("tie" in msg for msg in w.warnings)
