"""Projection-composition flow: oracles, invariants, flow maps."""
import math

import numpy as np
import pytest

from catflow import (
    EuclideanSpace,
    SphereSpace,
    constant_curve,
    flow_map,
    geodesic_curve,
    tractrix_flow,
    tractrix_flow_gradient,
)
from catflow.flows import nested_half_delta
from catflow.errors import PreconditionError, UsageError
from catflow.glued import ArcOnSphere, build_theorem1_space
from catflow.sampling import ball_pair_sampler, sphere_cap_point, stream
from catflow.tractrix import DrivingCurve, TractrixConfig


def test_one_dimensional_oracle():
    space = EuclideanSpace(1)
    gamma = DrivingCurve(space, (0.0, 5.0), lambda t: space.point([t]))
    traj = tractrix_flow(space, gamma, 1.0, 1e-3, space.point([0.0]))
    # the projection scheme reproduces max(0, t-1) to rounding
    worst = max(abs(float(p.coords[0]) - max(0.0, float(t) - 1.0))
                for t, p in zip(traj.times, traj.points))
    assert worst <= 1e-9


def test_stationary_curve_is_identity():
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    gamma = constant_curve(space, pole, (0.0, 1.0))
    start = space.point([0, math.sin(0.4), math.cos(0.4)])
    traj = tractrix_flow(space, gamma, 0.8, 1e-2, start)
    assert all(np.array_equal(p.coords, start.coords) for p in traj.points)


def test_precondition_initial_ball():
    space = EuclideanSpace(1)
    gamma = DrivingCurve(space, (0.0, 1.0), lambda t: space.point([t]))
    with pytest.raises(PreconditionError):
        tractrix_flow(space, gamma, 1.0, 1e-2, space.point([5.0]))
    with pytest.raises(UsageError):
        TractrixConfig(space, math.pi, 1e-2)  # r must be < pi


def test_ball_containment_invariant():
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    gamma = geodesic_curve(space, pole, space.point([1, 0, 0]))
    rng = stream(20, "containment")
    r = math.pi / 2
    for _ in range(5):
        q = sphere_cap_point(space, pole, r, rng)
        traj = tractrix_flow(space, gamma, r, 2e-3, q)
        for t, p in zip(traj.times, traj.points):
            assert space.distance(p, gamma.at(float(t))) <= r + 1e-9


def test_terminal_meridian_flow():
    """Equator start stays in the moving ball; terminal within r + 2 delta."""
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    equ = space.point([1, 0, 0])
    gamma = geodesic_curve(space, pole, equ)
    delta = 1e-3
    start = space.point([0, 1, 0])
    traj = tractrix_flow(space, gamma, math.pi / 2, delta, start)
    assert space.distance(traj.points[-1], equ) <= math.pi / 2 + 2 * delta
    finer = tractrix_flow(space, gamma, math.pi / 2, delta / 2, start)
    assert space.distance(traj.points[-1], finer.points[-1]) <= 10 * delta


def test_monotone_thread_in_decreasing_balls():
    """Once taut, the post-projection distance never exceeds r again."""
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    arc = ArcOnSphere.from_endpoints(space, pole, space.point([1, 0, 0]))
    glued, driving = build_theorem1_space(space, arc, pole, eps_k=math.pi / 100)
    gamma = DrivingCurve(glued, driving.interval, driving.at, label="driving")
    rng = stream(21, "monotone")
    r = math.pi / 2
    q = glued.point_u(sphere_cap_point(space, pole, r, rng))
    traj = tractrix_flow(glued, gamma, r, 0.02, q)
    taut = False
    for t, p in zip(traj.times, traj.points):
        ell, bound = glued.distance_with_bound(p, gamma.at(float(t)))
        if taut:
            # approximate backend: the evaluation itself carries the gate
            # error bound, so containment is certified up to that bound
            assert ell <= r + bound
        if ell >= r - 1e-12:
            taut = True


def test_prop4b_ball_points_fixed():
    """In the decreasing-ball setup, points of the final ball never move."""
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    arc = ArcOnSphere.from_endpoints(space, pole, space.point([1, 0, 0]))
    glued, driving = build_theorem1_space(space, arc, pole, eps_k=math.pi / 100)
    gamma = DrivingCurve(glued, driving.interval, driving.at, label="driving")
    delta = 5e-3
    j = glued.piece_j
    for tau, sig in ((0.3, 0.2), (1.2, 1.0), (math.pi / 2, 0.5)):
        start = glued.point_j(j.cone_point(j.left.point(sig), tau))
        traj = tractrix_flow(glued, gamma, math.pi / 2, delta, start)
        assert glued.distance(traj.points[-1], start) <= 2 * delta


def test_flow_map_identity_and_semigroup():
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    gamma = geodesic_curve(space, pole, space.point([1, 0, 0]))
    delta = 2e-3
    fm0 = flow_map(space, gamma, 0.9, delta, gamma.a)
    rng = stream(22, "semigroup")
    q = sphere_cap_point(space, pole, 0.9, rng)
    assert space.distance(fm0(q), q) <= 1e-12

    t1 = 0.7
    full = flow_map(space, gamma, 0.9, delta, gamma.b)
    first = flow_map(space, gamma, 0.9, delta, t1)
    mid = first(q)
    second = DrivingCurve(space, (t1, gamma.b), gamma.at)
    restart = tractrix_flow(space, second, 0.9, delta, mid)
    assert space.distance(full(q), restart.points[-1]) <= 10 * delta

    with pytest.raises(UsageError):
        flow_map(space, gamma, 0.9, delta, gamma.b + 1.0)


def test_gradient_scheme_agreement_line():
    space = EuclideanSpace(1)
    gamma = DrivingCurve(space, (0.0, 5.0), lambda t: space.point([t]))
    delta = 1e-3
    a = tractrix_flow(space, gamma, 1.0, delta, space.point([0.0]))
    b = tractrix_flow_gradient(space, gamma, 1.0, delta, space.point([0.0]))
    worst = max(space.distance(p, q) for p, q in zip(a.points, b.points))
    assert worst <= 4 * delta


def test_gradient_scheme_agreement_sphere():
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    gamma = geodesic_curve(space, pole, space.point([1, 0, 0]))
    delta = 1e-3
    rng = stream(23, "xscheme")
    worst = 0.0
    for _ in range(3):
        q = sphere_cap_point(space, pole, 0.75, rng)
        a = tractrix_flow(space, gamma, 0.8, delta, q)
        b = tractrix_flow_gradient(space, gamma, 0.8, delta, q)
        worst = max(worst, max(space.distance(p, s)
                               for p, s in zip(a.points, b.points)))
    assert worst <= 20 * delta


def test_refinement_order():
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    gamma = geodesic_curve(space, pole, space.point([1, 0, 0]))
    rng = stream(24, "order")
    probes = [sphere_cap_point(space, pole, 0.8, rng) for _ in range(4)]
    deltas = [2e-2, 1e-2, 5e-3]
    devs = []
    for dl in deltas:
        worst = 0.0
        for q in probes:
            coarse = tractrix_flow(space, gamma, 0.8, dl, q)
            fine = tractrix_flow(space, gamma, 0.8, nested_half_delta(coarse), q)
            n = len(coarse.points)
            for idx in (n // 2, n - 1):
                t = float(coarse.times[idx])
                worst = max(worst, space.distance(coarse.points[idx],
                                                  fine.point_at(t)))
        devs.append(worst)
    alpha = float(np.polyfit(np.log(deltas), np.log(devs), 1)[0])
    assert alpha >= 0.5


def test_driving_curve_lipschitz_check():
    space = EuclideanSpace(1)
    good = DrivingCurve(space, (0.0, 2.0), lambda t: space.point([t]))
    ratio = good.check_lipschitz(stream(25, "lip"))
    assert ratio <= 1.0 + 1e-12
    fast = DrivingCurve(space, (0.0, 2.0), lambda t: space.point([2.0 * t]))
    with pytest.raises(UsageError):
        fast.check_lipschitz(stream(25, "lip"))


def test_single_projection_contraction_pattern():
    """Below curvature one, a single closest-point projection onto the
    half-pi ball is short with contraction strengthening in displacement.

    At curvature exactly one this fails pointwise (pairs beyond the
    equator expand tangentially by 1/cos of their overshoot), which is
    why flow-level shortness there carries the collar-sized tolerance
    instead of following from per-step shortness.
    """
    from catflow.lipschitz import estimate_lipschitz
    space = SphereSpace(2, 1.2)
    w = space.point([0, 0, 1.2])
    rng = stream(26, "theta-proj")
    sampler = ball_pair_sampler(space, w, math.pi / 2 + 0.4)
    theta = lambda p: space.project_to_ball(w, math.pi / 2, p)
    rep = estimate_lipschitz(theta, sampler, space.distance, 2000, rng,
                             resolution=1e-4, bootstrap=100)
    assert rep.max_ratio <= 1.0 + 1e-9
    assert rep.epsilon_hat > 0.0
    assert rep.ci_low > 0.0

    # the documented unit-sphere counterexample
    unit = SphereSpace(2)
    w1 = unit.point([0, 0, 1])
    colat = math.pi / 2 + 0.4
    a = unit.point([math.sin(colat), 0.0, math.cos(colat)])
    b = unit.point([math.sin(colat) * math.cos(0.3), math.sin(colat) * math.sin(0.3),
                    math.cos(colat)])
    ta = unit.project_to_ball(w1, math.pi / 2, a)
    tb = unit.project_to_ball(w1, math.pi / 2, b)
    assert unit.distance(ta, tb) / unit.distance(a, b) > 1.05
