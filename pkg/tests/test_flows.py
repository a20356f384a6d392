"""Gradient-flow engine: oracles, defining inequality, distance estimates."""
import math

import numpy as np
import pytest

from catflow import (
    EuclideanSpace,
    SphereSpace,
    Trajectory,
    check_evi,
    distance_estimate_bound,
    evolve,
    geodesic_curve,
    verify_distance_estimate,
)
from catflow.errors import CapabilityError
from catflow.families import TimeDependentFamily, ball_distance_family, quadratic_family
from catflow.sampling import sphere_cap_point, stream
from catflow.tractrix import DrivingCurve


def line_family(r=1.0):
    space = EuclideanSpace(1)
    gamma = DrivingCurve(space, (0.0, 10.0), lambda t: space.point([t]))
    return space, gamma, ball_distance_family(space, gamma.at, r)


def test_gradient_cases():
    space, gamma, fam = line_family()
    inside = fam.gradient(0.0, space.point([0.5]))
    assert inside.magnitude == 0.0
    outside = fam.gradient(0.0, space.point([3.0]))
    assert outside.magnitude == 1.0
    assert float(outside.direction[0]) == -1.0  # toward gamma(0) = 0

    e3 = EuclideanSpace(3)
    quad = quadratic_family(e3, e3.point([0, 0, 0]))
    g = quad.gradient(0.0, e3.point([0.3, -0.4, 0.0]))
    vec = g.magnitude * np.asarray(g.direction)
    assert np.allclose(vec, [-0.3, 0.4, 0.0], atol=1e-15)


def test_evolve_quadratic_oracle():
    """Linear ODE: alpha(t) = p0 exp(-t), Euler error O(delta)."""
    e3 = EuclideanSpace(3)
    quad = quadratic_family(e3, e3.point([0, 0, 0]))
    p0 = e3.point([1.0, -2.0, 0.5])
    traj = evolve(quad, p0, (0.0, 1.0), 1e-4)
    want = np.asarray(p0.coords) * math.exp(-1.0)
    assert np.linalg.norm(np.asarray(traj.points[-1].coords) - want) <= 1e-4


def test_evolve_tractrix_oracle_chatter():
    """The frozen scheme chases max(0, t - 1) within 2 delta at any delta."""
    space, gamma, fam = line_family()
    for delta in (1e-2, 5e-3, 2.5e-3):
        traj = evolve(fam, space.point([0.0]), (0.0, 5.0), delta)
        worst = max(abs(float(p.coords[0]) - max(0.0, float(t) - 1.0))
                    for t, p in zip(traj.times, traj.points))
        assert worst <= 2 * delta


def test_evolve_stationary_at_max():
    e1 = EuclideanSpace(1)
    quad = quadratic_family(e1, e1.point([0.0]))
    traj = evolve(quad, e1.point([0.0]), (0.0, 1.0), 1e-2)
    assert all(float(p.coords[0]) == 0.0 for p in traj.points)


def test_evolve_escape_recorded():
    e1 = EuclideanSpace(1)
    base = quadratic_family(e1, e1.point([10.0]))  # drives points to the right
    fam = TimeDependentFamily(
        space=e1, evaluate=base.evaluate, lam=base.lam, lipschitz_L=base.lipschitz_L,
        gradient_oracle=base.gradient_oracle,
        contains=lambda t, p: float(p.coords[0]) < 0.5, label="escaping")
    traj = evolve(fam, e1.point([0.0]), (0.0, 1.0), 1e-2)
    assert traj.escaped
    assert "escaped" in traj.diagnostic
    assert len(traj.points) < 102


def test_evolve_bitwise_deterministic():
    space, gamma, fam = line_family()
    a = evolve(fam, space.point([0.2]), (0.0, 3.0), 1e-3)
    b = evolve(fam, space.point([0.2]), (0.0, 3.0), 1e-3)
    assert all(np.array_equal(p.coords, q.coords) for p, q in zip(a.points, b.points))


def test_trajectory_l_lipschitz_in_time():
    space, gamma, fam = line_family()
    traj = evolve(fam, space.point([0.0]), (0.0, 4.0), 1e-3)
    for i in range(len(traj.points) - 1):
        step = float(traj.times[i + 1] - traj.times[i])
        assert space.distance(traj.points[i], traj.points[i + 1]) <= \
            fam.lipschitz_L * step + 1e-12


def test_nonexpansion_lambda_zero():
    space, gamma, fam = line_family()
    delta = 1e-3
    a = evolve(fam, space.point([0.0]), (0.0, 4.0), delta)
    b = evolve(fam, space.point([-0.7]), (0.0, 4.0), delta)
    d0 = 0.7
    worst = max(space.distance(p, q) for p, q in zip(a.points, b.points))
    assert worst <= d0 + 5 * delta


def test_scheme_cauchy_order():
    """Halving the step changes the flow by O(delta^alpha), alpha >= 0.5."""
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    gamma = geodesic_curve(space, pole, space.point([1, 0, 0]))
    fam = ball_distance_family(space, gamma.at, 0.8, collar=0.3)
    rng = stream(12, "cauchy")
    probes = [sphere_cap_point(space, pole, 0.8, rng) for _ in range(3)]
    deltas = [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4]
    devs = []
    for dl in deltas:
        worst = 0.0
        for q in probes:
            ta = evolve(fam, q, (0.0, gamma.b), dl)
            tb = evolve(fam, q, (0.0, gamma.b), dl / 2)
            n = len(ta.points)
            for idx in (n // 2, n - 1):
                t = float(ta.times[idx])
                worst = max(worst, space.distance(ta.points[idx], tb.point_at(t)))
        devs.append(worst)
    alpha = float(np.polyfit(np.log(deltas), np.log(devs), 1)[0])
    assert alpha >= 0.5


def test_check_evi_closed_form_and_controls():
    space, gamma, fam = line_family()
    delta = 1e-3
    traj = evolve(fam, space.point([0.0]), (0.0, 2.5), delta)
    witnesses = [space.point([v]) for v in (-1.0, 2.0, 5.0)]
    tol = 25 * delta
    rep = check_evi(traj, fam, witnesses, tol)
    assert rep.passed
    assert rep.worst_slack >= -tol

    # constant trajectory at the maximum of a quadratic
    e1 = EuclideanSpace(1)
    quad = quadratic_family(e1, e1.point([0.0]))
    const = evolve(quad, e1.point([0.0]), (0.0, 1.0), 1e-2)
    rep2 = check_evi(const, quad, [e1.point([2.0])], 1e-6)
    assert rep2.passed

    # corrupting one point by 10 delta must be flagged
    pts = list(traj.points)
    k = len(pts) // 2
    pts[k] = space.point(np.asarray(pts[k].coords) + 10 * delta)
    bad = Trajectory(space, traj.times, pts, traj.delta)
    rep3 = check_evi(bad, fam, witnesses, tol)
    assert not rep3.passed
    assert rep3.violations > 0


def test_distance_estimate_bound_values():
    assert distance_estimate_bound(0.0, 0.0, 1.3, 2.0) == pytest.approx(1.3)
    assert distance_estimate_bound(-1.0, 0.0, 1.0, 1.0) == pytest.approx(math.exp(-1.0))
    # lam != 0, s > 0: direct formula transcription
    lam, s, ell, dt = -1.0, 0.1, 0.5, 0.7
    want = math.sqrt((ell**2 + 2 * s / lam) * math.exp(2 * lam * dt) - 2 * s / lam)
    assert distance_estimate_bound(lam, s, ell, dt) == pytest.approx(want, rel=1e-15)
    # lam = 0 with s > 0 is the flagged integrated extension
    with pytest.warns(RuntimeWarning):
        got = distance_estimate_bound(0.0, 0.2, 1.0, 3.0)
    assert got == pytest.approx(math.sqrt(1.0 + 4 * 0.2 * 3.0))


def test_verify_distance_estimate_identical_and_sphere():
    e3 = EuclideanSpace(3)
    quad = quadratic_family(e3, e3.point([0, 0, 0]))
    p0 = e3.point([0.4, 0.1, 0.0])
    ta = evolve(quad, p0, (0.0, 1.0), 1e-3)
    rep = verify_distance_estimate(ta, ta, lam=-1.0, s=0.0)
    assert rep.passed

    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    gamma = geodesic_curve(space, pole, space.point([1, 0, 0]))
    lam = space.builtin_family_concavity(math.pi / 2)
    fam = ball_distance_family(space, gamma.at, math.pi / 2)
    rng = stream(13, "dist-est")
    a0 = sphere_cap_point(space, pole, 1.2, rng)
    b0 = sphere_cap_point(space, pole, 1.2, rng)
    excesses = []
    for delta in (4e-3, 2e-3):
        ta = evolve(fam, a0, (0.0, gamma.b), delta)
        tb = evolve(fam, b0, (0.0, gamma.b), delta)
        rep = verify_distance_estimate(ta, tb, lam=lam, s=0.0, c_delta=5.0)
        assert rep.passed
        excesses.append(max(rep.worst_excess, 0.0))
    # slack shrinks (or stays) as the step halves
    assert excesses[1] <= excesses[0] + 1e-9


def test_verify_distance_estimate_shifted_family():
    e3 = EuclideanSpace(3)
    fam_f = quadratic_family(e3, e3.point([0.0, 0.0, 0.0]))
    fam_h = quadratic_family(e3, e3.point([0.1, 0.0, 0.0]))
    delta = 1e-4
    ta = evolve(fam_f, e3.point([0.5, 0.0, 0.0]), (0.0, 1.0), delta)
    tb = evolve(fam_h, e3.point([0.0, 0.5, 0.0]), (0.0, 1.0), delta)
    rep = verify_distance_estimate(ta, tb, lam=-1.0, s=0.1, c_delta=5.0)
    assert rep.passed


def test_family_without_oracle():
    e1 = EuclideanSpace(1)
    fam = TimeDependentFamily(space=e1, evaluate=lambda t, p: 0.0, lam=0.0,
                              lipschitz_L=1.0)
    with pytest.raises(CapabilityError):
        fam.gradient(0.0, e1.point([0.0]))
    # mid-flow gradient failure truncates with a diagnostic instead of raising
    traj = evolve(fam, e1.point([0.0]), (0.0, 0.1), 1e-2)
    assert traj.escaped
    assert "gradient failure" in traj.diagnostic


def test_gradient_zero_thread_at_curve_point():
    """r = 0: the gradient at the curve point itself is the zero vector."""
    from catflow import EuclideanSpace
    from catflow.families import ball_distance_family
    from catflow.tractrix import DrivingCurve
    space = EuclideanSpace(1)
    gamma = DrivingCurve(space, (0.0, 1.0), lambda t: space.point([t]))
    fam = ball_distance_family(space, gamma.at, 0.0)
    g = fam.gradient(0.5, space.point([0.5]))
    assert g.magnitude == 0.0
