"""The thread-dragging flow: projection compositions behind a driving curve.

A point connected to the driving curve gamma by a taut thread of length r
is advanced by composing closest-point projections onto the moving ball
B(gamma(t_i), r) over a uniform partition.  This composition scheme is the
reference implementation; the gradient-flow realization (through the
ball-distance family) is a cross-check that needs exp/log on the backend.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import CapabilityError, PreconditionError, UsageError
from .families import ball_distance_family
from .flows import Trajectory, evolve, uniform_partition
from .spaces import EuclideanSpace, Point, Space, SphereSpace


@dataclass(frozen=True)
class DrivingCurve:
    """A 1-Lipschitz curve t -> Point on a closed interval."""

    space: Space
    interval: tuple
    at: Callable[[float], Point]
    label: str = "curve"

    @property
    def a(self) -> float:
        return self.interval[0]

    @property
    def b(self) -> float:
        return self.interval[1]

    def sample(self, ts: np.ndarray) -> list:
        return [self.at(float(t)) for t in ts]

    def check_lipschitz(self, rng, n: int = 64, tol: float = 1e-9) -> float:
        """Sampled 1-Lipschitz check; returns the worst ratio found.

        Raises UsageError when d(gamma(t1), gamma(t2)) exceeds |t1 - t2|
        beyond the tolerance on any sampled pair.
        """
        worst = 0.0
        a, b = self.interval
        for _ in range(n):
            t1, t2 = sorted(rng.uniform(a, b, size=2))
            if t2 - t1 < 1e-9:
                continue
            d = self.space.distance(self.at(float(t1)), self.at(float(t2)))
            worst = max(worst, d / (t2 - t1))
            if d > (t2 - t1) + tol:
                raise UsageError(
                    f"driving curve is not 1-Lipschitz: d={d} over gap {t2 - t1}")
        return worst


def constant_curve(space: Space, point: Point, interval=(0.0, 1.0)) -> DrivingCurve:
    return DrivingCurve(space, tuple(interval), lambda t: point, label="constant")


def geodesic_curve(space: Space, x: Point, y: Point,
                   length: Optional[float] = None) -> DrivingCurve:
    """Unit-speed geodesic from x toward y, on [0, length] (default d(x,y))."""
    d = space.distance(x, y)
    if d <= space.policy.coincide_tol:
        return constant_curve(space, x, (0.0, 0.0 if length is None else length))
    L = d if length is None else length
    if L > d + space.policy.abs_tol:
        raise UsageError("length beyond the geodesic endpoint is not supported")

    def at(t: float) -> Point:
        return space.geodesic_point(x, y, t / d)

    return DrivingCurve(space, (0.0, L), at, label="geodesic")


@dataclass(frozen=True)
class TractrixConfig:
    """Thread length, step and backend for one flow experiment."""

    space: Space
    r: float
    delta: float

    def __post_init__(self):
        if not (0.0 < self.r < math.pi):
            raise UsageError("thread length r must lie in (0, pi)")
        if self.delta <= 0:
            raise UsageError("delta must be positive")


def tractrix_flow(space: Space, gamma: DrivingCurve, r: float, delta: float,
                  p: Point) -> Trajectory:
    """Trajectory of p under the projection-composition scheme.

    Precondition: p starts in the closed ball B(gamma(a), r) (within the
    policy tolerance).  A projection failure (geodesic non-uniqueness)
    truncates the trajectory and records a diagnostic.
    """
    TractrixConfig(space, r, delta)
    d0 = space.distance(p, gamma.at(gamma.a))
    if d0 > r + space.policy.abs_tol:
        raise PreconditionError(
            f"initial point at distance {d0} > r = {r} from gamma(a)", witness=p)
    ts = uniform_partition(gamma.a, gamma.b, delta)
    step = float(ts[1] - ts[0]) if len(ts) > 1 else delta

    fast = _kernel_steps(space, gamma, r, ts, p)
    if fast is not None:
        return Trajectory(space, ts, fast, step)

    points = []
    x = p
    for t in ts:
        try:
            x = space.project_to_ball(gamma.at(float(t)), r, x)
        except PreconditionError as exc:
            return Trajectory(space, ts, points, step, escaped=True,
                              diagnostic=f"projection failed at t={t}: {exc}")
        points.append(x)
    return Trajectory(space, ts, points, step)


def _kernel_steps(space: Space, gamma: DrivingCurve, r: float, ts: np.ndarray,
                  p: Point) -> Optional[list]:
    if isinstance(space, SphereSpace):
        gxyz = np.array([g.coords for g in gamma.sample(ts)])
        traj = _kernels.sphere_tractrix(gxyz, np.asarray(p.coords, dtype=float),
                                        r, space.radius)
        return [space.point(row, normalize=True) for row in traj]
    if isinstance(space, EuclideanSpace):
        gxyz = np.array([g.coords for g in gamma.sample(ts)])
        traj = _kernels.euclidean_tractrix(gxyz, np.asarray(p.coords, dtype=float), r)
        return [space.point(row) for row in traj]
    return None


def tractrix_flow_gradient(space: Space, gamma: DrivingCurve, r: float,
                           delta: float, p: Point, collar: float = 1e-2,
                           lam: Optional[float] = None) -> Trajectory:
    """Gradient-flow realization through the ball-distance family.

    Needs exp/log on the backend; the collar is widened to a few steps so
    the chattering discrete flow stays inside the family's domain.
    """
    if not space.has_exp_log:
        raise CapabilityError(f"{space.kind} backend has no exp/log for the gradient scheme")
    collar = max(collar, 8.0 * delta)
    family = ball_distance_family(space, gamma.at, r, collar=collar, lam=lam)
    return evolve(family, p, (gamma.a, gamma.b), delta)


@dataclass
class FlowMap:
    """phi_t as a point-to-point map, with its trajectory generator.

    Caches the sampled driving curve so repeated evaluations (Monte-Carlo
    studies) do not re-evaluate gamma.
    """

    space: Space
    gamma: DrivingCurve
    r: float
    delta: float
    t_end: float
    _ts: np.ndarray = field(init=False, repr=False)
    _gamma_xyz: Optional[np.ndarray] = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if not (self.gamma.a - 1e-12 <= self.t_end <= self.gamma.b + 1e-12):
            raise UsageError(f"t={self.t_end} outside the curve interval {self.gamma.interval}")
        self._ts = uniform_partition(self.gamma.a, self.t_end, self.delta)
        if isinstance(self.space, (SphereSpace, EuclideanSpace)):
            self._gamma_xyz = np.array([g.coords for g in self.gamma.sample(self._ts)])

    def __call__(self, p: Point) -> Point:
        rows = self._kernel_rows(p)
        if rows is None:
            return self.trajectory(p).points[-1]
        if isinstance(self.space, SphereSpace):
            return self.space.point(rows[-1], normalize=True)
        return self.space.point(rows[-1])

    def _kernel_rows(self, p: Point) -> Optional[np.ndarray]:
        if self._gamma_xyz is None:
            return None
        d0 = self.space.distance(p, self.gamma.at(self.gamma.a))
        if d0 > self.r + self.space.policy.abs_tol:
            raise PreconditionError(
                f"point at distance {d0} > r = {self.r} from gamma(a)", witness=p)
        if isinstance(self.space, SphereSpace):
            return _kernels.sphere_tractrix(
                self._gamma_xyz, np.asarray(p.coords, dtype=float),
                self.r, self.space.radius)
        return _kernels.euclidean_tractrix(
            self._gamma_xyz, np.asarray(p.coords, dtype=float), self.r)

    def trajectory(self, p: Point) -> Trajectory:
        d0 = self.space.distance(p, self.gamma.at(self.gamma.a))
        if d0 > self.r + self.space.policy.abs_tol:
            raise PreconditionError(
                f"point at distance {d0} > r = {self.r} from gamma(a)", witness=p)
        step = float(self._ts[1] - self._ts[0]) if len(self._ts) > 1 else self.delta
        rows = self._kernel_rows(p)
        if rows is not None:
            if isinstance(self.space, SphereSpace):
                pts = [self.space.point(row, normalize=True) for row in rows]
            else:
                pts = [self.space.point(row) for row in rows]
            return Trajectory(self.space, self._ts, pts, step)
        sub = DrivingCurve(self.space, (self.gamma.a, self.t_end), self.gamma.at,
                           label=self.gamma.label)
        return tractrix_flow(self.space, sub, self.r, self.delta, p)


def flow_map(space: Space, gamma: DrivingCurve, r: float, delta: float,
             t: float) -> FlowMap:
    """The map phi_t packaged as a closure over the truncated flow."""
    return FlowMap(space, gamma, r, delta, t)
