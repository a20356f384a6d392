"""Cones, spherical joins and scaled products over base spaces.

The spherical join of U and V carries the angle metric

    arccos[ sin(t1) sin(t2) cos d_U(u1,u2) + cos(t1) cos(t2) cos d_V(v1,v2) ]

for points written (u, v, t) with t in [0, pi/2]; t = 0 collapses to the
V-factor and t = pi/2 to the U-factor.  The spherical cone over K is the
join of K with a one-point space: its parameter runs from the tip (t = 0)
to the base slice (t = pi/2), so the tip-to-point distance is t itself.

Geodesics are provided where a closed form exists: joins of unit spheres
through the great-sphere realization (sin t * u, cos t * v), and cones
over intervals through unfolding into a planar / spherical sector.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import CapabilityError, UsageError
from .policy import DEFAULT_POLICY, NumericPolicy
from .spaces import IntervalSpace, Point, PointSpace, Space, SphereSpace, safe_arccos


def _check_base_diameter(space: Space, name: str) -> None:
    if space.diameter_bound > math.pi + space.policy.abs_tol:
        raise UsageError(f"{name} must have diameter <= pi, got {space.diameter_bound}")


class EuclideanConeSpace(Space):
    """Euclidean cone over a base of diameter <= pi.

    Points are (radius, base_point) with the tip written (0, None); the
    metric is the law of cosines with angle min(pi, d_base).
    """

    kind = "euclidean-cone"
    curvature_bound_kappa = 0.0

    def __init__(self, base: Space, policy: NumericPolicy = DEFAULT_POLICY):
        super().__init__(policy)
        _check_base_diameter(base, "cone base")
        self.base = base

    @property
    def space_id(self) -> str:
        return f"cone[{self.base.space_id}]"

    @property
    def tip(self) -> Point:
        return Point(self.space_id, (0.0, None))

    def point(self, radius: float, base_point: Optional[Point]) -> Point:
        if radius < 0:
            raise UsageError("cone radius must be nonnegative")
        if radius == 0.0:
            return self.tip
        if base_point is None:
            raise UsageError("nonzero cone radius needs a base point")
        self.base.check_owns(base_point)
        return Point(self.space_id, (float(radius), base_point))

    def distance(self, x: Point, y: Point) -> float:
        self.check_owns(x, y)
        t1, u1 = x.coords
        t2, u2 = y.coords
        if t1 == 0.0 or t2 == 0.0:
            return abs(t1 - t2)
        ang = min(math.pi, self.base.distance(u1, u2))
        d2 = t1 * t1 + t2 * t2 - 2.0 * t1 * t2 * math.cos(ang)
        return math.sqrt(max(0.0, d2))

    def geodesic_point(self, x: Point, y: Point, s: float) -> Point:
        """Geodesic via unfolding; only interval bases admit one here."""
        self.check_owns(x, y)
        if not isinstance(self.base, IntervalSpace):
            raise CapabilityError("cone geodesics are implemented only over interval bases")
        p1 = self._unfold(x)
        p2 = self._unfold(y)
        w = (1.0 - s) * p1 + s * p2
        return self._fold(w)

    def _unfold(self, x: Point) -> np.ndarray:
        t, u = x.coords
        sigma = 0.0 if u is None else float(u.coords)
        return np.array([t * math.cos(sigma), t * math.sin(sigma)])

    def _fold(self, w: np.ndarray) -> Point:
        rho = float(np.hypot(w[0], w[1]))
        if rho <= self.policy.coincide_tol:
            return self.tip
        sigma = math.atan2(w[1], w[0])
        sigma = min(max(sigma, 0.0), self.base.length)
        return self.point(rho, self.base.point(sigma))


class SphericalJoinSpace(Space):
    """Spherical join U * V of two spaces of diameter <= pi."""

    kind = "spherical-join"
    curvature_bound_kappa = 1.0
    diameter_bound = math.pi

    def __init__(self, left: Space, right: Space, policy: NumericPolicy = DEFAULT_POLICY):
        super().__init__(policy)
        _check_base_diameter(left, "left join factor")
        _check_base_diameter(right, "right join factor")
        self.left = left
        self.right = right

    @property
    def space_id(self) -> str:
        return f"join[{self.left.space_id}|{self.right.space_id}]"

    @property
    def uniqueness_radius(self) -> float:
        return math.pi

    def point(self, u: Optional[Point], v: Optional[Point], t: float) -> Point:
        if t < -self.policy.coord_tol or t > math.pi / 2 + self.policy.coord_tol:
            raise UsageError(f"join parameter t={t} outside [0, pi/2]")
        t = min(max(float(t), 0.0), math.pi / 2)
        if u is None:
            if t > 0.0:
                raise UsageError("u may be omitted only at t=0")
        else:
            self.left.check_owns(u)
        if v is None:
            if t < math.pi / 2:
                raise UsageError("v may be omitted only at t=pi/2")
        else:
            self.right.check_owns(v)
        return Point(self.space_id, (u, v, t))

    # embed is the map iota(u, v, t) from the product onto the join
    def embed(self, u: Point, v: Point, t: float) -> Point:
        return self.point(u, v, t)

    def distance(self, x: Point, y: Point) -> float:
        self.check_owns(x, y)
        u1, v1, t1 = x.coords
        u2, v2, t2 = y.coords
        su = math.sin(t1) * math.sin(t2)
        cv = math.cos(t1) * math.cos(t2)
        # an omitted factor coordinate forces its weight to exact zero
        # (cos(pi/2) is only zero up to rounding)
        if u1 is None or u2 is None:
            su = 0.0
        if v1 is None or v2 is None:
            cv = 0.0
        arg = 0.0
        if su != 0.0:
            du = self.left.distance(u1, u2)
            if du > math.pi + self.policy.abs_tol:
                raise UsageError(f"left factor distance {du} exceeds pi")
            arg += su * math.cos(du)
        if cv != 0.0:
            dv = self.right.distance(v1, v2)
            if dv > math.pi + self.policy.abs_tol:
                raise UsageError(f"right factor distance {dv} exceeds pi")
            arg += cv * math.cos(dv)
        return safe_arccos(arg, self.policy)

    # -- geodesics ------------------------------------------------------------
    def geodesic_point(self, x: Point, y: Point, s: float) -> Point:
        d = self.distance(x, y)
        if d <= self.policy.coincide_tol:
            return x
        self._check_unique(d)
        if self._is_unit_sphere_join():
            wx = self._sphere_embed(x)
            wy = self._sphere_embed(y)
            theta = d
            w = (math.sin((1.0 - s) * theta) * wx + math.sin(s * theta) * wy) / math.sin(theta)
            return self._sphere_split(w)
        if self._is_interval_cone():
            wx = self._sector_embed(x)
            wy = self._sector_embed(y)
            theta = d
            w = (math.sin((1.0 - s) * theta) * wx + math.sin(s * theta) * wy) / math.sin(theta)
            return self._sector_split(w)
        raise CapabilityError(
            "join geodesics exist only for unit-sphere factors or cones over intervals"
        )

    def _is_unit_sphere_join(self) -> bool:
        return (
            isinstance(self.left, SphereSpace)
            and isinstance(self.right, SphereSpace)
            and self.left.radius == 1.0
            and self.right.radius == 1.0
        )

    def _is_interval_cone(self) -> bool:
        return isinstance(self.left, IntervalSpace) and isinstance(self.right, PointSpace)

    def _sphere_embed(self, x: Point) -> np.ndarray:
        u, v, t = x.coords
        nu = self.left.dim + 1
        nv = self.right.dim + 1
        w = np.zeros(nu + nv)
        if u is not None:
            w[:nu] = math.sin(t) * u.coords
        if v is not None:
            w[nu:] = math.cos(t) * v.coords
        return w

    def _sphere_split(self, w: np.ndarray) -> Point:
        nu = self.left.dim + 1
        wu = w[:nu]
        wv = w[nu:]
        su = float(np.linalg.norm(wu))
        cv = float(np.linalg.norm(wv))
        if su <= self.policy.coincide_tol:
            return self.point(None, self.right.point(wv, normalize=True), 0.0)
        if cv <= self.policy.coincide_tol:
            return self.point(self.left.point(wu, normalize=True), None, math.pi / 2)
        t = math.atan2(su, cv)
        u = self.left.point(wu, normalize=True)
        v = self.right.point(wv, normalize=True)
        return self.point(u, v, t)

    def _sector_embed(self, x: Point) -> np.ndarray:
        u, _, t = x.coords
        sigma = 0.0 if u is None else float(u.coords)
        return np.array([math.sin(t) * math.cos(sigma), math.sin(t) * math.sin(sigma), math.cos(t)])

    def _sector_split(self, w: np.ndarray) -> Point:
        w = w / np.linalg.norm(w)
        t = safe_arccos(float(w[2]), self.policy)
        if t <= self.policy.coincide_tol:
            return self.point(None, self.right.point(), 0.0)
        sigma = math.atan2(float(w[1]), float(w[0]))
        sigma = min(max(sigma, 0.0), self.left.length)
        return self.point(self.left.point(sigma), self.right.point(), min(t, math.pi / 2))


class SphericalConeSpace(SphericalJoinSpace):
    """Spherical cone over K: the join K * {s} with tip at t = 0."""

    kind = "spherical-cone"

    def __init__(self, base: Space, policy: NumericPolicy = DEFAULT_POLICY):
        super().__init__(base, PointSpace(), policy=policy)

    @property
    def tip(self) -> Point:
        return self.point(None, self.right.point(), 0.0)

    def cone_point(self, u: Point, t: float) -> Point:
        """Point at distance t from the tip over base point u."""
        if t == 0.0:
            return self.tip
        return self.point(u, self.right.point(), t)


def spherical_cone(base: Space) -> SphericalConeSpace:
    """Join of `base` with a one-point space."""
    return SphericalConeSpace(base, policy=base.policy)


def join_distance(join: SphericalJoinSpace, x: Point, y: Point) -> float:
    return join.distance(x, y)


def join_embed(join: SphericalJoinSpace, u: Point, v: Point, t: float) -> Point:
    return join.embed(u, v, t)


def join_geodesic_point(join: SphericalJoinSpace, x: Point, y: Point, s: float) -> Point:
    """Constant-speed geodesic in the join (sphere factors or interval cones)."""
    return join.geodesic_point(x, y, s)


def cone_geodesic_point(cone: EuclideanConeSpace, x: Point, y: Point, s: float) -> Point:
    """Constant-speed geodesic in a Euclidean cone over an interval."""
    return cone.geodesic_point(x, y, s)


class ScaledProductSpace(Space):
    """c * (L x R): the l2 product metric scaled by a constant c > 0."""

    kind = "scaled-product"

    def __init__(self, left: Space, right: Space, scale: float = 1.0,
                 policy: NumericPolicy = DEFAULT_POLICY):
        super().__init__(policy)
        if scale <= 0:
            raise UsageError("scale must be positive")
        self.left = left
        self.right = right
        self.scale = scale

    @property
    def space_id(self) -> str:
        return f"product[{self.left.space_id}|{self.right.space_id}]*{self.scale!r}"

    @property
    def uniqueness_radius(self) -> float:
        # both components must stay uniquely geodesic
        return self.scale * min(self.left.uniqueness_radius, self.right.uniqueness_radius)

    def point(self, a: Point, b: Point) -> Point:
        self.left.check_owns(a)
        self.right.check_owns(b)
        return Point(self.space_id, (a, b))

    def distance(self, x: Point, y: Point) -> float:
        self.check_owns(x, y)
        a1, b1 = x.coords
        a2, b2 = y.coords
        dl = self.left.distance(a1, a2)
        dr = self.right.distance(b1, b2)
        return self.scale * math.hypot(dl, dr)

    def geodesic_point(self, x: Point, y: Point, s: float) -> Point:
        self.check_owns(x, y)
        a1, b1 = x.coords
        a2, b2 = y.coords
        return self.point(
            self.left.geodesic_point(a1, a2, s),
            self.right.geodesic_point(b1, b2, s),
        )
