"""Space abstraction and the closed-form sphere/Euclidean backends.

A Space exposes a metric, constant-speed geodesics, closest-point
projection onto balls, and (where available) exponential/logarithm maps.
Points are immutable and carry the id of their owning space; combining
points from different spaces is a usage error, not a numeric one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import (
    CapabilityError,
    GeodesicUniquenessError,
    InternalConsistencyError,
    SpaceMismatchError,
    UsageError,
)
from .policy import DEFAULT_POLICY, NumericPolicy


@dataclass(frozen=True)
class Point:
    """A point tagged with its owning space.

    `coords` is backend specific: an ambient vector for spheres and
    Euclidean space, a scalar for intervals, a (radius, base-point) pair
    for Euclidean cones, a (u, v, t) triple for joins and a
    (piece, inner-point) pair for glued spaces.
    """

    space_id: str
    coords: Any

    def __repr__(self):
        return f"Point({self.space_id}, {self.coords})"


@dataclass(frozen=True)
class TangentVector:
    """Unit direction plus magnitude at a base point.

    For vector backends `direction` is an ambient unit vector orthogonal
    to the constraint (tangent to the sphere at `base`); the zero vector
    is represented by magnitude 0.
    """

    base: Point
    direction: Any
    magnitude: float

    def scale(self, factor: float) -> "TangentVector":
        if factor < 0:
            raise UsageError("tangent vectors live in a cone; negative scaling is undefined")
        return TangentVector(self.base, self.direction, self.magnitude * factor)


def safe_arccos(value: float, policy: NumericPolicy) -> float:
    """arccos with clamping; overshoot beyond the policy slack is a bug."""
    if value > 1.0:
        if value > 1.0 + policy.arccos_slack:
            raise InternalConsistencyError(f"arccos argument {value!r} exceeds 1 beyond slack")
        value = 1.0
    elif value < -1.0:
        if value < -1.0 - policy.arccos_slack:
            raise InternalConsistencyError(f"arccos argument {value!r} below -1 beyond slack")
        value = -1.0
    return math.acos(value)


class Space:
    """Base class for metric backends.

    Subclasses must implement `distance` and `geodesic_point`; exp/log are
    optional and guarded by `has_exp_log`.
    """

    kind: str = "abstract"
    has_exp_log: bool = False
    has_exact_geodesics: bool = True
    curvature_bound_kappa: float = 0.0
    diameter_bound: float = math.inf

    def __init__(self, policy: NumericPolicy = DEFAULT_POLICY):
        self.policy = policy

    # -- identity -----------------------------------------------------------
    @property
    def space_id(self) -> str:
        raise NotImplementedError

    def check_owns(self, *points: Point) -> None:
        for p in points:
            if p.space_id != self.space_id:
                raise SpaceMismatchError(
                    f"point from space {p.space_id!r} used in {self.space_id!r}"
                )

    # -- metric structure ---------------------------------------------------
    @property
    def uniqueness_radius(self) -> float:
        """Distances below this admit a unique minimizing geodesic."""
        return math.inf

    def distance(self, x: Point, y: Point) -> float:
        raise NotImplementedError

    def geodesic_point(self, x: Point, y: Point, s: float) -> Point:
        """Constant-speed geodesic from x (s=0) to y (s=1)."""
        raise NotImplementedError

    def project_to_ball(self, center: Point, r: float, x: Point) -> Point:
        """Closest-point projection onto the closed ball B(center, r)."""
        if r <= 0:
            raise UsageError("ball radius must be positive")
        d = self.distance(center, x)
        if d <= r:
            return x
        self._check_unique(d)
        return self.geodesic_point(center, x, r / d)

    def log_map(self, p: Point, q: Point) -> TangentVector:
        raise CapabilityError(f"{self.kind} backend has no log map")

    def exp_map(self, p: Point, v: TangentVector) -> Point:
        raise CapabilityError(f"{self.kind} backend has no exp map")

    # -- concavity data for the built-in ball-distance family ----------------
    def builtin_family_concavity(self, r: float, collar: float = 1e-2) -> float:
        """Concavity bound of -max(r, dist) on the collar annulus [r, r+collar].

        Convention: f is lam-concave when f(geo(s)) - (lam/2) s^2 is concave
        along unit-speed geodesics, i.e. f'' <= lam in the support sense.
        """
        raise CapabilityError(f"{self.kind} backend has no concavity bound")

    def _check_unique(self, d: float) -> None:
        if d >= self.uniqueness_radius - self.policy.abs_tol:
            raise GeodesicUniquenessError(
                f"distance {d} at or beyond uniqueness radius {self.uniqueness_radius}"
            )

    def __repr__(self):
        return self.space_id


class EuclideanSpace(Space):
    """R^n with the standard metric."""

    kind = "euclidean"
    has_exp_log = True
    curvature_bound_kappa = 0.0

    def __init__(self, dim: int, policy: NumericPolicy = DEFAULT_POLICY):
        super().__init__(policy)
        if dim < 1:
            raise UsageError("dimension must be >= 1")
        self.dim = dim

    @property
    def space_id(self) -> str:
        return f"euclidean:{self.dim}"

    def point(self, coords) -> Point:
        v = np.asarray(coords, dtype=float)
        if v.shape != (self.dim,):
            raise UsageError(f"expected {self.dim} coordinates, got shape {v.shape}")
        v = v.copy()
        v.setflags(write=False)
        return Point(self.space_id, v)

    def distance(self, x: Point, y: Point) -> float:
        self.check_owns(x, y)
        return float(np.linalg.norm(x.coords - y.coords))

    def geodesic_point(self, x: Point, y: Point, s: float) -> Point:
        self.check_owns(x, y)
        return self.point((1.0 - s) * x.coords + s * y.coords)

    def log_map(self, p: Point, q: Point) -> TangentVector:
        self.check_owns(p, q)
        diff = q.coords - p.coords
        mag = float(np.linalg.norm(diff))
        if mag <= self.policy.coincide_tol:
            return TangentVector(p, np.zeros(self.dim), 0.0)
        return TangentVector(p, diff / mag, mag)

    def exp_map(self, p: Point, v: TangentVector) -> Point:
        self.check_owns(p, v.base)
        if v.magnitude == 0.0:
            return p
        return self.point(p.coords + v.magnitude * np.asarray(v.direction))

    def builtin_family_concavity(self, r: float, collar: float = 1e-2) -> float:
        # -dist is concave on all of R^n.
        return 0.0


class SphereSpace(Space):
    """Round sphere S^m of radius R embedded in R^(m+1).

    Curvature is 1/R^2, so R >= 1 gives a CAT(1) space and R > 1 a
    CAT(kappa) space with kappa < 1.
    """

    kind = "sphere"
    has_exp_log = True

    def __init__(self, dim: int, radius: float = 1.0, policy: NumericPolicy = DEFAULT_POLICY):
        super().__init__(policy)
        if dim < 1 or radius <= 0:
            raise UsageError("sphere needs dim >= 1 and radius > 0")
        self.dim = dim
        self.radius = radius
        self.curvature_bound_kappa = 1.0 / radius**2
        self.diameter_bound = math.pi * radius

    @property
    def space_id(self) -> str:
        return f"sphere:{self.dim}:{self.radius!r}"

    @property
    def uniqueness_radius(self) -> float:
        return math.pi * self.radius

    def point(self, coords, normalize: bool = False) -> Point:
        v = np.asarray(coords, dtype=float)
        if v.shape != (self.dim + 1,):
            raise UsageError(f"expected {self.dim + 1} coordinates, got shape {v.shape}")
        n = float(np.linalg.norm(v))
        if normalize:
            if n == 0.0:
                raise UsageError("cannot normalize the zero vector")
            v = v * (self.radius / n)
        elif abs(n - self.radius) > self.policy.coord_tol * max(1.0, self.radius):
            raise UsageError(f"norm {n} does not match sphere radius {self.radius}")
        v = v.copy()
        v.setflags(write=False)
        return Point(self.space_id, v)

    def distance(self, x: Point, y: Point) -> float:
        self.check_owns(x, y)
        # 2 atan2(|x-y|, |x+y|) is exact at zero and stable near the antipode,
        # unlike arccos of the normalized inner product
        a = float(np.linalg.norm(x.coords - y.coords))
        b = float(np.linalg.norm(x.coords + y.coords))
        return 2.0 * self.radius * math.atan2(a, b)

    def geodesic_point(self, x: Point, y: Point, s: float) -> Point:
        self.check_owns(x, y)
        d = self.distance(x, y)
        if d <= self.policy.coincide_tol:
            return x
        self._check_unique(d)
        theta = d / self.radius
        w = (math.sin((1.0 - s) * theta) * x.coords + math.sin(s * theta) * y.coords) / math.sin(theta)
        return self.point(w, normalize=True)

    def log_map(self, p: Point, q: Point) -> TangentVector:
        self.check_owns(p, q)
        d = self.distance(p, q)
        if d <= self.policy.coincide_tol:
            return TangentVector(p, np.zeros(self.dim + 1), 0.0)
        self._check_unique(d)
        # component of q orthogonal to p, normalized in the ambient metric
        u = q.coords - (np.dot(q.coords, p.coords) / self.radius**2) * p.coords
        u = u / np.linalg.norm(u)
        return TangentVector(p, u, d)

    def exp_map(self, p: Point, v: TangentVector) -> Point:
        self.check_owns(p, v.base)
        if v.magnitude == 0.0:
            return p
        theta = v.magnitude / self.radius
        u = np.asarray(v.direction)
        w = math.cos(theta) * p.coords + math.sin(theta) * self.radius * u
        return self.point(w, normalize=True)

    def builtin_family_concavity(self, r: float, collar: float = 1e-2) -> float:
        # Along a unit-speed geodesic, dist'' = (1/R) cot(dist/R) (1 - dist'^2),
        # so -dist is concave where dist/R <= pi/2 and tan-growing beyond.
        edge = (r + collar) / self.radius
        if edge >= math.pi:
            raise UsageError("collar reaches the antipode; no concavity bound")
        return max(0.0, -math.cos(edge) / math.sin(edge) / self.radius)


class IntervalSpace(Space):
    """A segment [0, L] with the absolute-value metric.

    Used as the base of cones and joins (an arc carries the same
    intrinsic metric as an interval of its length).
    """

    kind = "interval"
    has_exp_log = True

    def __init__(self, length: float, policy: NumericPolicy = DEFAULT_POLICY):
        super().__init__(policy)
        if length < 0:
            raise UsageError("interval length must be nonnegative")
        self.length = length
        self.diameter_bound = length

    @property
    def space_id(self) -> str:
        return f"interval:{self.length!r}"

    def point(self, sigma: float) -> Point:
        s = float(sigma)
        if s < -self.policy.coord_tol or s > self.length + self.policy.coord_tol:
            raise UsageError(f"parameter {s} outside [0, {self.length}]")
        return Point(self.space_id, min(max(s, 0.0), self.length))

    def distance(self, x: Point, y: Point) -> float:
        self.check_owns(x, y)
        return abs(x.coords - y.coords)

    def geodesic_point(self, x: Point, y: Point, s: float) -> Point:
        self.check_owns(x, y)
        return self.point((1.0 - s) * x.coords + s * y.coords)

    def log_map(self, p: Point, q: Point) -> TangentVector:
        self.check_owns(p, q)
        diff = q.coords - p.coords
        if abs(diff) <= self.policy.coincide_tol:
            return TangentVector(p, 0.0, 0.0)
        return TangentVector(p, math.copysign(1.0, diff), abs(diff))

    def exp_map(self, p: Point, v: TangentVector) -> Point:
        self.check_owns(p, v.base)
        return self.point(p.coords + v.direction * v.magnitude)

    def builtin_family_concavity(self, r: float, collar: float = 1e-2) -> float:
        return 0.0


class PointSpace(Space):
    """A one-point space; the right factor of a spherical cone."""

    kind = "point"
    diameter_bound = 0.0

    def __init__(self, label: str = "tip", policy: NumericPolicy = DEFAULT_POLICY):
        super().__init__(policy)
        self.label = label

    @property
    def space_id(self) -> str:
        return f"point:{self.label}"

    def point(self) -> Point:
        return Point(self.space_id, self.label)

    def distance(self, x: Point, y: Point) -> float:
        self.check_owns(x, y)
        return 0.0

    def geodesic_point(self, x: Point, y: Point, s: float) -> Point:
        self.check_owns(x, y)
        return x
