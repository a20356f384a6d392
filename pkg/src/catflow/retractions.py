"""Short retraction pipelines onto small convex subsets.

Three constructions are assembled here:

* the radial retraction of a CAT(1)-class backend onto the ball B(p, pi/2)
  (identity on the ball, reflection d -> pi - d on the annulus, p beyond pi);
* the glued-space pipeline: compose the radial retraction with the
  thread-length-pi/2 tractrix flow toward the tip of the cone glued over K,
  landing on the K slice;
* the diagonal pipeline: embed U x U into the join U * U at parameter pi/4,
  run the glued pipeline over the diagonal sphere, and pull back to the
  diagonal of the product;
* the Euclidean-cone pipeline: project onto the subcone spanned by K and
  push back to the unit sphere along rays parallel to the base direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import (
    InternalConsistencyError,
    PreconditionError,
    UsageError,
)
from .flows import Trajectory, uniform_partition
from .glued import ArcOnSphere, CrossingPolicy, DrivingGeodesic, GluedSpace, build_theorem1_space
from .joins import ScaledProductSpace, SphericalJoinSpace
from .spaces import Point, Space, SphereSpace


# ---------------------------------------------------------------------------
# radial retraction
# ---------------------------------------------------------------------------

def radial_retraction(space: Space, p: Point, x: Point) -> Point:
    """Retraction onto B(p, pi/2): identity inside, d -> pi - d on the
    annulus pi/2 < d < pi, and p from distance pi outward."""
    if space.curvature_bound_kappa > 1.0 + 1e-12:
        raise PreconditionError("radial retraction needs a CAT(1)-class backend")
    d = space.distance(p, x)
    if d <= math.pi / 2:
        return x
    if d >= math.pi:
        return p
    return space.geodesic_point(p, x, (math.pi - d) / d)


# ---------------------------------------------------------------------------
# glued-space pipeline (Phi)
# ---------------------------------------------------------------------------

@dataclass
class PhiPipeline:
    """Retraction of U onto the arc K through the glued cone space."""

    u_space: SphereSpace
    k_arc: ArcOnSphere
    p: Point
    delta: float
    eps_k: float
    glued: GluedSpace
    driving: DrivingGeodesic
    kind: str = "phi"
    r: float = math.pi / 2
    _ts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._ts = uniform_partition(0.0, math.pi / 2, self.delta)

    @property
    def p_effective(self) -> Point:
        return self.k_arc.point_at(self.driving.sigma_p)

    def tolerance(self) -> float:
        """Stated accuracy of the pipeline on K samples."""
        return 2.0 * self.delta + 2.0 * self.eps_k

    def k_samples(self) -> list:
        return list(self.glued.gates_u)

    def retract(self, x: Point) -> Point:
        sigma = self.landing_sigma(x)
        return self.k_arc.point_at(sigma)

    __call__ = retract

    def landing_sigma(self, x: Point) -> float:
        x0 = radial_retraction(self.u_space, self.p_effective, x)
        traj, sigma, ell, stopped = _kernels.arc_glued_tractrix(
            np.asarray(x0.coords, dtype=float),
            self.k_arc._a, self.k_arc._b,
            self.u_space.radius, self.k_arc.length, self.driving.sigma_p,
            self.r, self._ts, self.glued.n_gates)
        if stopped < len(self._ts):
            return self._finish_generic(traj, stopped)
        return float(sigma[-1])

    def trajectory(self, x: Point) -> Trajectory:
        """The flow trajectory in W (points tagged with their piece)."""
        x0 = radial_retraction(self.u_space, self.p_effective, x)
        traj, sigma, ell, stopped = _kernels.arc_glued_tractrix(
            np.asarray(x0.coords, dtype=float),
            self.k_arc._a, self.k_arc._b,
            self.u_space.radius, self.k_arc.length, self.driving.sigma_p,
            self.r, self._ts, self.glued.n_gates)
        pts = [self.glued.point_u(self.u_space.point(row, normalize=True))
               for row in traj[:stopped]]
        if stopped < len(self._ts):
            w_x = pts[-1] if pts else self.glued.point_u(x0)
            for i in range(stopped, len(self._ts)):
                w_x = self.glued.project_to_ball(
                    self.driving.at(float(self._ts[i])), self.r, w_x)
                pts.append(w_x)
        step = float(self._ts[1] - self._ts[0]) if len(self._ts) > 1 else self.delta
        return Trajectory(self.glued, self._ts, pts, step)

    def _finish_generic(self, traj: np.ndarray, stopped: int) -> float:
        w_x = self.glued.point_u(self.u_space.point(traj[stopped - 1], normalize=True)) \
            if stopped > 0 else None
        if w_x is None:
            raise InternalConsistencyError("glued kernel stopped before the first step")
        for i in range(stopped, len(self._ts)):
            w_x = self.glued.project_to_ball(
                self.driving.at(float(self._ts[i])), self.r, w_x)
        tag, inner = w_x.coords
        if tag == "U":
            sigma, _ = self.k_arc.project(inner)
            return sigma
        u, v, t = inner.coords
        return 0.0 if u is None else float(u.coords)


def phi_retraction(u_space: SphereSpace, k_arc: ArcOnSphere, p: Point,
                   delta: float, eps_k: float = math.pi / 200,
                   crossing_policy: CrossingPolicy = CrossingPolicy()) -> PhiPipeline:
    """Build the glued space over K and package the composed retraction."""
    glued, driving = build_theorem1_space(u_space, k_arc, p, eps_k=eps_k,
                                          crossing_policy=crossing_policy)
    return PhiPipeline(u_space, k_arc, p, delta, eps_k, glued, driving)


# ---------------------------------------------------------------------------
# diagonal pipeline (Psi)
# ---------------------------------------------------------------------------

@dataclass
class PsiPipeline:
    """Retraction of U x U onto its diagonal through the join U * U.

    Pairs are embedded at join parameter pi/4, where the diagonal maps
    isometrically onto a weakly convex subset; the glued flow over that
    subset lands on it and the result is pulled back to the diagonal.
    Distances on the product are measured in the (1/sqrt 2)-scaled metric.
    """

    u_space: SphereSpace
    p: Point
    delta: float
    kind: str = "psi"
    r: float = math.pi / 2
    _ts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.u_space.radius != 1.0:
            raise UsageError("the join realization requires a unit sphere backend")
        self._ts = uniform_partition(0.0, math.pi / 2, self.delta)
        self.product = ScaledProductSpace(self.u_space, self.u_space,
                                          1.0 / math.sqrt(2.0),
                                          policy=self.u_space.policy)
        self.join = SphericalJoinSpace(self.u_space, self.u_space,
                                       policy=self.u_space.policy)

    def check_domain(self, pts: Sequence[Point]) -> None:
        for q in pts:
            d = self.u_space.distance(self.p, q)
            if d > math.pi / 2 + self.u_space.policy.abs_tol:
                raise PreconditionError(
                    f"point at distance {d} > pi/2 from the base point", witness=q)

    def product_point(self, x: Point, y: Point) -> Point:
        return self.product.point(x, y)

    def product_distance(self, a: Point, b: Point) -> float:
        return self.product.distance(a, b)

    def retract_pair(self, x: Point, y: Point):
        """((z, z) on the diagonal, snap distance in the join).

        Diagonal inputs are fixed exactly by construction (the embedded
        diagonal is pointwise fixed, like the radial retraction on its
        ball); the flow engine reproduces this up to arccos rounding, which
        the snap would otherwise surface as a ~1e-8 drift.
        """
        self.check_domain((x, y))
        if np.array_equal(np.asarray(x.coords), np.asarray(y.coords)):
            return self.product.point(x, x), 0.0
        x6 = np.concatenate([np.asarray(x.coords, dtype=float),
                             np.asarray(y.coords, dtype=float)]) / math.sqrt(2.0)
        traj, zs, ell = _kernels.psi_glued_tractrix(
            x6, np.asarray(self.p.coords, dtype=float), self.r, self._ts)
        z = zs[-1]
        k6 = np.concatenate([z, z]) / math.sqrt(2.0)
        c = float(np.clip(traj[-1] @ k6, -1.0, 1.0))
        snap = math.acos(c)
        z_pt = self.u_space.point(z, normalize=True)
        return self.product.point(z_pt, z_pt), snap

    def retract(self, pair: Point) -> Point:
        x, y = pair.coords
        out, _ = self.retract_pair(x, y)
        return out

    __call__ = retract


def psi_retraction(u_space: SphereSpace, p: Point, delta: float) -> PsiPipeline:
    return PsiPipeline(u_space, p, delta)


# ---------------------------------------------------------------------------
# Euclidean-cone pipeline (Appendix-style construction)
# ---------------------------------------------------------------------------

class ConeK:
    """Convex subset descriptors with closed-form subcone projections."""

    def project_cone(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def samples(self, n: int = 64) -> list:
        raise NotImplementedError


class ArcConeK(ConeK):
    """Great-circle arc of length <= pi: the subcone is a planar sector."""

    def __init__(self, arc: ArcOnSphere):
        if arc.space.radius != 1.0:
            raise UsageError("the cone pipeline works on the unit sphere")
        self.arc = arc
        self._e1 = arc._a.copy()
        self._e2 = arc._b.copy()

    def project_cone(self, x: np.ndarray) -> np.ndarray:
        q1 = float(x @ self._e1)
        q2 = float(x @ self._e2)
        theta = self.arc.length
        psi = math.atan2(q2, q1)
        if 0.0 <= psi <= theta and (q1 != 0.0 or q2 != 0.0):
            return q1 * self._e1 + q2 * self._e2
        c0 = max(0.0, q1)
        cand0 = c0 * self._e1
        d2 = math.cos(theta) * self._e1 + math.sin(theta) * self._e2
        c1 = max(0.0, float(x @ d2))
        cand1 = c1 * d2
        # nearest along either boundary ray (larger in-cone norm wins)
        return cand0 if c0 >= c1 else cand1

    def samples(self, n: int = 64) -> list:
        if self.arc.length == 0.0:
            return [self.arc.point_at(0.0)]
        return [self.arc.point_at(s)
                for s in np.linspace(0.0, self.arc.length, n)]


class CapConeK(ConeK):
    """Spherical cap around an axis: the subcone is a circular cone."""

    def __init__(self, space: SphereSpace, axis: Point, angle: float):
        if space.radius != 1.0:
            raise UsageError("the cone pipeline works on the unit sphere")
        if not (0.0 <= angle <= math.pi / 2):
            raise UsageError("cap angle must lie in [0, pi/2]")
        self.space = space
        self.axis = np.asarray(axis.coords, dtype=float)
        self.angle = angle

    def project_cone(self, x: np.ndarray) -> np.ndarray:
        c = float(x @ self.axis)
        radial = x - c * self.axis
        s = float(np.linalg.norm(radial))
        if s == 0.0:
            return max(0.0, c) * self.axis
        ang = math.atan2(s, c)
        if ang <= self.angle:
            return x.copy()
        if ang >= self.angle + math.pi / 2:
            return np.zeros_like(x)
        length = c * math.cos(self.angle) + s * math.sin(self.angle)
        direction = math.cos(self.angle) * self.axis + math.sin(self.angle) * (radial / s)
        return max(0.0, length) * direction

    def samples(self, n: int = 64) -> list:
        out = [self.space.point(self.axis, normalize=True)]
        m = max(1, n - 1)
        for i in range(m):
            phi = 2.0 * math.pi * i / m
            e1, e2 = _orthobasis(self.axis)
            v = (math.cos(self.angle) * self.axis
                 + math.sin(self.angle) * (math.cos(phi) * e1 + math.sin(phi) * e2))
            out.append(self.space.point(v, normalize=True))
        return out


class SampledConeK(ConeK):
    """Finitely generated subcone from sample directions (NNLS projection)."""

    def __init__(self, space: SphereSpace, points: Sequence[Point]):
        self.space = space
        self._g = np.array([np.asarray(q.coords, dtype=float) for q in points]).T
        self._points = list(points)

    def project_cone(self, x: np.ndarray) -> np.ndarray:
        from scipy.optimize import nnls
        lam, _ = nnls(self._g, x)
        return self._g @ lam

    def samples(self, n: int = 64) -> list:
        return list(self._points)


def _orthobasis(axis: np.ndarray):
    k = int(np.argmin(np.abs(axis)))
    e = np.zeros_like(axis)
    e[k] = 1.0
    e1 = e - float(e @ axis) * axis
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1) if len(axis) == 3 else None
    if e2 is None:
        raise UsageError("cap sampling implemented for S^2 only")
    return e1, e2


@dataclass
class ConePipeline:
    """Retraction through the Euclidean cone over the unit sphere."""

    u_space: SphereSpace
    k_cone: ConeK
    p: Point
    kind: str = "cone"

    def __post_init__(self):
        if self.u_space.radius != 1.0:
            raise UsageError("the cone pipeline works on the unit sphere")
        self._p = np.asarray(self.p.coords, dtype=float)
        for q in self.k_cone.samples():
            if float(np.asarray(q.coords) @ self._p) < -self.u_space.policy.abs_tol:
                raise PreconditionError(
                    "monotonicity hypothesis fails: a K sample has negative "
                    "inner product with p", witness=q)

    def k_samples(self) -> list:
        return self.k_cone.samples()

    def retract(self, x: Point) -> Point:
        self.u_space.check_owns(x)
        xv = np.asarray(x.coords, dtype=float)
        xhat = self.k_cone.project_cone(xv)
        nhat2 = float(xhat @ xhat)
        if nhat2 > 1.0 + 1e-9:
            raise InternalConsistencyError(
                f"|xhat| = {math.sqrt(nhat2)} > 1 for a unit input")
        b = float(xhat @ self._p)
        rad = b * b + 1.0 - nhat2
        if rad < -1e-12:
            raise InternalConsistencyError("no nonnegative ray parameter exists")
        t = -b + math.sqrt(max(0.0, rad))
        out = xhat + t * self._p
        return self.u_space.point(out, normalize=True)

    __call__ = retract


def cone_retraction(u_space: SphereSpace, k_cone: ConeK, p: Point, x: Point) -> Point:
    """Pointwise form of the cone pipeline."""
    return ConePipeline(u_space, k_cone, p).retract(x)


# ---------------------------------------------------------------------------
# cross-validation of the two sphere pipelines
# ---------------------------------------------------------------------------

@dataclass
class RetractionComparison:
    differences: np.ndarray
    max_difference: float
    mean_difference: float

    def to_dict(self) -> dict:
        return {
            "n_probes": int(len(self.differences)),
            "max_difference": self.max_difference,
            "mean_difference": self.mean_difference,
        }


def compare_retractions(phi: PhiPipeline, cone: ConePipeline,
                        probes: Sequence[Point]) -> RetractionComparison:
    """Tabulate d(Phi(x), Phi_cone(x)) over probes.

    The two constructions are not claimed to coincide; this is an
    empirical difference table over a shared (U, K, p) configuration.
    """
    if phi.u_space.space_id != cone.u_space.space_id:
        raise UsageError("pipelines must share the backend U")
    diffs = np.array([
        phi.u_space.distance(phi.retract(q), cone.retract(q)) for q in probes
    ])
    return RetractionComparison(diffs, float(diffs.max(initial=0.0)),
                                float(diffs.mean()) if len(diffs) else 0.0)
