"""The space W glued from a backend U and the spherical cone J over K.

K is carried as a finite gate sampling (pairs of identified points, one in
each piece) with mesh eps_K; every cross-piece distance is a minimum over
crossing positions, so it inherits a Lipschitz-1 dependence on the gate
and an eps_K error bound.  When K is a parametrized geodesic arc the
crossing position is additionally refined continuously between gates,
which removes the gate quantization from flows without changing the
contract.  An independent epsilon-net shortest-path oracle is provided
for validation.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConfigError,
    InternalConsistencyError,
    PreconditionError,
    UsageError,
)
from .joins import SphericalConeSpace, spherical_cone
from .policy import DEFAULT_POLICY, NumericPolicy
from .spaces import IntervalSpace, Point, Space, SphereSpace

DEFAULT_EPS_K = math.pi / 200


@dataclass(frozen=True)
class CrossingPolicy:
    """How many times geodesics may alternate between the pieces.

    Single crossing is the default (K is convex in both pieces); the
    relaxation flag enables multi-crossing tightening so the assumption
    stays testable instead of baked in.
    """

    max_alternations: int = 1
    relax: bool = False


class ArcOnSphere:
    """A geodesic arc on a sphere, parametrized by arclength.

    Serves as the weakly convex subset K: it is isometric to the interval
    [0, length], which also becomes the base of the spherical cone.
    """

    def __init__(self, space: SphereSpace, start: Point, tangent: np.ndarray,
                 length: float):
        if length < 0 or length > math.pi + space.policy.abs_tol:
            raise UsageError("arc length must lie in [0, pi] to base a cone")
        self.space = space
        self.start = start
        self.tangent = np.asarray(tangent, dtype=float)
        self.length = float(length)
        self._a = np.asarray(start.coords, dtype=float)
        self._b = space.radius * self.tangent

    @classmethod
    def from_endpoints(cls, space: SphereSpace, start: Point, end: Point,
                       length: Optional[float] = None) -> "ArcOnSphere":
        d = space.distance(start, end)
        if d <= space.policy.coincide_tol:
            return cls.singleton(space, start)
        v = space.log_map(start, end)
        return cls(space, start, np.asarray(v.direction), d if length is None else length)

    @classmethod
    def singleton(cls, space: SphereSpace, point: Point) -> "ArcOnSphere":
        # zero-length arc; any unit tangent works and is chosen deterministically
        c = np.asarray(point.coords, dtype=float) / space.radius
        k = int(np.argmin(np.abs(c)))
        e = np.zeros(space.dim + 1)
        e[k] = 1.0
        e -= np.dot(e, c) * c
        e /= np.linalg.norm(e)
        return cls(space, point, e, 0.0)

    def point_at(self, sigma: float) -> Point:
        th = sigma / self.space.radius
        return self.space.point(math.cos(th) * self._a + math.sin(th) * self._b,
                                normalize=True)

    def project(self, x: Point):
        """(sigma, distance) of the nearest arc point to x."""
        xv = np.asarray(x.coords, dtype=float)
        r2 = self.space.radius ** 2
        ca = float(xv @ self._a) / r2
        cb = float(xv @ self._b) / r2
        sigma = self.space.radius * math.atan2(cb, ca)
        if 0.0 <= sigma <= self.length:
            return sigma, self.space.distance(x, self.point_at(sigma))
        d0 = self.space.distance(x, self.point_at(0.0))
        d1 = self.space.distance(x, self.point_at(self.length))
        return (0.0, d0) if d0 <= d1 else (self.length, d1)


class GluedSpace(Space):
    """Metric backend for W = U glued to J along the gate sampling of K.

    Points carry a piece tag: ("U", inner) or ("J", inner).  Distances on
    one piece never exceed that piece's intrinsic metric; cross-piece
    distances are minimized over gates (with continuous refinement between
    gates when an arc parametrization is available).
    """

    kind = "glued"
    curvature_bound_kappa = 1.0
    diameter_bound = math.inf

    def __init__(self, piece_u: Space, piece_j: SphericalConeSpace,
                 gates_u: Sequence[Point], gates_j: Sequence[Point],
                 gate_sigmas: Sequence[float], eps_k: float,
                 crossing_policy: CrossingPolicy = CrossingPolicy(),
                 arc: Optional[ArcOnSphere] = None,
                 policy: NumericPolicy = DEFAULT_POLICY):
        super().__init__(policy)
        if len(gates_u) != len(gates_j) or len(gates_u) == 0:
            raise ConfigError("gate lists must be nonempty and aligned")
        self.piece_u = piece_u
        self.piece_j = piece_j
        self.gates_u = list(gates_u)
        self.gates_j = list(gates_j)
        self.gate_sigmas = np.asarray(gate_sigmas, dtype=float)
        self.eps_k = float(eps_k)
        self.crossing_policy = crossing_policy
        self.arc = arc
        self.warnings: list = []
        self._validate_gate_isometry()
        self._gate_du = self._pairwise(piece_u, self.gates_u)
        self._gate_dj = self._pairwise(piece_j, self.gates_j)
        self._gate_path = np.minimum(self._gate_du, self._gate_dj)
        if crossing_policy.relax:
            self._gate_path = _min_plus_closure(self._gate_path)

    @property
    def space_id(self) -> str:
        return f"glued[{self.piece_u.space_id}|{self.piece_j.space_id}]"

    @property
    def n_gates(self) -> int:
        return len(self.gates_u)

    # -- point constructors ---------------------------------------------------
    def point_u(self, p: Point) -> Point:
        self.piece_u.check_owns(p)
        return Point(self.space_id, ("U", p))

    def point_j(self, p: Point) -> Point:
        self.piece_j.check_owns(p)
        return Point(self.space_id, ("J", p))

    @property
    def tip(self) -> Point:
        return self.point_j(self.piece_j.tip)

    def _piece(self, x: Point):
        self.check_owns(x)
        tag, inner = x.coords
        return (self.piece_u, self.gates_u) if tag == "U" else (self.piece_j, self.gates_j)

    # -- validation -------------------------------------------------------------
    def _validate_gate_isometry(self):
        n = self.n_gates
        idx = range(n) if n <= 64 else range(0, n, max(1, n // 64))
        for i in idx:
            for j in idx:
                if i >= j:
                    continue
                du = self.piece_u.distance(self.gates_u[i], self.gates_u[j])
                dj = self.piece_j.distance(self.gates_j[i], self.gates_j[j])
                if abs(du - dj) > 1e-9:
                    raise InternalConsistencyError(
                        f"gates {i},{j} not isometric: d_U={du} d_J={dj}")

    @staticmethod
    def _pairwise(space: Space, pts) -> np.ndarray:
        n = len(pts)
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                out[i, j] = out[j, i] = space.distance(pts[i], pts[j])
        return out

    # -- distances ---------------------------------------------------------------
    def _to_gates(self, x: Point) -> np.ndarray:
        piece, gates = self._piece(x)
        tag, inner = x.coords
        return np.array([piece.distance(inner, g) for g in gates])

    def distance(self, x: Point, y: Point) -> float:
        return self.distance_with_bound(x, y)[0]

    def distance_with_bound(self, x: Point, y: Point):
        """Glued distance and its gate-mesh error bound."""
        self.check_owns(x, y)
        tx, ix = x.coords
        ty, iy = y.coords
        gx = self._to_gates(x)
        gy = self._to_gates(y)
        if tx == ty:
            piece = self.piece_u if tx == "U" else self.piece_j
            straight = piece.distance(ix, iy)
            detour = float(np.min(gx[:, None] + self._gate_path + gy[None, :]))
            return min(straight, detour), 0.0 if straight <= detour else self.eps_k
        sigma, k, val = self.best_crossing(x, y)
        if self.crossing_policy.relax or self.crossing_policy.max_alternations > 1:
            val = min(val, float(np.min(gx[:, None] + self._gate_path + gy[None, :])))
        return val, self.eps_k

    def best_crossing(self, x: Point, y: Point):
        """(sigma, gate_index, total) of the optimal crossing for x-to-y.

        Ties between gates beyond the tie tolerance that move the crossing
        by more than eps_K are recorded in `warnings`; the lowest index
        wins.  With an arc parametrization the crossing is refined
        continuously inside the bracketing gate cell.
        """
        tx, ix = x.coords
        ty, iy = y.coords
        if tx == ty:
            raise UsageError("crossing is defined for cross-piece pairs")
        gx = self._to_gates(x)
        gy = self._to_gates(y)
        totals = gx + gy
        order = np.argsort(totals, kind="stable")
        k = int(order[0])
        if len(order) > 1:
            k2 = int(order[1])
            if (totals[k2] - totals[k] <= self.policy.gate_tie_tol
                    and abs(self.gate_sigmas[k2] - self.gate_sigmas[k]) > self.eps_k):
                self.warnings.append(
                    f"gate tie between {k} and {k2} at distance {totals[k]:.6g}")
            if totals[k2] == totals[k]:
                k = min(k, k2)
        sigma = float(self.gate_sigmas[k])
        total = float(totals[k])
        if self.arc is not None:
            xu, yj = (ix, iy) if tx == "U" else (iy, ix)

            def fn(s: float) -> float:
                gu = self.arc.point_at(s)
                gj = self.piece_j.cone_point(self.piece_j.left.point(s), math.pi / 2)
                return self.piece_u.distance(xu, gu) + self.piece_j.distance(gj, yj)

            lo = max(0.0, sigma - self.eps_k)
            hi = min(self.arc.length, sigma + self.eps_k)
            s_ref, v_ref = _grid_refine(fn, lo, hi, 33)
            if v_ref < total:
                sigma, total = s_ref, v_ref
            # the U-leg is non-smooth at the foot of x on the arc; the grid
            # can miss that kink, so test it explicitly
            s_foot, _ = self.arc.project(xu)
            v_foot = fn(s_foot)
            if v_foot < total:
                sigma, total = s_foot, v_foot
        return sigma, k, total

    # -- ball projection -----------------------------------------------------------
    def project_to_ball(self, center: Point, r: float, x: Point) -> Point:
        """Projection onto B(center, r): walk back along the optimal path.

        For cross-piece pairs the path is concatenated through the best
        crossing; the returned point lies in J when r is smaller than the
        J-leg and in the other piece otherwise.
        """
        if r <= 0:
            raise UsageError("ball radius must be positive")
        self.check_owns(center, x)
        tc, ic = center.coords
        tx, ix = x.coords
        if tc == tx:
            piece = self.piece_u if tc == "U" else self.piece_j
            d = piece.distance(ic, ix)
            if d <= r:
                return x
            inner = piece.geodesic_point(ic, ix, r / d)
            return self.point_u(inner) if tc == "U" else self.point_j(inner)
        sigma, k, total = self.best_crossing(x, center)
        if total <= r:
            return x
        gate_u, gate_j = self._gate_at(sigma, k)
        leg_center = (self.piece_j.distance(ic, gate_j) if tc == "J"
                      else self.piece_u.distance(ic, gate_u))
        if r < leg_center:
            if tc == "J":
                inner = self.piece_j.geodesic_point(ic, gate_j, r / leg_center)
                return self.point_j(inner)
            inner = self.piece_u.geodesic_point(ic, gate_u, r / leg_center)
            return self.point_u(inner)
        leg_x = total - leg_center
        if leg_x <= self.policy.coincide_tol:
            return self.point_u(gate_u) if tx == "U" else self.point_j(gate_j)
        rem = r - leg_center
        if tx == "U":
            inner = self.piece_u.geodesic_point(gate_u, ix, rem / leg_x)
            return self.point_u(inner)
        inner = self.piece_j.geodesic_point(gate_j, ix, rem / leg_x)
        return self.point_j(inner)

    def _gate_at(self, sigma: float, k: int):
        if self.arc is not None:
            gu = self.arc.point_at(sigma)
            gj = self.piece_j.cone_point(self.piece_j.left.point(sigma), math.pi / 2)
            return gu, gj
        return self.gates_u[k], self.gates_j[k]


def _grid_refine(fn, lo: float, hi: float, npts: int):
    if hi <= lo:
        return lo, fn(lo)
    xs = np.linspace(lo, hi, npts)
    vals = [fn(float(s)) for s in xs]
    k = int(np.argmin(vals))
    best_x, best_v = float(xs[k]), float(vals[k])
    if 0 < k < npts - 1:
        fa, fb, fc = vals[k - 1], best_v, vals[k + 1]
        denom = fa - 2.0 * fb + fc
        if denom > 0.0:
            h = float(xs[1] - xs[0])
            xv = best_x + 0.5 * h * (fa - fc) / denom
            xv = min(max(xv, float(xs[k - 1])), float(xs[k + 1]))
            vv = fn(xv)
            if vv < best_v:
                return xv, vv
    return best_x, best_v


def _min_plus_closure(w: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths over the gate graph (min-plus iteration)."""
    d = w.copy()
    n = d.shape[0]
    for _ in range(max(1, int(math.ceil(math.log2(max(2, n)))))):
        nd = np.minimum(d, np.min(d[:, :, None] + d[None, :, :], axis=1))
        if np.allclose(nd, d, atol=0.0):
            break
        d = nd
    return d


@dataclass(frozen=True)
class DrivingGeodesic:
    """The unit-speed geodesic from p (on K) to the cone tip.

    In cone coordinates it is t -> (sigma_p, pi/2 - t) for t in [0, pi/2];
    t = 0 is identified with p in the U piece.
    """

    glued: GluedSpace
    sigma_p: float

    @property
    def interval(self):
        return (0.0, math.pi / 2)

    def at(self, t: float) -> Point:
        j = self.glued.piece_j
        if t < -1e-12 or t > math.pi / 2 + 1e-12:
            raise UsageError(f"driving geodesic parameter {t} outside [0, pi/2]")
        tau = min(max(math.pi / 2 - t, 0.0), math.pi / 2)
        if tau == 0.0:
            return self.glued.tip
        return self.glued.point_j(j.cone_point(j.left.point(self.sigma_p), tau))


def build_theorem1_space(u_space: SphereSpace, k_arc: ArcOnSphere, p: Point,
                         eps_k: float = DEFAULT_EPS_K,
                         crossing_policy: CrossingPolicy = CrossingPolicy()):
    """Assemble (W, driving geodesic) for the glued retraction pipeline.

    J is the spherical cone over an interval isometric to K; the gates pair
    arc samples with their slice copies.  Requires every gate within pi/2
    of p.  When p is off K it is replaced by its closest point on K, which
    is legitimate only below curvature one (kappa < 1).
    """
    L = k_arc.length
    sigma_p, dist_p = k_arc.project(p)
    if dist_p > u_space.policy.abs_tol:
        if u_space.curvature_bound_kappa >= 1.0:
            raise PreconditionError(
                f"p is at distance {dist_p} from K; kappa = 1 requires p in K",
                witness=p)
    n = int(math.ceil(L / eps_k)) + 1 if L > 0 else 1
    sigmas = np.linspace(0.0, L, n) if n > 1 else np.array([0.0])
    base = IntervalSpace(L, policy=u_space.policy)
    cone = spherical_cone(base)
    gates_u = [k_arc.point_at(float(s)) for s in sigmas]
    gates_j = [cone.cone_point(base.point(float(s)), math.pi / 2) for s in sigmas]
    p_eff = k_arc.point_at(sigma_p)
    for i, g in enumerate(gates_u):
        d = u_space.distance(p_eff, g)
        if d > math.pi / 2 + u_space.policy.abs_tol:
            raise PreconditionError(
                f"gate {i} at distance {d} > pi/2 from p", witness=g)
    mesh = float(sigmas[1] - sigmas[0]) if n > 1 else eps_k
    glued = GluedSpace(u_space, cone, gates_u, gates_j, sigmas, mesh,
                       crossing_policy=crossing_policy, arc=k_arc,
                       policy=u_space.policy)
    return glued, DrivingGeodesic(glued, sigma_p)


def glued_distance(w: GluedSpace, x: Point, y: Point):
    """Distance in W together with its gate-mesh error bound."""
    return w.distance_with_bound(x, y)


# ---------------------------------------------------------------------------
# epsilon-net shortest-path oracle
# ---------------------------------------------------------------------------

def net_graph_distance(w: GluedSpace, x: Point, y: Point, n_sphere: int = 700,
                       n_sigma: int = 48, n_tau: int = 14,
                       radius: float = 0.35) -> float:
    """Shortest path through an epsilon-net of W (independent oracle).

    Net nodes sample the sphere piece, a (sigma, tau) grid on the cone
    piece, and the gates (one shared node per gate pair).  Edges connect
    nodes within `radius` in their piece, weighted by the piece metric.
    Overestimates the true distance by O(net spacing).
    """
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import dijkstra

    from .sampling import fibonacci_sphere

    if not isinstance(w.piece_u, SphereSpace) or w.arc is None:
        raise UsageError("the net oracle supports the sphere + cone-over-arc setup")
    sphere = w.piece_u
    cone = w.piece_j
    L = w.arc.length

    u_pts = [sphere.point(sphere.radius * v, normalize=True)
             for v in fibonacci_sphere(n_sphere)]
    j_pts = []
    for sig in np.linspace(0.0, L, n_sigma):
        for tau in np.linspace(0.0, math.pi / 2, n_tau):
            j_pts.append(cone.cone_point(cone.left.point(float(sig)), float(tau)))

    def place(pt: Point):
        tag, inner = pt.coords
        if tag == "U":
            u_pts.append(inner)
            return ("U", len(u_pts) - 1)
        j_pts.append(inner)
        return ("J", len(j_pts) - 1)

    loc_x = place(x)
    loc_y = place(y)
    n_u = len(u_pts)
    n_j = len(j_pts)
    n_g = w.n_gates

    def uid(i):
        return i

    def jid(i):
        return n_u + i

    def gid(i):
        return n_u + n_j + i

    rows, cols, vals = [], [], []

    def add_piece_edges(space, pts, ids):
        if isinstance(space, SphereSpace):
            coords = np.array([p.coords for p in pts])
            cosm = np.clip(coords @ coords.T / space.radius**2, -1.0, 1.0)
            dm = space.radius * np.arccos(cosm)
        else:
            n = len(pts)
            dm = np.zeros((n, n))
            for i in range(n):
                for j in range(i + 1, n):
                    dm[i, j] = dm[j, i] = space.distance(pts[i], pts[j])
        n = len(pts)
        for i in range(n):
            for j in range(i + 1, n):
                if dm[i, j] <= radius:
                    rows.append(ids[i])
                    cols.append(ids[j])
                    vals.append(dm[i, j])

    add_piece_edges(sphere, u_pts + w.gates_u,
                    [uid(i) for i in range(n_u)] + [gid(i) for i in range(n_g)])
    add_piece_edges(cone, j_pts + w.gates_j,
                    [jid(i) for i in range(n_j)] + [gid(i) for i in range(n_g)])

    n_total = n_u + n_j + n_g
    graph = coo_matrix((vals + vals, (rows + cols, cols + rows)),
                       shape=(n_total, n_total)).tocsr()

    def node_id(loc):
        return uid(loc[1]) if loc[0] == "U" else jid(loc[1])

    dist = dijkstra(graph, indices=node_id(loc_x))
    return float(dist[node_id(loc_y)])


# ---------------------------------------------------------------------------
# gate CSV interface
# ---------------------------------------------------------------------------

def save_gates_csv(path, w: GluedSpace) -> None:
    """Write gates as rows `sigma,x0,x1,...` (U-piece coordinates)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        dim = len(np.atleast_1d(np.asarray(w.gates_u[0].coords, dtype=float)))
        writer.writerow(["sigma"] + [f"x{i}" for i in range(dim)])
        for s, g in zip(w.gate_sigmas, w.gates_u):
            writer.writerow([repr(float(s))]
                            + [repr(float(v)) for v in np.atleast_1d(g.coords)])


def load_gates_csv(path, u_space: SphereSpace):
    """Read a gate CSV back into (sigmas, points on the U piece)."""
    sigmas = []
    points = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "sigma":
            raise ConfigError("gate CSV must start with a 'sigma' column")
        for row in reader:
            sigmas.append(float(row[0]))
            points.append(u_space.point([float(v) for v in row[1:]], normalize=True))
    return np.asarray(sigmas), points


def glued_from_gate_csv(path, u_space: SphereSpace,
                        crossing_policy: CrossingPolicy = CrossingPolicy()) -> GluedSpace:
    """Build a glued space from an ingested gate CSV (no arc refinement)."""
    sigmas, gates_u = load_gates_csv(path, u_space)
    if len(sigmas) == 0:
        raise ConfigError("gate CSV holds no gates")
    L = float(sigmas[-1])
    base = IntervalSpace(L, policy=u_space.policy)
    cone = spherical_cone(base)
    gates_j = [cone.cone_point(base.point(float(s)), math.pi / 2) for s in sigmas]
    mesh = float(np.max(np.diff(sigmas))) if len(sigmas) > 1 else DEFAULT_EPS_K
    return GluedSpace(u_space, cone, gates_u, gates_j, sigmas, mesh,
                      crossing_policy=crossing_policy, arc=None,
                      policy=u_space.policy)
