"""Time-dependent gradient flow engine and its checkers.

The engine freezes the family on each partition interval and advances with
exponential-map Euler steps, mirroring the piecewise-constant construction
that underlies the existence proof of the flow.  The checkers verify the
defining distance-decay inequality against witness points and the
two-curve distance estimate.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CatflowError, PreconditionError, UsageError
from .families import TimeDependentFamily
from .spaces import Point, Space


@dataclass
class Trajectory:
    """A time-sampled curve with its discretization step."""

    space: Space
    times: np.ndarray
    points: list
    delta: float
    escaped: bool = False
    diagnostic: str = ""

    def __len__(self):
        return len(self.points)

    @property
    def end_time(self) -> float:
        return float(self.times[len(self.points) - 1])

    def index_at(self, t: float) -> int:
        """Index of the partition time nearest to t (must be within delta/2)."""
        n = len(self.points)
        j = int(np.searchsorted(self.times[:n], t))
        best = None
        for i in (j - 1, j, j + 1):
            if 0 <= i < n and (best is None
                               or abs(self.times[i] - t) < abs(self.times[best] - t)):
                best = i
        if best is None or abs(self.times[best] - t) > self.delta / 2 + 1e-12:
            raise UsageError(f"time {t} not on the trajectory partition")
        return best

    def point_at(self, t: float) -> Point:
        return self.points[self.index_at(t)]

    def coord_rows(self) -> np.ndarray:
        """(t, coords...) rows; only for backends with vector coordinates."""
        rows = []
        for t, p in zip(self.times, self.points):
            c = np.atleast_1d(np.asarray(p.coords, dtype=float))
            rows.append(np.concatenate([[t], c]))
        return np.array(rows)


def uniform_partition(a: float, b: float, delta: float) -> np.ndarray:
    """Partition of [a, b] with step <= delta (exact endpoints)."""
    if delta <= 0:
        raise UsageError("delta must be positive")
    if b < a:
        raise UsageError("empty interval")
    n = max(1, int(math.ceil((b - a) / delta))) if b > a else 0
    return np.linspace(a, b, n + 1)


def nested_half_delta(trajectory: Trajectory) -> float:
    """A step whose uniform partition contains all of the trajectory's times.

    Refinement studies compare flows at delta and delta/2; using this exact
    half step keeps the two grids nested so no time-snapping error enters.
    """
    n = len(trajectory.points) - 1
    if n <= 0:
        return trajectory.delta / 2
    return float(trajectory.times[n] - trajectory.times[0]) / (2 * n)


def evolve(family: TimeDependentFamily, p0: Point, interval, delta: float) -> Trajectory:
    """Frozen-family exponential Euler steps over a uniform partition.

    f is frozen at t_i on [t_i, t_{i+1}) and the step is
    p_{i+1} = exp(p_i, (t_{i+1} - t_i) * grad f_{t_i}(p_i)).  If the pair
    (p, t) leaves the family's domain the trajectory is truncated and the
    escape recorded; a mid-flow gradient failure truncates likewise.
    """
    a, b = interval
    space = family.space
    if not family.contains(a, p0):
        raise PreconditionError(f"initial point outside the domain at t={a}", witness=p0)
    ts = uniform_partition(a, b, delta)
    points = [p0]
    step = float(ts[1] - ts[0]) if len(ts) > 1 else 0.0
    for i in range(len(ts) - 1):
        t = float(ts[i])
        try:
            v = family.gradient(t, points[-1])
            nxt = space.exp_map(points[-1], v.scale(float(ts[i + 1] - ts[i])))
        except CatflowError as exc:
            return Trajectory(space, ts, points, step, escaped=True,
                              diagnostic=f"gradient failure at t={t}: {exc}")
        if not family.contains(float(ts[i + 1]), nxt):
            points.append(nxt)
            return Trajectory(space, ts, points, step, escaped=True,
                              diagnostic=f"escaped the domain at t={ts[i + 1]}")
        points.append(nxt)
    return Trajectory(space, ts, points, step)


def gradient(family: TimeDependentFamily, t: float, p: Point):
    """Gradient of f_t at p (zero at the kink of the ball-distance family)."""
    return family.gradient(t, p)


# ---------------------------------------------------------------------------
# defining-inequality checker
# ---------------------------------------------------------------------------

@dataclass
class EviReport:
    """Worst-case slack of the discrete distance-decay inequality.

    slack is per unit time: for witness p and step of size eps,
    slack = [d(p, a_i) - eps * bracket - d(p, a_{i+1})] / eps, where
    bracket = (f(p) - f(a_i))/d - (lam/2) d.  The trajectory passes when
    every slack >= -tol.
    """

    tol: float
    worst_slack: float
    worst_witness: Optional[int]
    worst_time: Optional[float]
    n_checked: int
    n_skipped: int
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "worst_slack": self.worst_slack,
            "worst_witness": self.worst_witness,
            "worst_time": self.worst_time,
            "n_checked": self.n_checked,
            "n_skipped": self.n_skipped,
            "violations": self.violations,
            "pass": self.passed,
        }


def check_evi(trajectory: Trajectory, family: TimeDependentFamily,
              witnesses: Sequence[Point], tol: float) -> EviReport:
    """Check the discrete defining inequality against witness points.

    Pairs where the witness coincides with the trajectory point, or falls
    outside the family's domain at that time, are skipped and counted.
    """
    space = trajectory.space
    lam = family.lam
    worst = math.inf
    worst_w = None
    worst_t = None
    checked = 0
    skipped = 0
    violations = 0
    for wi, p in enumerate(witnesses):
        for i in range(len(trajectory.points) - 1):
            t = float(trajectory.times[i])
            eps = float(trajectory.times[i + 1] - trajectory.times[i])
            d_now = space.distance(p, trajectory.points[i])
            if d_now <= space.policy.coincide_tol or not family.contains(t, p):
                skipped += 1
                continue
            bracket = ((family.evaluate(t, p) - family.evaluate(t, trajectory.points[i]))
                       / d_now - 0.5 * lam * d_now)
            d_next = space.distance(p, trajectory.points[i + 1])
            slack = (d_now - eps * bracket - d_next) / eps
            checked += 1
            if slack < worst:
                worst = slack
                worst_w = wi
                worst_t = t
            if slack < -tol:
                violations += 1
    return EviReport(tol=tol, worst_slack=worst if checked else math.nan,
                     worst_witness=worst_w, worst_time=worst_t,
                     n_checked=checked, n_skipped=skipped, violations=violations)


# ---------------------------------------------------------------------------
# distance estimates
# ---------------------------------------------------------------------------

def distance_estimate_bound(lam: float, s: float, ell_a: float, dt: float) -> float:
    """Upper bound for the distance of two gradient curves after time dt.

    For families within s of each other in value:
    ell(t)^2 + 2s/lam <= (ell(a)^2 + 2s/lam) e^(2 lam dt), specializing to
    ell(a) e^(lam dt) at s = 0.  The statement leaves lam = 0 with s > 0
    undefined; this returns the integrated form sqrt(ell_a^2 + 4 s dt)
    (from ell' <= 2s/ell) and flags it with a RuntimeWarning.
    """
    if s < 0 or ell_a < 0 or dt < 0:
        raise UsageError("s, ell_a and dt must be nonnegative")
    if s == 0.0:
        return ell_a * math.exp(lam * dt)
    if lam == 0.0:
        warnings.warn(
            "distance estimate with lam=0 and s>0 uses the integrated "
            "extension sqrt(ell_a^2 + 4 s dt)",
            RuntimeWarning,
            stacklevel=2,
        )
        return math.sqrt(ell_a**2 + 4.0 * s * dt)
    val = (ell_a**2 + 2.0 * s / lam) * math.exp(2.0 * lam * dt) - 2.0 * s / lam
    return math.sqrt(max(0.0, val))


@dataclass
class DistanceEstimateReport:
    lam: float
    s: float
    allowance: float
    worst_excess: float
    worst_time: Optional[float]
    n_checked: int

    @property
    def passed(self) -> bool:
        return self.worst_excess <= self.allowance

    def to_dict(self) -> dict:
        return {
            "lam": self.lam,
            "s": self.s,
            "allowance": self.allowance,
            "worst_excess": self.worst_excess,
            "worst_time": self.worst_time,
            "n_checked": self.n_checked,
            "pass": self.passed,
        }


def verify_distance_estimate(traj_a: Trajectory, traj_b: Trajectory, lam: float,
                             s: float, c_delta: float = 5.0) -> DistanceEstimateReport:
    """Check ell(t_i) <= bound(lam, s, ell(t_0), t_i - t_0) + C*delta.

    The trajectories are compared on the coarser partition (times must
    align within half a step, which uniform refinements guarantee).
    """
    if traj_a.space.space_id != traj_b.space.space_id:
        raise UsageError("trajectories live in different spaces")
    space = traj_a.space
    coarse, fine = (traj_a, traj_b) if traj_a.delta >= traj_b.delta else (traj_b, traj_a)
    delta = max(traj_a.delta, traj_b.delta)
    t0 = float(coarse.times[0])
    same_grid = (len(coarse.points) == len(fine.points)
                 and np.array_equal(coarse.times[:len(coarse.points)],
                                    fine.times[:len(fine.points)]))
    n = len(coarse.points)
    stride = max(1, n // 20000)  # bound the cost on very fine partitions
    ell0 = space.distance(coarse.points[0], fine.points[0] if same_grid
                          else fine.point_at(t0))
    allowance = c_delta * delta
    worst = -math.inf
    worst_t = None
    checked = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for i in range(0, n, stride):
            t = float(coarse.times[i])
            other = fine.points[i] if same_grid else fine.point_at(t)
            ell = space.distance(coarse.points[i], other)
            bound = distance_estimate_bound(lam, s, ell0, t - t0)
            excess = ell - bound
            checked += 1
            if excess > worst:
                worst = excess
                worst_t = t
    return DistanceEstimateReport(lam=lam, s=s, allowance=allowance,
                                  worst_excess=worst, worst_time=worst_t,
                                  n_checked=checked)
