"""The acceptance suite: each criterion as a callable returning a check record.

Each criterion is property-based at desk scale with pinned tolerances and
a wall-time limit; the CLI `verify-all` command and the test suite share
these implementations.  Scale parameters default to the full desk scale
and can be reduced (the determinism criterion reruns a light profile).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .families import ball_distance_family, quadratic_family
from .flows import (
    Trajectory,
    check_evi,
    evolve,
    nested_half_delta,
    verify_distance_estimate,
)
from .glued import ArcOnSphere, CrossingPolicy, GluedSpace, build_theorem1_space
from .lipschitz import estimate_lipschitz
from .reports import CheckRecord
from .retractions import ArcConeK, ConePipeline, phi_retraction, psi_retraction
from .sampling import ball_pair_sampler, sphere_cap_point, stream
from .spaces import EuclideanSpace, SphereSpace
from .tractrix import DrivingCurve, flow_map, geodesic_curve, tractrix_flow


@dataclass
class CriterionResult:
    record: CheckRecord
    artifacts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.record.passed


def _finish(name: str, passed: bool, value: float, tol: float, t0: float,
            limit: float, detail: str = "", artifacts: Optional[dict] = None
            ) -> CriterionResult:
    elapsed = time.perf_counter() - t0
    ok = passed and elapsed <= limit
    if elapsed > limit:
        detail = f"{detail + '; ' if detail else ''}over the {limit:.0f}s limit"
    rec = CheckRecord(name=name, passed=ok, value=value, tolerance=tol,
                      detail=detail, seconds=elapsed)
    return CriterionResult(rec, artifacts or {})


# -- 1: one-dimensional thread-dragging oracle --------------------------------

def criterion_1(seed: int = 0, delta: float = 1e-3) -> CriterionResult:
    """gamma(t) = t on [0,5], r = 1, start 0: terminal within 2 delta of 4."""
    t0 = time.perf_counter()
    space = EuclideanSpace(1)
    gamma = DrivingCurve(space, (0.0, 5.0), lambda t: space.point([t]), label="line")
    traj = tractrix_flow(space, gamma, 1.0, delta, space.point([0.0]))
    err = abs(float(traj.points[-1].coords[0]) - 4.0)
    return _finish("1 one-dimensional oracle", err <= 2 * delta, err, 2 * delta,
                   t0, 1.0, artifacts={"trajectory": traj})


# -- 2: partition-refinement convergence order --------------------------------

def criterion_2(seed: int = 0, n_probes: int = 8,
                deltas=(1e-2, 5e-3, 2.5e-3, 1.25e-3)) -> CriterionResult:
    """Sphere meridian drive: sup deviation delta-vs-delta/2 fits order >= 0.5."""
    t0 = time.perf_counter()
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    gamma = geodesic_curve(space, pole, space.point([1, 0, 0]))
    rng = stream(seed, "criterion-2")
    probes = [sphere_cap_point(space, pole, 0.8, rng) for _ in range(n_probes)]
    r = 0.8
    devs = []
    for dl in deltas:
        worst = 0.0
        for q in probes:
            coarse = tractrix_flow(space, gamma, r, dl, q)
            fine = tractrix_flow(space, gamma, r, nested_half_delta(coarse), q)
            n = len(coarse.points)
            for idx in (n // 4, n // 2, (3 * n) // 4, n - 1):
                t = float(coarse.times[idx])
                worst = max(worst, space.distance(coarse.points[idx], fine.point_at(t)))
        devs.append(worst)
    alpha = float(np.polyfit(np.log(deltas), np.log(devs), 1)[0])
    table = list(zip(deltas, devs))
    return _finish("2 refinement convergence", alpha >= 0.5, alpha, 0.5, t0, 30.0,
                   detail=f"devs {['%.2e' % d for d in devs]}",
                   artifacts={"table": table, "alpha": alpha})


# -- 3: shortness of the half-pi flow on the hemisphere ------------------------

def criterion_3(seed: int = 0, n_pairs: int = 1000, delta: float = 1e-3) -> CriterionResult:
    """phi at r = pi/2 over the closed hemisphere: max ratio <= 1 + 5 delta."""
    t0 = time.perf_counter()
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    gamma = geodesic_curve(space, pole, space.point([1, 0, 0]))
    fm = flow_map(space, gamma, math.pi / 2, delta, gamma.b)
    rng = stream(seed, "criterion-3")
    sampler = ball_pair_sampler(space, pole, math.pi / 2)
    rep = estimate_lipschitz(fm, sampler, space.distance, n_pairs, rng, bootstrap=0)
    tol = 1.0 + 5 * delta
    return _finish("3 shortness at r = pi/2", rep.max_ratio <= tol, rep.max_ratio,
                   tol, t0, 60.0, artifacts={"report": rep})


# -- 4: strict contraction trend below curvature one ---------------------------

def criterion_4(seed: int = 0, n_pairs: int = 1000, delta: float = 1e-3,
                bootstrap: int = 200) -> CriterionResult:
    """Radius-1.2 sphere: binned max ratios nonincreasing, fitted eps > 0."""
    t0 = time.perf_counter()
    space = SphereSpace(2, 1.2)
    pole = space.point([0, 0, 1.2])
    gamma = geodesic_curve(space, pole, space.point([1.2, 0, 0]), length=math.pi / 2)
    fm = flow_map(space, gamma, math.pi / 2, delta, gamma.b)
    rng = stream(seed, "criterion-4")
    sampler = ball_pair_sampler(space, pole, math.pi / 2)
    rep = estimate_lipschitz(fm, sampler, space.distance, n_pairs, rng,
                             bootstrap=bootstrap)
    ok = rep.bins_nonincreasing() and rep.ci_low > 0.0
    detail = (f"max_ratio {rep.max_ratio:.6f}, eps_hat {rep.epsilon_hat:.4f}, "
              f"CI ({rep.ci_low:.4f}, {rep.ci_high:.4f}), "
              f"nonincreasing {rep.bins_nonincreasing()}")
    return _finish("4 strict contraction trend", ok, rep.ci_low, 0.0, t0, 60.0,
                   detail=detail, artifacts={"report": rep})


# -- 5: two-curve distance estimates -------------------------------------------

def criterion_5(seed: int = 0, delta: float = 1e-4) -> CriterionResult:
    """(i) quadratic decay matches exp(-t) within 1e-4; (ii) shifted family."""
    t0 = time.perf_counter()
    space = EuclideanSpace(3)
    origin = space.point([0.0, 0.0, 0.0])
    fam = quadratic_family(space, origin, region_radius=1.0)
    p0 = space.point([0.5, 0.0, 0.0])
    q0 = space.point([0.0, 0.5, 0.0])
    ta = evolve(fam, p0, (0.0, 1.0), delta)
    tb = evolve(fam, q0, (0.0, 1.0), delta)
    ell0 = space.distance(p0, q0)
    worst = 0.0
    for i in range(len(ta.points)):
        t = float(ta.times[i])
        ell = space.distance(ta.points[i], tb.points[i])
        worst = max(worst, abs(ell - ell0 * math.exp(-t)))

    # shifted family: recentred quadratic, |f - h| <= s on the flow region
    center = space.point([0.1, 0.0, 0.0])
    fam_h = quadratic_family(space, center, region_radius=1.0)
    tb2 = evolve(fam_h, q0, (0.0, 1.0), delta)
    s = 0.1
    rep = verify_distance_estimate(ta, tb2, lam=-1.0, s=s, c_delta=5.0)
    ok = worst <= 1e-4 and rep.passed
    detail = f"(ii) worst excess {rep.worst_excess:.3e} vs allowance {rep.allowance:.1e}"
    return _finish("5 distance estimate", ok, worst, 1e-4, t0, 30.0,
                   detail=detail, artifacts={"report": rep, "traj_a": ta, "traj_b": tb})


# -- 6: defining-inequality negative control -----------------------------------

def criterion_6(seed: int = 0, delta: float = 1e-3) -> CriterionResult:
    """A 10-delta corruption is flagged; the clean trajectory passes."""
    t0 = time.perf_counter()
    space = EuclideanSpace(1)
    gamma = DrivingCurve(space, (0.0, 2.5), lambda t: space.point([t]), label="line")
    fam = ball_distance_family(space, gamma.at, 1.0)
    traj = evolve(fam, space.point([0.0]), (0.0, 2.5), delta)
    witnesses = [space.point([-1.0]), space.point([2.0]), space.point([5.0])]
    tol = 25 * delta
    clean = check_evi(traj, fam, witnesses, tol)

    k = len(traj.points) // 2
    bad_points = list(traj.points)
    bad_points[k] = space.point(np.asarray(bad_points[k].coords) + 10 * delta)
    corrupted_traj = Trajectory(space, traj.times, bad_points, traj.delta)
    corrupted = check_evi(corrupted_traj, fam, witnesses, tol)

    ok = clean.passed and clean.worst_slack >= -tol and not corrupted.passed
    detail = (f"clean worst slack {clean.worst_slack:.4f}, corrupted violations "
              f"{corrupted.violations}")
    return _finish("6 EVI negative control", ok, clean.worst_slack, -tol, t0, 30.0,
                   detail=detail, artifacts={"clean": clean, "corrupted": corrupted})


# -- 7: glued-space retraction pipeline ----------------------------------------

def criterion_7(seed: int = 0, n_pairs: int = 1000, delta: float = 1e-3,
                eps_k: float = math.pi / 200) -> CriterionResult:
    """Hemisphere onto a quarter meridian: K fixed, sampled ratio <= 1.01."""
    t0 = time.perf_counter()
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    arc = ArcOnSphere.from_endpoints(space, pole, space.point([1, 0, 0]))
    phi = phi_retraction(space, arc, pole, delta=delta, eps_k=eps_k)
    fix_tol = 2 * delta + 2 * eps_k
    fix_err = max(space.distance(g, phi.retract(g)) for g in phi.k_samples())
    rng = stream(seed, "criterion-7")
    sampler = ball_pair_sampler(space, pole, math.pi / 2)
    rep = estimate_lipschitz(phi.retract, sampler, space.distance, n_pairs, rng,
                             bootstrap=0)
    ratio_tol = 1.0 + 1e-2
    ok = fix_err <= fix_tol and rep.max_ratio <= ratio_tol
    detail = f"K fix error {fix_err:.2e} (tol {fix_tol:.2e}); max ratio {rep.max_ratio:.6f}"
    return _finish("7 glued pipeline", ok, rep.max_ratio, ratio_tol, t0, 120.0,
                   detail=detail, artifacts={"report": rep, "pipeline": phi,
                                             "fix_error": fix_err})


# -- 8: diagonal pipeline through the join --------------------------------------

def criterion_8(seed: int = 0, n_pairs: int = 1000, n_diag: int = 100,
                delta: float = 1e-3) -> CriterionResult:
    """Diagonal probes fixed exactly post-snap; product-metric ratio <= 1.01."""
    t0 = time.perf_counter()
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    psi = psi_retraction(space, pole, delta=delta)
    rng = stream(seed, "criterion-8")
    diag_exact = True
    worst_fix = 0.0
    for _ in range(n_diag):
        x = sphere_cap_point(space, pole, math.pi / 2, rng)
        out, snap = psi.retract_pair(x, x)
        a, b = out.coords
        if not (np.array_equal(np.asarray(a.coords), np.asarray(x.coords))
                and np.array_equal(np.asarray(b.coords), np.asarray(x.coords))):
            diag_exact = False
        worst_fix = max(worst_fix, space.distance(a, x), snap)

    def pair_sampler(rng):
        a = psi.product.point(sphere_cap_point(space, pole, math.pi / 2, rng),
                              sphere_cap_point(space, pole, math.pi / 2, rng))
        b = psi.product.point(sphere_cap_point(space, pole, math.pi / 2, rng),
                              sphere_cap_point(space, pole, math.pi / 2, rng))
        return a, b

    rep = estimate_lipschitz(psi.retract, pair_sampler, psi.product.distance,
                             n_pairs, rng, bootstrap=0)
    ratio_tol = 1.0 + 1e-2
    ok = diag_exact and rep.max_ratio <= ratio_tol
    detail = f"diag exact {diag_exact} (worst {worst_fix:.2e}); max ratio {rep.max_ratio:.6f}"
    return _finish("8 diagonal pipeline", ok, rep.max_ratio, ratio_tol, t0, 120.0,
                   detail=detail, artifacts={"report": rep, "pipeline": psi})


# -- 9: Euclidean-cone pipeline ---------------------------------------------------

def criterion_9(seed: int = 0, n_pairs: int = 10000) -> CriterionResult:
    """Arc of length pi/2 centered at p: retraction to 1e-9, ratio <= 1 + 1e-6."""
    t0 = time.perf_counter()
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    half = math.pi / 4
    start = space.point([-math.sin(half), 0.0, math.cos(half)])
    end = space.point([math.sin(half), 0.0, math.cos(half)])
    arc = ArcOnSphere.from_endpoints(space, start, end)
    cone = ConePipeline(space, ArcConeK(arc), pole)
    fix_err = max(space.distance(g, cone.retract(g)) for g in cone.k_samples())
    rng = stream(seed, "criterion-9")

    def sphere_pair(rng):
        v = rng.normal(size=(2, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return space.point(v[0]), space.point(v[1])

    rep = estimate_lipschitz(cone.retract, sphere_pair, space.distance, n_pairs,
                             rng, resolution=1e-6, bootstrap=0)
    ratio_tol = 1.0 + 1e-6
    ok = fix_err <= 1e-9 and rep.max_ratio <= ratio_tol
    detail = f"K fix error {fix_err:.2e}; max ratio {rep.max_ratio:.9f}"
    return _finish("9 cone pipeline", ok, rep.max_ratio, ratio_tol, t0, 30.0,
                   detail=detail, artifacts={"report": rep, "pipeline": cone,
                                             "fix_error": fix_err})


# -- 10: glued-space engine consistency --------------------------------------------

def criterion_10(seed: int = 0, n_probes: int = 12,
                 eps_k: float = math.pi / 200) -> CriterionResult:
    """Gate-mesh halving moves distances by <= C eps_K; relaxation agrees."""
    t0 = time.perf_counter()
    space = SphereSpace(2)
    pole = space.point([0, 0, 1])
    arc = ArcOnSphere.from_endpoints(space, pole, space.point([1, 0, 0]))

    def gate_only(eps, relax=False):
        w, geo = build_theorem1_space(space, arc, pole, eps_k=eps,
                                      crossing_policy=CrossingPolicy(relax=relax))
        return GluedSpace(w.piece_u, w.piece_j, w.gates_u, w.gates_j,
                          w.gate_sigmas, w.eps_k, crossing_policy=w.crossing_policy,
                          arc=None, policy=w.policy), geo

    w1, geo1 = gate_only(eps_k)
    w2, geo2 = gate_only(eps_k / 2)
    rng = stream(seed, "criterion-10")
    probes = [sphere_cap_point(space, pole, math.pi / 2, rng) for _ in range(n_probes)]
    targets = [geo1.at(0.3), geo1.at(0.8), geo1.at(1.2), w1.tip]
    targets2 = [geo2.at(0.3), geo2.at(0.8), geo2.at(1.2), w2.tip]
    worst_c = 0.0
    for q in probes:
        for y1, y2 in zip(targets, targets2):
            d1 = w1.distance(w1.point_u(q), y1)
            d2 = w2.distance(w2.point_u(q), y2)
            worst_c = max(worst_c, abs(d1 - d2) / eps_k)

    wr, geor = gate_only(eps_k, relax=True)
    worst_relax = 0.0
    for q in probes:
        for y1, yr in zip(targets, [geor.at(0.3), geor.at(0.8), geor.at(1.2), wr.tip]):
            d1 = w1.distance(w1.point_u(q), y1)
            dr = wr.distance(wr.point_u(q), yr)
            worst_relax = max(worst_relax, abs(d1 - dr))
    ok = worst_c <= 5.0 and worst_relax <= 10 * eps_k
    detail = (f"mesh-halving C {worst_c:.3f} (pin 5); relaxation delta "
              f"{worst_relax:.2e} (tol {10 * eps_k:.2e})")
    return _finish("10 glued engine", ok, worst_c, 5.0, t0, 60.0, detail=detail)


# -- 11: determinism of the harness --------------------------------------------------

# the trend criterion keeps a statistically meaningful sample size even in
# the light profile (its bootstrap interval needs a few hundred pairs)
LIGHT_PROFILE = {
    "n_pairs": 40,
    "n_trend_pairs": 600,
    "n_diag": 10,
    "n_probes": 4,
    "deltas": (1e-2, 5e-3),
    "cone_pairs": 400,
}


def criterion_11(seed: int = 0, workdir=None) -> CriterionResult:
    """verify-all twice with one seed: byte-identical CSVs and manifests.

    Runs the light profile for speed; determinism does not depend on the
    scale.  Manifests are compared after dropping the timing block.
    """
    import json
    import tempfile
    from pathlib import Path

    from .cli import run_verify_all

    t0 = time.perf_counter()
    base = Path(workdir) if workdir else Path(tempfile.mkdtemp(prefix="catflow-det-"))
    outs = []
    for tag in ("a", "b"):
        out = base / tag
        out.mkdir(parents=True, exist_ok=True)
        run_verify_all(out, seed, {"profile": "light", "out": str(out)})
        outs.append(out)
    identical = True
    details = []
    for name in ("criterion1_trajectory.csv", "criterion3_lipschitz.csv"):
        fa = (outs[0] / name).read_bytes()
        fb = (outs[1] / name).read_bytes()
        if fa != fb:
            identical = False
            details.append(f"{name} differs")
    ma = json.loads((outs[0] / "manifest.json").read_text())
    mb = json.loads((outs[1] / "manifest.json").read_text())
    ma.pop("timing", None)
    mb.pop("timing", None)
    if ma != mb:
        identical = False
        details.append("manifest payloads differ")
    return _finish("11 determinism", identical, 0.0 if identical else 1.0, 0.0,
                   t0, 300.0, detail="; ".join(details) or "byte-identical")


def run_all(seed: int = 0, profile: Optional[dict] = None) -> list:
    """Criteria 1-10 with optional scale overrides; returns CriterionResults."""
    p = profile or {}
    np_ = p.get("n_pairs", 1000)
    results = [
        criterion_1(seed),
        criterion_2(seed, n_probes=p.get("n_probes", 8), deltas=p.get("deltas", (1e-2, 5e-3, 2.5e-3, 1.25e-3))),
        criterion_3(seed, n_pairs=np_),
        criterion_4(seed, n_pairs=p.get("n_trend_pairs", np_),
                    bootstrap=p.get("bootstrap", 200)),
        criterion_5(seed, delta=p.get("delta5", 1e-4)),
        criterion_6(seed),
        criterion_7(seed, n_pairs=np_),
        criterion_8(seed, n_pairs=np_, n_diag=p.get("n_diag", 100)),
        criterion_9(seed, n_pairs=p.get("cone_pairs", 10000)),
        criterion_10(seed, n_probes=p.get("n_probes", 12)),
    ]
    return results
