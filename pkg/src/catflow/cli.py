"""Command-line front end.

    tractrix run        --config FILE [--seed N] [--delta X] [--out DIR]
    tractrix retract    --config FILE [...]
    tractrix flow       --config FILE [...]
    tractrix verify-all [--config FILE] [...]

Config files are flat `key = value` lines ('#' starts a comment); CLI
flags override file values.  The environment variable CATFLOW_VERBOSE
selects output verbosity (0 silent, 1 progress, 2 debug).

Exit codes: 0 all checks pass; 1 usage or config error; 2 precondition
violation; 3 check failure.

Config keys by command
----------------------
run:      experiment = line-1d | sphere-meridian | stationary
          r, delta, t_end, deltas (comma list, emits a convergence table),
          expect_terminal, expect_tol, min_order
retract:  pipeline = phi | psi | cone | radial
          radius (sphere radius), delta, eps_k, n_pairs, max_ratio_tol,
          fix_tol, gates_csv (optional gate ingestion for phi)
flow:     family = quadratic | shifted | oracle-1d
          delta, t_end, corrupt (0/1), evi_tol_steps
verify-all: profile = desk | light, plus per-criterion overrides
          n_pairs, cone_pairs, n_diag, n_probes
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .acceptance import LIGHT_PROFILE, run_all
from .errors import (
    CheckFailure,
    ConfigError,
    PreconditionError,
    UsageError,
)
from .families import ball_distance_family, quadratic_family
from .flows import Trajectory, check_evi, evolve, nested_half_delta, verify_distance_estimate
from .glued import ArcOnSphere, glued_from_gate_csv, save_gates_csv
from .lipschitz import estimate_lipschitz
from .reports import (
    CheckRecord,
    RunManifest,
    Stopwatch,
    write_json,
    write_lipschitz_csv,
    write_trajectory_csv,
)
from .retractions import (
    ArcConeK,
    ConePipeline,
    phi_retraction,
    psi_retraction,
    radial_retraction,
)
from .sampling import ball_pair_sampler, sphere_cap_point, stream
from .spaces import EuclideanSpace, SphereSpace
from .tractrix import DrivingCurve, constant_curve, geodesic_curve, tractrix_flow
from .svgplot import orthographic, svg_polylines


def verbosity() -> int:
    try:
        return int(os.environ.get("CATFLOW_VERBOSE", "1"))
    except ValueError:
        return 1


def say(level: int, *parts) -> None:
    if verbosity() >= level:
        print(*parts)


def load_config(path) -> dict:
    cfg = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, val = line.split("=", 1)
        cfg[key.strip()] = val.strip()
    return cfg


def cfg_float(cfg: dict, key: str, default: float) -> float:
    try:
        return float(cfg.get(key, default))
    except ValueError:
        raise ConfigError(f"config key {key!r} must be a number, got {cfg[key]!r}")


def cfg_int(cfg: dict, key: str, default: int) -> int:
    try:
        return int(cfg.get(key, default))
    except ValueError:
        raise ConfigError(f"config key {key!r} must be an integer, got {cfg[key]!r}")


def _outdir(cfg: dict) -> Path:
    out = Path(cfg.get("out", "tractrix-out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# run: tractrix flow experiments
# ---------------------------------------------------------------------------

def cmd_run(cfg: dict) -> int:
    out = _outdir(cfg)
    seed = cfg_int(cfg, "seed", 0)
    delta = cfg_float(cfg, "delta", 1e-3)
    experiment = cfg.get("experiment", "line-1d")
    checks = []

    if experiment == "line-1d":
        space = EuclideanSpace(1)
        gamma = DrivingCurve(space, (0.0, cfg_float(cfg, "t_end", 5.0)),
                             lambda t: space.point([t]), label="line")
        r = cfg_float(cfg, "r", 1.0)
        start = space.point([cfg_float(cfg, "start", 0.0)])
        traj = tractrix_flow(space, gamma, r, delta, start)
        write_trajectory_csv(out / "trajectory.csv", traj)
        rows = traj.coord_rows()
        svg_polylines(out / "trajectory.svg",
                      [(rows[:, [0, 1]], "trajectory"),
                       (np.column_stack([rows[:, 0], rows[:, 0]]), "gamma")],
                      title="thread drag on the line", equal_axes=False)
        if "expect_terminal" in cfg:
            want = cfg_float(cfg, "expect_terminal", 0.0)
            tol = cfg_float(cfg, "expect_tol", 2 * delta)
            err = abs(float(traj.points[-1].coords[0]) - want)
            checks.append(CheckRecord("terminal", err <= tol, err, tol))
    elif experiment in ("sphere-meridian", "stationary"):
        space = SphereSpace(2, cfg_float(cfg, "radius", 1.0))
        pole = space.point([0, 0, space.radius])
        equ = space.point([space.radius, 0, 0])
        if experiment == "stationary":
            gamma = constant_curve(space, pole, (0.0, cfg_float(cfg, "t_end", 1.0)))
        else:
            gamma = geodesic_curve(space, pole, equ)
        r = cfg_float(cfg, "r", math.pi / 2)
        rng = stream(seed, "cli-run")
        start = sphere_cap_point(space, pole, min(r, math.pi / 2), rng)
        traj = tractrix_flow(space, gamma, r, delta, start)
        write_trajectory_csv(out / "trajectory.csv", traj)
        rows = traj.coord_rows()[:, 1:]
        gam_rows = np.array([gamma.at(float(t)).coords for t in traj.times])
        svg_polylines(out / "trajectory.svg",
                      [(orthographic(rows), "trajectory"),
                       (orthographic(gam_rows), "gamma")],
                      title=f"tractrix on the sphere ({experiment})")
        if "deltas" in cfg:
            deltas = [float(v) for v in cfg["deltas"].split(",")]
            devs = []
            for dl in deltas:
                coarse = tractrix_flow(space, gamma, r, dl, start)
                fine = tractrix_flow(space, gamma, r, nested_half_delta(coarse), start)
                n = len(coarse.points)
                dev = max(space.distance(coarse.points[i],
                                         fine.point_at(float(coarse.times[i])))
                          for i in (n // 4, n // 2, (3 * n) // 4, n - 1))
                devs.append(dev)
            with open(out / "convergence.csv", "w") as fh:
                fh.write("delta,sup_deviation\n")
                for dl, dv in zip(deltas, devs):
                    fh.write(f"{dl!r},{dv!r}\n")
            if len(deltas) >= 2:
                order = float(np.polyfit(np.log(deltas), np.log(devs), 1)[0])
                min_order = cfg_float(cfg, "min_order", 0.5)
                checks.append(CheckRecord("refinement order", order >= min_order,
                                          order, min_order))
    else:
        raise ConfigError(f"unknown experiment {experiment!r}")

    return _finish_command(out, cfg, seed, checks)


# ---------------------------------------------------------------------------
# retract: retraction pipelines
# ---------------------------------------------------------------------------

def cmd_retract(cfg: dict) -> int:
    out = _outdir(cfg)
    seed = cfg_int(cfg, "seed", 0)
    delta = cfg_float(cfg, "delta", 1e-3)
    eps_k = cfg_float(cfg, "eps_k", math.pi / 200)
    n_pairs = cfg_int(cfg, "n_pairs", 1000)
    pipeline = cfg.get("pipeline", "phi")
    radius = cfg_float(cfg, "radius", 1.0)
    space = SphereSpace(2, radius)
    pole = space.point([0, 0, radius])
    rng = stream(seed, f"cli-retract-{pipeline}")
    checks = []

    if pipeline == "phi":
        arc = ArcOnSphere.from_endpoints(space, pole, space.point([radius, 0, 0]))
        phi = phi_retraction(space, arc, pole, delta=delta, eps_k=eps_k)
        if "gates_csv" in cfg:
            save_gates_csv(cfg["gates_csv"], phi.glued)
            glued_from_gate_csv(cfg["gates_csv"], space)  # round-trip validation
        retract = phi.retract
        metric = space.distance
        sampler = ball_pair_sampler(space, pole, math.pi / 2)
        fix_pairs = [(g, phi.retract(g)) for g in phi.k_samples()]
        fix_tol = cfg_float(cfg, "fix_tol", 2 * delta + 2 * eps_k)
        ratio_tol = cfg_float(cfg, "max_ratio_tol", 1.0 + 1e-2)
    elif pipeline == "psi":
        psi = psi_retraction(space, pole, delta=delta)

        def sampler(rng):
            a = psi.product.point(sphere_cap_point(space, pole, math.pi / 2, rng),
                                  sphere_cap_point(space, pole, math.pi / 2, rng))
            b = psi.product.point(sphere_cap_point(space, pole, math.pi / 2, rng),
                                  sphere_cap_point(space, pole, math.pi / 2, rng))
            return a, b

        retract = psi.retract
        metric = psi.product.distance
        diag = [sphere_cap_point(space, pole, math.pi / 2, rng) for _ in range(32)]
        fix_pairs = []
        for x in diag:
            outp, _ = psi.retract_pair(x, x)
            fix_pairs.append((psi.product.point(x, x), outp))
        fix_tol = cfg_float(cfg, "fix_tol", 1e-7)
        ratio_tol = cfg_float(cfg, "max_ratio_tol", 1.0 + 1e-2)
    elif pipeline == "cone":
        half = cfg_float(cfg, "arc_length", math.pi / 2) / 2
        start = space.point([-math.sin(half), 0.0, math.cos(half)])
        end = space.point([math.sin(half), 0.0, math.cos(half)])
        arc = ArcOnSphere.from_endpoints(space, start, end)
        cone = ConePipeline(space, ArcConeK(arc), pole)
        retract = cone.retract
        metric = space.distance

        def sampler(rng):
            v = rng.normal(size=(2, 3))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            return space.point(radius * v[0]), space.point(radius * v[1])

        fix_pairs = [(g, cone.retract(g)) for g in cone.k_samples()]
        fix_tol = cfg_float(cfg, "fix_tol", 1e-9)
        ratio_tol = cfg_float(cfg, "max_ratio_tol", 1.0 + 1e-6)
    elif pipeline == "radial":
        retract = lambda x: radial_retraction(space, pole, x)
        metric = space.distance

        def sampler(rng):
            v = rng.normal(size=(2, 3))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            return space.point(radius * v[0]), space.point(radius * v[1])

        fix_pairs = [(q, retract(q)) for q in
                     (sphere_cap_point(space, pole, math.pi / 2, rng) for _ in range(32))]
        fix_tol = cfg_float(cfg, "fix_tol", 1e-12)
        ratio_tol = cfg_float(cfg, "max_ratio_tol", 1.0 + 1e-9)
    else:
        raise ConfigError(f"unknown pipeline {pipeline!r}")

    rep = estimate_lipschitz(retract, sampler, metric, n_pairs, rng,
                             resolution=cfg_float(cfg, "resolution", 1e-9))
    write_lipschitz_csv(out / "lipschitz.csv", rep)
    fix_err = max((metric(a, b) for a, b in fix_pairs), default=0.0)
    with open(out / "fixed_points.csv", "w") as fh:
        fh.write("index,error\n")
        for i, (a, b) in enumerate(fix_pairs):
            fh.write(f"{i},{metric(a, b)!r}\n")
    summary = rep.summary()
    summary["pipeline"] = pipeline
    summary["retraction_error"] = fix_err
    summary["retraction_tol"] = fix_tol
    summary["max_ratio_tol"] = ratio_tol
    if pipeline == "phi":
        summary["retraction_tol_formula"] = "2*delta + 2*eps_k"
        summary["delta"] = delta
        summary["eps_k"] = eps_k
    write_json(out / "summary.json", summary)
    checks.append(CheckRecord("max ratio", rep.max_ratio <= ratio_tol,
                              rep.max_ratio, ratio_tol))
    checks.append(CheckRecord("retraction error", fix_err <= fix_tol,
                              fix_err, fix_tol))
    return _finish_command(out, cfg, seed, checks)


# ---------------------------------------------------------------------------
# flow: gradient-flow experiments
# ---------------------------------------------------------------------------

def cmd_flow(cfg: dict) -> int:
    out = _outdir(cfg)
    seed = cfg_int(cfg, "seed", 0)
    family_kind = cfg.get("family", "quadratic")
    checks = []

    if family_kind == "quadratic":
        # the frozen-step recursion of the quadratic family is exactly linear
        # (p_{i+1} = (1 - delta) p_i), so the fine-step study evaluates it in
        # closed form; the engine itself is exercised at a coarser step
        delta = cfg_float(cfg, "delta", 1e-6)
        space = EuclideanSpace(3)
        n = int(math.ceil(1.0 / delta))
        times = np.linspace(0.0, 1.0, n + 1)
        factors = np.power(1.0 - 1.0 / n, np.arange(n + 1))
        p0 = np.array([0.5, 0.0, 0.0])
        q0 = np.array([0.0, 0.5, 0.0])
        ell0 = float(np.linalg.norm(p0 - q0))
        worst_ratio = float(np.max(np.abs(ell0 * factors
                                          / (ell0 * np.exp(-times)) - 1.0)))
        fam = quadratic_family(space, space.point([0.0, 0.0, 0.0]), region_radius=1.0)
        delta_engine = cfg_float(cfg, "delta_engine", 1e-3)
        ta = evolve(fam, space.point(p0), (0.0, 1.0), delta_engine)
        tb = evolve(fam, space.point(q0), (0.0, 1.0), delta_engine)
        write_trajectory_csv(out / "trajectory_a.csv", _thin(ta))
        write_trajectory_csv(out / "trajectory_b.csv", _thin(tb))
        rep = verify_distance_estimate(ta, tb, lam=-1.0, s=0.0,
                                       c_delta=cfg_float(cfg, "c_delta", 5.0))
        write_json(out / "distance_estimate.json", rep.to_dict())
        tol = cfg_float(cfg, "ratio_tol", 1e-6)
        checks.append(CheckRecord("measured/bound ratio", worst_ratio <= tol,
                                  worst_ratio, tol))
        checks.append(CheckRecord("distance estimate", rep.passed,
                                  rep.worst_excess, rep.allowance))
    elif family_kind == "shifted":
        delta = cfg_float(cfg, "delta", 1e-4)
        space = EuclideanSpace(3)
        fam = quadratic_family(space, space.point([0.0, 0.0, 0.0]), region_radius=1.0)
        fam_h = quadratic_family(space, space.point([0.1, 0.0, 0.0]), region_radius=1.0)
        ta = evolve(fam, space.point([0.5, 0.0, 0.0]), (0.0, 1.0), delta)
        tb = evolve(fam_h, space.point([0.0, 0.5, 0.0]), (0.0, 1.0), delta)
        write_trajectory_csv(out / "trajectory_a.csv", _thin(ta))
        write_trajectory_csv(out / "trajectory_b.csv", _thin(tb))
        rep = verify_distance_estimate(ta, tb, lam=-1.0, s=cfg_float(cfg, "s", 0.1),
                                       c_delta=cfg_float(cfg, "c_delta", 5.0))
        write_json(out / "distance_estimate.json", rep.to_dict())
        checks.append(CheckRecord("distance estimate", rep.passed,
                                  rep.worst_excess, rep.allowance))
    elif family_kind == "oracle-1d":
        delta = cfg_float(cfg, "delta", 1e-3)
        space = EuclideanSpace(1)
        t_end = cfg_float(cfg, "t_end", 2.5)
        gamma = DrivingCurve(space, (0.0, t_end), lambda t: space.point([t]))
        fam = ball_distance_family(space, gamma.at, cfg_float(cfg, "r", 1.0))
        traj = evolve(fam, space.point([0.0]), (0.0, t_end), delta)
        write_trajectory_csv(out / "trajectory.csv", traj)
        witnesses = [space.point([v]) for v in (-1.0, 2.0, 5.0)]
        if cfg_int(cfg, "corrupt", 0):
            pts = list(traj.points)
            k = len(pts) // 2
            pts[k] = space.point(np.asarray(pts[k].coords) + 10 * delta)
            traj = Trajectory(space, traj.times, pts, traj.delta)
        tol = cfg_float(cfg, "evi_tol", 25 * delta)
        rep = check_evi(traj, fam, witnesses, tol)
        write_json(out / "evi.json", rep.to_dict())
        checks.append(CheckRecord("EVI slack", rep.passed, rep.worst_slack, -tol))
    else:
        raise ConfigError(f"unknown family {family_kind!r}")

    return _finish_command(out, cfg, seed, checks)


def _thin(traj: Trajectory, keep: int = 512) -> Trajectory:
    """Subsample long trajectories for CSV output."""
    n = len(traj.points)
    if n <= keep:
        return traj
    idx = np.unique(np.linspace(0, n - 1, keep).astype(int))
    return Trajectory(traj.space, traj.times[idx], [traj.points[i] for i in idx],
                      traj.delta, traj.escaped, traj.diagnostic)


# ---------------------------------------------------------------------------
# verify-all
# ---------------------------------------------------------------------------

def run_verify_all(out: Path, seed: int, cfg: dict) -> RunManifest:
    profile = dict(LIGHT_PROFILE) if cfg.get("profile") == "light" else {}
    for key in ("n_pairs", "cone_pairs", "n_diag", "n_probes"):
        if key in cfg:
            profile[key] = cfg_int(cfg, key, 0)
    timing = {}
    manifest = RunManifest(config={**cfg, "profile": cfg.get("profile", "desk")},
                           seed=seed, timing=timing)
    with Stopwatch(timing, "total"):
        results = run_all(seed=seed, profile=profile)
    for res in results:
        manifest.add(res.record)
        say(1, f"[{res.record.name}] {'PASS' if res.record.passed else 'FAIL'} "
               f"value={res.record.value:.6g} tol={res.record.tolerance:.6g} "
               f"{res.record.detail}")
    # determinism-relevant artifacts
    c1 = results[0]
    if "trajectory" in c1.artifacts:
        write_trajectory_csv(out / "criterion1_trajectory.csv",
                             _thin(c1.artifacts["trajectory"]))
    c3 = results[2]
    if "report" in c3.artifacts:
        write_lipschitz_csv(out / "criterion3_lipschitz.csv", c3.artifacts["report"])
    manifest.write(out / "manifest.json")
    return manifest


def cmd_verify_all(cfg: dict) -> int:
    out = _outdir(cfg)
    seed = cfg_int(cfg, "seed", 0)
    manifest = run_verify_all(out, seed, cfg)
    if not manifest.all_passed:
        return 3
    return 0


# ---------------------------------------------------------------------------
# shared epilogue and entry point
# ---------------------------------------------------------------------------

def _finish_command(out: Path, cfg: dict, seed: int, checks) -> int:
    manifest = RunManifest(config=dict(cfg), seed=seed)
    for rec in checks:
        manifest.add(rec)
        say(1, f"[{rec.name}] {'PASS' if rec.passed else 'FAIL'} "
               f"value={rec.value:.6g} tol={rec.tolerance:.6g}")
    manifest.write(out / "manifest.json")
    return 0 if manifest.all_passed else 3


COMMANDS = {
    "run": cmd_run,
    "retract": cmd_retract,
    "flow": cmd_flow,
    "verify-all": cmd_verify_all,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tractrix",
        description="flows and short retractions on model CAT(k) spaces")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--out", default=None)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        cfg = load_config(args.config) if args.config else {}
        if args.seed is not None:
            cfg["seed"] = str(args.seed)
        if args.delta is not None:
            cfg["delta"] = str(args.delta)
        if args.out is not None:
            cfg["out"] = str(args.out)
        return COMMANDS[args.command](cfg)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
