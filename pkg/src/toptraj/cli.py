"""Command-line front end: mission configs in, CSV/JSON artifacts out.

Subcommands: solve2pt | plan | survey | baseline, each taking
--config <path> --out <dir> [--seed n] [--switch-points M].
Exit codes: 0 success, 1 solver failure, 2 config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import assemble, baseline, coverage, nlp, steer
from .core import BoundaryPair, PointState
from .errors import PlannerError

CSV_HEADER = "t,rx,ry,rz,vx,vy,vz,ux,uy,uz,u_norm,H,segment"


@dataclass
class MissionConfig:
    u_max: float
    g: np.ndarray
    waypoints: np.ndarray | None = None
    survey: coverage.SurveySpec | None = None
    start: PointState | None = None
    end: PointState | None = None
    v_start: np.ndarray = None
    v_end: np.ndarray = None
    M: int = 1
    seed: int = 0
    sample_dt: float | None = None
    solver: dict = None

    @classmethod
    def from_dict(cls, d: dict) -> "MissionConfig":
        if not isinstance(d, dict):
            raise ValueError("config must be a JSON object")
        if "u_max" not in d:
            raise ValueError("config missing required key 'u_max'")
        u_max = float(d["u_max"])
        g = np.asarray(d.get("g", [0.0, 0.0, -9.8]), dtype=float)
        if g.shape != (3,):
            raise ValueError("'g' must be a 3-vector")
        if u_max <= float(np.linalg.norm(g)):
            raise ValueError("u_max must exceed |g|")
        has_wp = "waypoints" in d
        has_survey = "survey" in d
        if has_wp and has_survey:
            raise ValueError("config must contain exactly one of 'waypoints' | 'survey'")
        waypoints = np.asarray(d["waypoints"], dtype=float) if has_wp else None
        survey = None
        if has_survey:
            s = d["survey"]
            survey = coverage.SurveySpec(
                origin=s.get("origin", [0.0, 0.0, 0.0]),
                width=float(s["width"]),
                height=float(s["height"]),
                altitude=float(s["altitude"]),
                fov_x=float(s["fov_x"]),
                fov_y=float(s["fov_y"]),
                overlap_x=float(s.get("overlap_x", 0.0)),
                overlap_y=float(s.get("overlap_y", 0.0)),
            )
        start = end = None
        if "start" in d:
            start = PointState(d["start"]["r"], d["start"]["v"])
        if "end" in d:
            end = PointState(d["end"]["r"], d["end"]["v"])
        return cls(
            u_max=u_max,
            g=g,
            waypoints=waypoints,
            survey=survey,
            start=start,
            end=end,
            v_start=np.asarray(d.get("v_start", [0.0, 0.0, 0.0]), dtype=float),
            v_end=np.asarray(d.get("v_end", [0.0, 0.0, 0.0]), dtype=float),
            M=int(d.get("M", 1)),
            seed=int(d.get("seed", 0)),
            sample_dt=d.get("sample_dt"),
            solver=d.get("solver", {}),
        )


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def write_trajectory_csv(path: Path, traj: assemble.Trajectory, H: np.ndarray | None = None):
    lines = [CSV_HEADER]
    u_norm = np.linalg.norm(traj.u, axis=1)
    for i in range(len(traj.t)):
        h = H[i] if H is not None else float("nan")
        fields = [
            _fmt(traj.t[i]),
            *(_fmt(x) for x in traj.r[i]),
            *(_fmt(x) for x in traj.v[i]),
            *(_fmt(x) for x in traj.u[i]),
            _fmt(u_norm[i]),
            _fmt(h),
            str(int(traj.segment[i])),
        ]
        lines.append(",".join(fields))
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _solve_options(cfg: MissionConfig) -> steer.SolveOptions:
    s = cfg.solver or {}
    return steer.SolveOptions(
        residual_tol=float(s.get("residual_tol", 1e-11)),
        max_restarts=int(s.get("max_restarts", 32)),
        seed=cfg.seed,
    )


def _nlp_options(cfg: MissionConfig) -> nlp.NlpOptions:
    s = cfg.solver or {}
    return nlp.NlpOptions(
        M=cfg.M,
        position_tol=float(s.get("position_tol", 1e-6)),
        n_starts=int(s.get("n_starts", 8)),
        seed=cfg.seed,
    )


def cmd_solve2pt(cfg: MissionConfig, out: Path) -> int:
    if cfg.start is None or cfg.end is None:
        raise ValueError("solve2pt config needs 'start' and 'end' states")
    b = BoundaryPair(start=cfg.start, end=cfg.end, g=cfg.g, u_max=cfg.u_max)
    sol = steer.solve_two_point(b, _solve_options(cfg))
    path = nlp.WaypointPath(
        waypoints=np.stack([cfg.start.r, cfg.end.r]),
        v_start=cfg.start.v, v_end=cfg.end.v,
    )
    traj = assemble.pmp_refine(
        path, np.stack([cfg.start.v, cfg.end.v]), cfg.u_max, cfg.g,
        opts=_solve_options(cfg), sample_dt=cfg.sample_dt,
    )
    prof = assemble.hamiltonian_profile(traj)
    write_trajectory_csv(out / "trajectory.csv", traj, prof.H)
    res = steer.residuals(sol.mu, sol.sigma, sol.t_f, sol.boundary) if not sol.degenerate else (0.0, 0.0, 0.0)
    write_json(out / "summary.json", {
        "t_f": sol.t_f,
        "mu": sol.mu,
        "sigma": sol.sigma,
        "xi": sol.xi.tolist(),
        "eta": sol.eta.tolist(),
        "degenerate": sol.degenerate,
        "residuals": [float(r) for r in res],
        "restarts": sol.restarts_used,
    })
    return 0


def _plan_pipeline(cfg: MissionConfig, path: nlp.WaypointPath, out: Path) -> int:
    opts = _nlp_options(cfg)
    problem = nlp.build_problem(path, cfg.u_max, cfg.g, opts)
    plan = nlp.solve_nlp(problem, opts)
    direct = assemble.direct_interpolation(plan, path, cfg.u_max, cfg.g, cfg.sample_dt)
    pmp = assemble.pmp_refine(
        path, plan.waypoint_velocities, cfg.u_max, cfg.g,
        opts=_solve_options(cfg), sample_dt=cfg.sample_dt,
        segment_time_upper=direct.segment_times,
    )
    prof = assemble.hamiltonian_profile(pmp)
    report = assemble.compare(direct, pmp)
    write_trajectory_csv(out / "direct.csv", direct)
    write_trajectory_csv(out / "pmp.csv", pmp, prof.H)
    write_json(out / "compare.json", {
        "segment_times": {
            "direct": direct.segment_times.tolist(),
            "pmp": pmp.segment_times.tolist(),
        },
        "total_time": {"direct": direct.total_time, "pmp": pmp.total_time},
        "comparison": report.to_dict(),
        "hamiltonian": {
            "per_segment_variation": prof.per_segment_variation.tolist(),
            "jumps": prof.jumps.tolist(),
        },
        "nlp": {
            "kkt_residual": plan.kkt_residual,
            "position_residual": plan.position_residual,
            "M": plan.M,
        },
    })
    return 0


def cmd_plan(cfg: MissionConfig, out: Path) -> int:
    if cfg.waypoints is None:
        raise ValueError("plan config needs 'waypoints'")
    path = nlp.WaypointPath(waypoints=cfg.waypoints, v_start=cfg.v_start, v_end=cfg.v_end)
    return _plan_pipeline(cfg, path, out)


def cmd_survey(cfg: MissionConfig, out: Path) -> int:
    if cfg.survey is None:
        raise ValueError("survey config needs a 'survey' spec")
    path = coverage.decompose(cfg.survey, cfg.v_start, cfg.v_end)
    fx, fy = coverage.footprint(cfg.survey)
    write_json(out / "waypoints.json", {
        "waypoints": path.waypoints.tolist(),
        "footprint": [fx, fy],
        "coverage_fraction": coverage.coverage_fraction(cfg.survey, path.waypoints),
    })
    return _plan_pipeline(cfg, path, out)


def cmd_baseline(cfg: MissionConfig, out: Path) -> int:
    if cfg.waypoints is None:
        raise ValueError("baseline config needs 'waypoints'")
    path = nlp.WaypointPath(waypoints=cfg.waypoints, v_start=cfg.v_start, v_end=cfg.v_end)
    opts = _nlp_options(cfg)
    problem = nlp.build_problem(path, cfg.u_max, cfg.g, opts)
    plan = nlp.solve_nlp(problem, opts)
    pmp = assemble.pmp_refine(
        path, plan.waypoint_velocities, cfg.u_max, cfg.g,
        opts=_solve_options(cfg), sample_dt=cfg.sample_dt,
        segment_time_upper=plan.dt.reshape(-1, plan.M + 1).sum(axis=1),
    )
    times = baseline.allocate_times(path, cfg.u_max, cfg.g)
    segments = baseline.min_snap(path, times)
    snap = baseline.sample_poly(segments, cfg.sample_dt, g=cfg.g, u_max=cfg.u_max,
                                waypoints=path.waypoints)
    peak = baseline.peak_thrust(segments, cfg.g)
    write_trajectory_csv(out / "minsnap.csv", snap)
    write_json(out / "baseline_compare.json", {
        "minsnap_total_time": snap.total_time,
        "pmp_total_time": pmp.total_time,
        "ratio": snap.total_time / pmp.total_time,
        "minsnap_peak_thrust": peak,
        "thrust_feasible": bool(peak <= cfg.u_max + 1e-9),
        "segment_times": {"minsnap": snap.segment_times.tolist(),
                          "pmp": pmp.segment_times.tolist()},
    })
    return 0


_COMMANDS = {
    "solve2pt": cmd_solve2pt,
    "plan": cmd_plan,
    "survey": cmd_survey,
    "baseline": cmd_baseline,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toptraj",
        description="Minimum-time point-mass trajectory planning through waypoints",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="mission config JSON")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--switch-points", type=int, default=None, dest="switch_points")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = json.loads(Path(args.config).read_text())
        cfg = MissionConfig.from_dict(raw)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.switch_points is not None:
            cfg.M = args.switch_points
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        return _COMMANDS[args.command](cfg, out)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PlannerError as exc:
        write_json(out / "error.json", {"error": str(exc)})
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
