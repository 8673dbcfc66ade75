"""Continuous trajectory assembly and diagnostics.

Two routes from a switching plan to a sampled trajectory: direct
interpolation (hold each piece's constant input and integrate exactly) and
per-segment PMP refinement (re-solve each waypoint pair as a continuous
two-point minimum-time problem using the plan's waypoint velocities as
boundary conditions).
"""

from __future__ import annotations

import concurrent.futures
import os
from dataclasses import dataclass, replace

import numpy as np

from .core import BoundaryPair, PointState, Vec3, as_vec3
from .errors import PlannerError
from .nlp import SwitchingPlan, WaypointPath
from . import steer

DEFAULT_SAMPLES = 2000


def worker_count() -> int:
    """Worker parallelism cap, from the TOPT_THREADS environment variable."""
    try:
        n = int(os.environ.get("TOPT_THREADS", "1"))
    except ValueError:
        n = 1
    return max(n, 1)


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped samples of position/velocity/input with segment indices."""

    t: np.ndarray           # (n,)
    r: np.ndarray           # (n, 3)
    v: np.ndarray           # (n, 3)
    u: np.ndarray           # (n, 3)
    segment: np.ndarray     # (n,) int, inter-waypoint segment index
    segment_times: np.ndarray
    total_time: float
    method: str             # direct | pmp | minsnap
    u_max: float
    waypoints: np.ndarray | None = None
    solutions: tuple | None = None  # per-segment SteeringSolution (pmp only)

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("sample times must be strictly increasing")

    @property
    def samples(self):
        """Rows of (t, r, v, u, segment_index)."""
        return list(zip(self.t, self.r, self.v, self.u, self.segment))

    def scaled(self, factor: float) -> "Trajectory":
        return replace(
            self,
            r=self.r * factor,
            v=self.v * factor,
            u=self.u * factor,
            u_max=self.u_max * factor,
            waypoints=None if self.waypoints is None else self.waypoints * factor,
        )


@dataclass(frozen=True)
class HamiltonianProfile:
    t: np.ndarray
    H: np.ndarray
    segment: np.ndarray
    per_segment_variation: np.ndarray   # max - min within each segment
    jumps: np.ndarray                   # |H| discontinuity across waypoints


def _sample_grid(total: float, breakpoints, sample_dt: float | None):
    if sample_dt is None:
        sample_dt = total / DEFAULT_SAMPLES if total > 0 else 1.0
    n = max(int(np.ceil(total / sample_dt)), 1)
    ts = np.linspace(0.0, total, n + 1)
    ts = np.union1d(ts, np.asarray(breakpoints, dtype=float))
    ts = ts[(ts >= 0.0) & (ts <= total + 1e-12)]
    # merge near-duplicates so sample times stay strictly increasing
    keep = [0]
    for i in range(1, len(ts)):
        if ts[i] - ts[keep[-1]] > 1e-12 * max(total, 1.0):
            keep.append(i)
    return ts[keep]


def direct_interpolation(
    plan: SwitchingPlan,
    path: WaypointPath,
    u_max: float,
    g,
    sample_dt: float | None = None,
) -> Trajectory:
    """Hold each plan piece's constant input; exact closed-form states."""
    g = as_vec3(g)
    dt = plan.dt
    K = len(dt)
    ppseg = plan.M + 1
    bounds = np.concatenate([[0.0], np.cumsum(dt)])
    total = bounds[-1]
    # piece boundary states
    r_b = np.empty((K + 1, 3))
    v_b = np.empty((K + 1, 3))
    r_b[0], v_b[0] = path.waypoints[0], path.v_start
    acc = plan.dirs * u_max + g
    for k in range(K):
        v_b[k + 1] = v_b[k] + acc[k] * dt[k]
        r_b[k + 1] = r_b[k] + v_b[k] * dt[k] + 0.5 * acc[k] * dt[k] ** 2
    ts = _sample_grid(total, bounds, sample_dt)
    idx = np.clip(np.searchsorted(bounds, ts, side="right") - 1, 0, K - 1)
    tau = ts - bounds[idx]
    r = r_b[idx] + v_b[idx] * tau[:, None] + 0.5 * acc[idx] * (tau * tau)[:, None]
    v = v_b[idx] + acc[idx] * tau[:, None]
    u = plan.dirs[idx] * u_max
    seg_times = np.array([np.sum(dt[s * ppseg : (s + 1) * ppseg]) for s in range(K // ppseg)])
    return Trajectory(
        t=ts, r=r, v=v, u=u,
        segment=(idx // ppseg).astype(int),
        segment_times=seg_times,
        total_time=float(total),
        method="direct",
        u_max=u_max,
        waypoints=path.waypoints.copy(),
    )


def pmp_refine(
    path: WaypointPath,
    waypoint_velocities: np.ndarray,
    u_max: float,
    g,
    opts: steer.SolveOptions | None = None,
    sample_dt: float | None = None,
    segment_time_upper: np.ndarray | None = None,
) -> Trajectory:
    """Per-segment continuous minimum-time refinement.

    Each consecutive waypoint pair becomes a two-point steering problem with
    the given boundary velocities; velocity continuity across waypoints holds
    by construction.  ``segment_time_upper`` optionally supplies a known
    feasible duration per segment (e.g. the switching plan's), which the
    solver uses to reject slower extremals outright.
    """
    g = as_vec3(g)
    w = path.waypoints
    vels = np.asarray(waypoint_velocities, dtype=float)
    if vels.shape != (len(w), 3):
        raise ValueError("waypoint_velocities must be (N, 3)")
    n_seg = len(w) - 1

    def solve_segment(i):
        b = BoundaryPair(
            start=PointState(w[i], vels[i]),
            end=PointState(w[i + 1], vels[i + 1]),
            g=g,
            u_max=u_max,
        )
        seg_opts = opts or steer.SolveOptions()
        if segment_time_upper is not None:
            seg_opts = replace(seg_opts, t_f_upper=float(segment_time_upper[i]))
        try:
            return steer.solve_two_point(b, seg_opts)
        except PlannerError as exc:
            raise PlannerError(f"segment {i} two-point solve failed: {exc}") from exc

    workers = min(worker_count(), n_seg)
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(solve_segment, range(n_seg)))
    else:
        sols = [solve_segment(i) for i in range(n_seg)]

    seg_times = np.array([s.t_f for s in sols])
    total = float(np.sum(seg_times))
    offsets = np.concatenate([[0.0], np.cumsum(seg_times)])
    n_total = max(int(np.ceil(total / (sample_dt or total / DEFAULT_SAMPLES))), n_seg)

    ts, rs, vs, us, seg_idx = [], [], [], [], []
    for i, sol in enumerate(sols):
        n_i = max(int(round(n_total * sol.t_f / total)), 2) if sol.t_f > 0 else 2
        local = np.linspace(0.0, sol.t_f, n_i + 1)
        if sol.switch_time is not None:
            local = np.union1d(local, [sol.switch_time])
        drop_last = i < n_seg - 1  # next segment supplies the shared sample
        for tl in (local[:-1] if drop_last else local):
            st = steer.eval_state(sol, tl)
            ts.append(offsets[i] + tl)
            rs.append(st.r * u_max)
            vs.append(st.v * u_max)
            us.append(steer.eval_input(sol, tl) * u_max)
            seg_idx.append(i)
    return Trajectory(
        t=np.asarray(ts),
        r=np.asarray(rs),
        v=np.asarray(vs),
        u=np.asarray(us),
        segment=np.asarray(seg_idx, dtype=int),
        segment_times=seg_times,
        total_time=total,
        method="pmp",
        u_max=u_max,
        waypoints=w.copy(),
        solutions=tuple(sols),
    )


def hamiltonian_profile(traj: Trajectory) -> HamiltonianProfile:
    """Normalized Hamiltonian along a PMP trajectory; constant per segment."""
    if traj.method != "pmp" or traj.solutions is None:
        raise ValueError("Hamiltonian profile requires a pmp trajectory")
    offsets = np.concatenate([[0.0], np.cumsum(traj.segment_times)])
    H = np.empty_like(traj.t)
    for i, (ti, si) in enumerate(zip(traj.t, traj.segment)):
        sol = traj.solutions[si]
        tl = min(max(ti - offsets[si], 0.0), sol.t_f)
        H[i] = steer.normalized_hamiltonian(sol, tl)
    n_seg = len(traj.solutions)
    var = np.zeros(n_seg)
    ends = np.zeros(n_seg)
    starts = np.zeros(n_seg)
    for s in range(n_seg):
        mask = traj.segment == s
        hs = H[mask]
        var[s] = float(hs.max() - hs.min()) if len(hs) else 0.0
        starts[s] = hs[0] if len(hs) else 0.0
        ends[s] = hs[-1] if len(hs) else 0.0
    jumps = np.abs(starts[1:] - ends[:-1])
    return HamiltonianProfile(
        t=traj.t.copy(), H=H, segment=traj.segment.copy(),
        per_segment_variation=var, jumps=jumps,
    )


@dataclass(frozen=True)
class CompareReport:
    segment_times_a: np.ndarray
    segment_times_b: np.ndarray
    total_time_a: float
    total_time_b: float
    total_time_delta: float
    max_position_deviation: float
    max_velocity_deviation: float

    def to_dict(self) -> dict:
        return {
            "segment_times_a": self.segment_times_a.tolist(),
            "segment_times_b": self.segment_times_b.tolist(),
            "total_time_a": self.total_time_a,
            "total_time_b": self.total_time_b,
            "total_time_delta": self.total_time_delta,
            "max_position_deviation": self.max_position_deviation,
            "max_velocity_deviation": self.max_velocity_deviation,
        }


def _segment_interp(traj: Trajectory, s: int, taus: np.ndarray):
    """Interpolate r, v within segment s at normalized arc-times."""
    mask = traj.segment == s
    t = traj.t[mask]
    span = t[-1] - t[0]
    tq = t[0] + taus * span
    r = np.stack([np.interp(tq, t, traj.r[mask][:, i]) for i in range(3)], axis=1)
    v = np.stack([np.interp(tq, t, traj.v[mask][:, i]) for i in range(3)], axis=1)
    return r, v


def compare(traj_a: Trajectory, traj_b: Trajectory, n_matched: int = 50) -> CompareReport:
    """Per-segment time table and matched normalized-time deviations."""
    if traj_a.waypoints is None or traj_b.waypoints is None:
        raise ValueError("both trajectories must carry their waypoint path")
    if traj_a.waypoints.shape != traj_b.waypoints.shape or not np.allclose(
        traj_a.waypoints, traj_b.waypoints, atol=1e-9
    ):
        raise ValueError("trajectories cover different waypoint paths")
    n_seg = len(traj_a.segment_times)
    taus = np.linspace(0.0, 1.0, n_matched)
    max_dr = 0.0
    max_dv = 0.0
    for s in range(n_seg):
        ra, va = _segment_interp(traj_a, s, taus)
        rb, vb = _segment_interp(traj_b, s, taus)
        max_dr = max(max_dr, float(np.max(np.linalg.norm(ra - rb, axis=1))))
        max_dv = max(max_dv, float(np.max(np.linalg.norm(va - vb, axis=1))))
    return CompareReport(
        segment_times_a=traj_a.segment_times.copy(),
        segment_times_b=traj_b.segment_times.copy(),
        total_time_a=traj_a.total_time,
        total_time_b=traj_b.total_time,
        total_time_delta=traj_a.total_time - traj_b.total_time,
        max_position_deviation=max_dr,
        max_velocity_deviation=max_dv,
    )
