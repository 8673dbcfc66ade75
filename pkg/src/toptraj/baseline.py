"""Minimum-snap polynomial baseline with thrust-fair time allocation.

Seventh-order polynomials per axis and segment minimize the integrated
squared fourth derivative subject to waypoint interpolation, prescribed end
velocities, and continuity of derivatives 1-4 at interior waypoints; the
equality-constrained quadratic problem is solved via its KKT system.
Segment times are uniformly rescaled until the peak commanded thrust
|d2r/dt2 - g| sits just under the input bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assemble import Trajectory, _sample_grid
from .core import as_vec3
from .nlp import WaypointPath

_DEG = 7
_NC = _DEG + 1


@dataclass(frozen=True)
class PolySegment:
    """One segment: coeffs[axis, k] multiplies tau^k on local time [0, duration]."""

    coeffs: np.ndarray  # (3, 8)
    duration: float

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (3, _NC):
            raise ValueError("coeffs must be (3, 8)")
        if not (self.duration > 0 and np.isfinite(self.duration)):
            raise ValueError("duration must be positive")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def eval(self, tau, deriv: int = 0) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        out = np.zeros((len(tau), 3))
        for k in range(deriv, _NC):
            fac = math.factorial(k) / math.factorial(k - deriv)
            out += fac * np.outer(tau ** (k - deriv), self.coeffs[:, k])
        return out


def _basis_row(t: float, deriv: int) -> np.ndarray:
    row = np.zeros(_NC)
    for k in range(deriv, _NC):
        row[k] = math.factorial(k) / math.factorial(k - deriv) * t ** (k - deriv)
    return row


def _snap_cost_block(T: float) -> np.ndarray:
    Q = np.zeros((_NC, _NC))
    for k in range(4, _NC):
        for l in range(4, _NC):
            fk = math.factorial(k) / math.factorial(k - 4)
            fl = math.factorial(l) / math.factorial(l - 4)
            Q[k, l] = fk * fl * T ** (k + l - 7) / (k + l - 7)
    return Q


def min_snap(path: WaypointPath, segment_times) -> list[PolySegment]:
    """Minimum-snap polynomials through the waypoints with given times."""
    times = np.asarray(segment_times, dtype=float)
    n_seg = path.n_waypoints - 1
    if len(times) != n_seg or np.any(times <= 0):
        raise ValueError("need N-1 positive segment times")
    w = path.waypoints
    nv = _NC * n_seg
    Q = np.zeros((nv, nv))
    for i, T in enumerate(times):
        sl = slice(_NC * i, _NC * (i + 1))
        Q[sl, sl] = _snap_cost_block(T)

    rows, rhs = [], []

    def add(seg: int, t: float, deriv: int, value):
        row = np.zeros(nv)
        row[_NC * seg : _NC * (seg + 1)] = _basis_row(t, deriv)
        rows.append(row)
        rhs.append(value)

    def add_cont(seg: int, deriv: int):
        row = np.zeros(nv)
        row[_NC * seg : _NC * (seg + 1)] = _basis_row(times[seg], deriv)
        row[_NC * (seg + 1) : _NC * (seg + 2)] -= _basis_row(0.0, deriv)
        rows.append(row)
        rhs.append(np.zeros(3))

    for i in range(n_seg):
        add(i, 0.0, 0, w[i])
        add(i, times[i], 0, w[i + 1])
    add(0, 0.0, 1, path.v_start)
    add(n_seg - 1, times[-1], 1, path.v_end)
    for i in range(n_seg - 1):
        for d in range(1, 5):
            add_cont(i, d)

    A = np.asarray(rows)
    b = np.asarray(rhs)  # (mc, 3)
    mc = len(A)
    KKT = np.zeros((nv + mc, nv + mc))
    KKT[:nv, :nv] = 2.0 * Q
    KKT[:nv, nv:] = A.T
    KKT[nv:, :nv] = A
    rhs_full = np.vstack([np.zeros((nv, 3)), b])
    try:
        sol = np.linalg.solve(KKT, rhs_full)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular constraint system: {exc}") from exc
    coeffs = sol[:nv]  # (nv, 3)
    segments = []
    for i, T in enumerate(times):
        c = coeffs[_NC * i : _NC * (i + 1)].T  # (3, 8)
        segments.append(PolySegment(coeffs=c, duration=float(T)))
    return segments


def peak_thrust(segments: list[PolySegment], g, n_dense: int = 400) -> float:
    """Densely sampled maximum of |d2r/dt2 - g| over all segments."""
    g = as_vec3(g)
    peak = 0.0
    for seg in segments:
        tau = np.linspace(0.0, seg.duration, n_dense)
        acc = seg.eval(tau, deriv=2)
        peak = max(peak, float(np.max(np.linalg.norm(acc - g, axis=1))))
    return peak


def allocate_times(path: WaypointPath, u_max: float, g, margin: float = 0.02,
                   max_iter: int = 60) -> np.ndarray:
    """Segment times making the min-snap solution thrust-fair.

    Starts from a distance-proportional allocation and scales all times
    uniformly until the peak commanded thrust equals u_max*(1 - margin).
    """
    g = as_vec3(g)
    gn = float(np.linalg.norm(g))
    target = u_max * (1.0 - margin)
    if target <= gn:
        raise ValueError("thrust target below hover thrust; reduce margin or |g|")
    w = path.waypoints
    d = np.linalg.norm(np.diff(w, axis=0), axis=1)
    a_eff = u_max - gn
    times = 2.0 * np.sqrt(d / a_eff)

    def peak_at(scale):
        return peak_thrust(min_snap(path, times * scale), g)

    # bracket the scale: peak decreases toward |g| as times grow
    lo, hi = 1.0, 1.0
    p = peak_at(1.0)
    if p > target:
        while peak_at(hi) > target and hi < 1e6:
            hi *= 2.0
    else:
        while peak_at(lo) < target and lo > 1e-6:
            lo /= 2.0
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        p = peak_at(mid)
        if p > target:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-6:
            break
    scale = hi  # feasible side: peak <= target
    return times * scale


def sample_poly(segments: list[PolySegment], sample_dt: float | None = None,
                g=(0.0, 0.0, 0.0), u_max: float | None = None,
                waypoints: np.ndarray | None = None) -> Trajectory:
    """Sampled trajectory with u(t) = d2r/dt2 - g, tagged minsnap."""
    g = as_vec3(g)
    durs = np.array([s.duration for s in segments])
    bounds = np.concatenate([[0.0], np.cumsum(durs)])
    total = float(bounds[-1])
    ts = _sample_grid(total, bounds, sample_dt)
    idx = np.clip(np.searchsorted(bounds, ts, side="right") - 1, 0, len(segments) - 1)
    r = np.empty((len(ts), 3))
    v = np.empty((len(ts), 3))
    u = np.empty((len(ts), 3))
    for i, (t, k) in enumerate(zip(ts, idx)):
        tau = t - bounds[k]
        r[i] = segments[k].eval(tau, 0)[0]
        v[i] = segments[k].eval(tau, 1)[0]
        u[i] = segments[k].eval(tau, 2)[0] - g
    return Trajectory(
        t=ts, r=r, v=v, u=u,
        segment=idx.astype(int),
        segment_times=durs,
        total_time=total,
        method="minsnap",
        u_max=u_max if u_max is not None else float(np.max(np.linalg.norm(u, axis=1))),
        waypoints=None if waypoints is None else np.asarray(waypoints, dtype=float),
    )
