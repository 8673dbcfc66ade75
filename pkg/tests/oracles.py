"""Independent numerical oracles used by the test suite.

Everything here is deliberately built from first principles with generic
numerics (adaptive quadrature, RK4, convex programming, complex-step
differentiation) so it shares no code paths with the library under test.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad


# ---------------------------------------------------------------------------
# Quadrature oracle for the closed-form steering integrals.
#
# With R(t) = sqrt(rho^2 t^2 - 2 sigma rho t + 1):
#   V_eta = int_0^t 1/R,          V_xi = -int_0^t t'/R
#   X_eta = int_0^t (t - t')/R,   X_xi = -int_0^t (t - t') t'/R
# ---------------------------------------------------------------------------

def _R(tp, rho, sigma):
    return np.sqrt(rho * rho * tp * tp - 2.0 * sigma * rho * tp + 1.0)


def quad_integrals(rho, sigma, t, tol=1e-12):
    """(V_xi, V_eta, X_xi, X_eta) by adaptive quadrature."""
    v_eta = quad(lambda tp: 1.0 / _R(tp, rho, sigma), 0.0, t,
                 epsabs=tol, epsrel=tol, limit=200)[0]
    v_xi = -quad(lambda tp: tp / _R(tp, rho, sigma), 0.0, t,
                 epsabs=tol, epsrel=tol, limit=200)[0]
    x_eta = quad(lambda tp: (t - tp) / _R(tp, rho, sigma), 0.0, t,
                 epsabs=tol, epsrel=tol, limit=200)[0]
    x_xi = -quad(lambda tp: (t - tp) * tp / _R(tp, rho, sigma), 0.0, t,
                 epsabs=tol, epsrel=tol, limit=200)[0]
    return v_xi, v_eta, x_xi, x_eta


# ---------------------------------------------------------------------------
# Fine-step RK4 integration of r'' = u(t) + g for an arbitrary input law.
# ---------------------------------------------------------------------------

def rk4_propagate(r0, v0, u_of_t, g, t_f, n_steps=20000):
    """Integrate the double integrator under u(t); returns (r, v) at t_f."""
    r = np.asarray(r0, float).copy()
    v = np.asarray(v0, float).copy()
    g = np.asarray(g, float)
    h = t_f / n_steps
    t = 0.0
    for _ in range(n_steps):
        a1 = u_of_t(t) + g
        k1r, k1v = v, a1
        a2 = u_of_t(t + 0.5 * h) + g
        k2r, k2v = v + 0.5 * h * k1v, a2
        k3r, k3v = v + 0.5 * h * k2v, a2
        a4 = u_of_t(t + h) + g
        k4r, k4v = v + h * k3v, a4
        r = r + (h / 6.0) * (k1r + 2 * k2r + 2 * k3r + k4r)
        v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        t += h
    return r, v


# ---------------------------------------------------------------------------
# 1D closed forms.
# ---------------------------------------------------------------------------

def bang_bang_rest_to_rest(d, a_accel, a_decel):
    """Minimum time to move distance d>0 from rest to rest with acceleration
    a_accel forward then a_decel backward (both positive magnitudes)."""
    t1 = np.sqrt(2.0 * d * a_decel / (a_accel * (a_accel + a_decel)))
    t2 = a_accel * t1 / a_decel
    return t1 + t2


def vertical_climb_time(d, u_max, g_mag):
    """Min-time 1 D climb of height d against gravity g_mag, thrust u_max."""
    return bang_bang_rest_to_rest(d, u_max - g_mag, u_max + g_mag)


# ---------------------------------------------------------------------------
# Direct-collocation oracle (convex): dense piecewise-constant transcription.
#
# For fixed piece durations the reachability problem
#   hit waypoints/velocities with ||u_k|| <= u_max
# is an SOCP; minimum time is found by bisection on the duration scale.
# The relaxation ||u|| <= u_max of the equality ||u|| = u_max is exact for
# minimum-time problems (time-optimal inputs are boundary controls).
# ---------------------------------------------------------------------------

def _reachable(waypoints, v_start, v_end, g, u_max, seg_times, n_pieces):
    import cvxpy as cp

    # Exact double-integrator response to piecewise-constant input: piece k
    # spans [t_k, t_k + h_k], so at any piece boundary T
    #   v(T) = v0 + g T + sum_k h_k u_k
    #   r(T) = r0 + v0 T + g T^2/2 + sum_k (h_k (T - t_k) - h_k^2/2) u_k
    # which turns each waypoint/velocity hit into one dense linear equality.
    waypoints = np.asarray(waypoints, float)
    g = np.asarray(g, float)
    v0 = np.asarray(v_start, float)
    n_seg = len(waypoints) - 1
    h = np.repeat(np.asarray(seg_times, float) / n_pieces, n_pieces)
    t_k = np.concatenate([[0.0], np.cumsum(h)[:-1]])
    seg_end_t = np.cumsum(np.asarray(seg_times, float))
    u = cp.Variable((len(h), 3))
    cons = [cp.norm(u, 2, axis=1) <= u_max]
    for s in range(n_seg):
        T = seg_end_t[s]
        m = n_pieces * (s + 1)
        w = h[:m] * (T - t_k[:m]) - 0.5 * h[:m] ** 2
        cons.append(
            waypoints[0] + v0 * T + 0.5 * g * T * T + w @ u[:m]
            == waypoints[s + 1]
        )
    T = seg_end_t[-1]
    cons.append(v0 + g * T + h @ u == np.asarray(v_end, float))
    prob = cp.Problem(cp.Minimize(0), cons)
    for solver in (cp.CLARABEL, cp.ECOS, cp.SCS):
        try:
            prob.solve(solver=solver)
        except cp.error.SolverError:
            continue
        if prob.status in ("optimal", "optimal_inaccurate"):
            return True
        if prob.status in ("infeasible", "infeasible_inaccurate"):
            return False
    return False


def collocation_min_time(waypoints, v_start, v_end, g, u_max,
                         seg_fractions=None, n_pieces=200,
                         t_hi=None, tol=1e-4):
    """Minimum total time by bisection on a scaled segment-time profile.

    seg_fractions fixes the relative split of total time between segments
    (defaults to chord-proportional).  Returns the bisected total time.
    """
    waypoints = np.asarray(waypoints, float)
    chords = np.linalg.norm(np.diff(waypoints, axis=0), axis=1)
    if seg_fractions is None:
        seg_fractions = chords / chords.sum()
    seg_fractions = np.asarray(seg_fractions, float)
    seg_fractions = seg_fractions / seg_fractions.sum()

    if t_hi is None:
        t_hi = 4.0 * sum(np.sqrt(4.0 * c / max(u_max - np.linalg.norm(g), 1e-9))
                         for c in chords) + 1.0
    lo, hi = 0.0, float(t_hi)
    assert _reachable(waypoints, v_start, v_end, g, u_max,
                      hi * seg_fractions, n_pieces), "upper bracket infeasible"
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _reachable(waypoints, v_start, v_end, g, u_max,
                      mid * seg_fractions, n_pieces):
            hi = mid
        else:
            lo = mid
    return hi


def collocation_min_time_free_split(waypoints, v_start, v_end, g, u_max,
                                    n_pieces=200, tol=1e-4, split_tol=5e-3):
    """3-waypoint oracle: golden-section over the time split between the two
    segments, bisection on total time inside."""
    assert len(waypoints) == 3

    def total_for(frac):
        return collocation_min_time(waypoints, v_start, v_end, g, u_max,
                                    seg_fractions=[frac, 1.0 - frac],
                                    n_pieces=n_pieces, tol=tol)

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = 0.15, 0.85
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = total_for(c), total_for(d)
    while b - a > split_tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = total_for(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = total_for(d)
    return min(fc, fd)


# ---------------------------------------------------------------------------
# Complex-step differentiation (machine-precision first derivatives for
# complex-safe real functions).
# ---------------------------------------------------------------------------

def complex_step_jacobian(f, x, h=1e-30):
    x = np.asarray(x, float)
    f0 = np.atleast_1d(f(x))
    J = np.empty((f0.size, x.size))
    for j in range(x.size):
        xc = x.astype(complex)
        xc[j] += 1j * h
        J[:, j] = np.imag(np.atleast_1d(f(xc))) / h
    return J
