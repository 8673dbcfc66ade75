"""Multi-waypoint minimum-time NLP over piecewise-constant unit-norm inputs.

Each of the N-1 waypoint segments is split into M+1 pieces by M switching
points.  Decision variables are per-piece durations (squared reparameterized,
so nonnegativity is automatic) and per-piece input directions (azimuth and
elevation angles, so the norm constraint holds exactly).  Equality
constraints pin the propagated position at every waypoint arrival and the
final velocity; the objective is the total time.  Solved from a feasible
chained two-phase guess by SQP with analytic Jacobians, falling back to an
augmented Lagrangian with an L-BFGS-B inner solver, under seeded multi-start.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .core import PointState, Vec3, as_vec3, propagate_constant
from .errors import ConvergenceError, InfeasibleError


def _softplus(s):
    return np.logaddexp(0.0, s)


def _softplus_inv(dt):
    # inverse of log(1 + exp(s)); stable for small dt
    return dt + np.log(-np.expm1(-dt))


def _sigmoid(s):
    return 0.5 * (1.0 + np.tanh(0.5 * s))


@dataclass(frozen=True)
class WaypointPath:
    """Ordered waypoints with prescribed start/end velocities.

    Coincident consecutive waypoints are dropped with a warning.  Optional
    per-waypoint speed caps bound the speed at each waypoint arrival.
    """

    waypoints: np.ndarray
    v_start: Vec3
    v_end: Vec3
    speed_caps: np.ndarray | None = None

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.waypoints, dtype=float))
        if w.ndim != 2 or w.shape[1] != 3:
            raise ValueError("waypoints must be an (N, 3) array")
        keep = [0]
        for i in range(1, len(w)):
            if np.linalg.norm(w[i] - w[keep[-1]]) < 1e-12:
                warnings.warn(f"dropping coincident waypoint {i}")
                continue
            keep.append(i)
        w = w[keep]
        if len(w) < 2:
            raise ValueError("need at least 2 distinct waypoints")
        w.flags.writeable = False
        object.__setattr__(self, "waypoints", w)
        object.__setattr__(self, "v_start", as_vec3(self.v_start))
        object.__setattr__(self, "v_end", as_vec3(self.v_end))
        if self.speed_caps is not None:
            caps = np.asarray(self.speed_caps, dtype=float)[keep]
            if np.any(caps < 0):
                raise ValueError("speed caps must be nonnegative")
            caps.flags.writeable = False
            object.__setattr__(self, "speed_caps", caps)

    @property
    def n_waypoints(self) -> int:
        return len(self.waypoints)


@dataclass(frozen=True)
class NlpOptions:
    M: int = 1
    position_tol: float = 1e-6
    max_iter: int = 400
    n_starts: int = 8
    penalty_init: float = 10.0
    penalty_growth: float = 10.0
    penalty_max: float = 1e12
    outer_iters: int = 18
    seed: int = 0
    include_gravity: bool = True

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be >= 1")


@dataclass(frozen=True)
class SwitchingPlan:
    """Piece durations, unit input directions, and derived waypoint velocities."""

    M: int
    dt: np.ndarray                  # ((M+1)(N-1),) seconds
    dirs: np.ndarray                # (pieces, 3) unit vectors
    waypoint_velocities: np.ndarray  # (N, 3) m/s
    total_time: float
    kkt_residual: float = float("nan")
    position_residual: float = float("nan")

    @property
    def n_pieces(self) -> int:
        return len(self.dt)


@dataclass
class NlpProblem:
    """Reduced-variable transcription of the switching-point problem.

    Internally normalized by u_max (positions/velocities/gravity divided by
    it) so residual scales are comparable across missions.
    """

    path: WaypointPath
    u_max: float
    g: Vec3
    opts: NlpOptions

    def __post_init__(self):
        self.g = as_vec3(self.g)
        if self.u_max <= 0:
            raise ValueError("u_max must be positive")
        self.N = self.path.n_waypoints
        self.pieces_per_segment = self.opts.M + 1
        self.K = self.pieces_per_segment * (self.N - 1)
        k = 1.0 / self.u_max
        self.w = self.path.waypoints * k
        self.v0 = self.path.v_start * k
        self.vf = self.path.v_end * k
        self.g_eff = self.g * k if self.opts.include_gravity else np.zeros(3)
        # arrival boundary index for waypoints 1..N-1
        self.arrivals = [(n + 1) * self.pieces_per_segment for n in range(self.N - 1)]
        self.n_position_constraints = 3 * (self.N - 1)
        self.n_constraints = self.n_position_constraints + 3

    @property
    def n_decision(self) -> int:
        return 3 * self.K

    # -- decision vector layout: [s_0..s_K-1, theta_0.., phi_0..] with
    # dt = softplus(s) (positive, never a dead gradient) --

    def unpack(self, x: np.ndarray):
        K = self.K
        s = x[:K]
        theta = x[K : 2 * K]
        phi = x[2 * K :]
        dt = _softplus(s)
        cp = np.cos(phi)
        dirs = np.stack([cp * np.cos(theta), cp * np.sin(theta), np.sin(phi)], axis=1)
        return dt, dirs

    def pack(self, dt: np.ndarray, dirs: np.ndarray) -> np.ndarray:
        s = _softplus_inv(np.maximum(dt, 1e-12))
        theta = np.arctan2(dirs[:, 1], dirs[:, 0])
        phi = np.arcsin(np.clip(dirs[:, 2], -1.0, 1.0))
        return np.concatenate([s, theta, phi])

    def propagate(self, dt: np.ndarray, dirs: np.ndarray):
        """Boundary states (K+1 of them) under exact per-piece integration."""
        r = np.empty((self.K + 1, 3))
        v = np.empty((self.K + 1, 3))
        r[0] = self.w[0]
        v[0] = self.v0
        acc = dirs + self.g_eff
        for k in range(self.K):
            v[k + 1] = v[k] + acc[k] * dt[k]
            r[k + 1] = r[k] + v[k] * dt[k] + 0.5 * acc[k] * dt[k] * dt[k]
        return r, v

    def constraints(self, x: np.ndarray) -> np.ndarray:
        dt, dirs = self.unpack(x)
        r, v = self.propagate(dt, dirs)
        c = np.empty(self.n_constraints)
        for n, m in enumerate(self.arrivals):
            c[3 * n : 3 * n + 3] = r[m] - self.w[n + 1]
        c[-3:] = v[self.K] - self.vf
        return c

    def objective(self, x: np.ndarray) -> float:
        return float(np.sum(_softplus(x[: self.K])))

    def objective_grad(self, x: np.ndarray) -> np.ndarray:
        g = np.zeros_like(x)
        g[: self.K] = _sigmoid(x[: self.K])
        return g

    def constraint_jacobian(self, x: np.ndarray) -> np.ndarray:
        """Analytic Jacobian of the constraint vector w.r.t. (s, theta, phi)."""
        K = self.K
        s = x[:K]
        theta = x[K : 2 * K]
        phi = x[2 * K :]
        dt, dirs = self.unpack(x)
        r, v = self.propagate(dt, dirs)
        acc = dirs + self.g_eff
        T = np.concatenate([[0.0], np.cumsum(dt)])
        cp, sp = np.cos(phi), np.sin(phi)
        ct, st = np.cos(theta), np.sin(theta)
        du_dtheta = np.stack([-cp * st, cp * ct, np.zeros(K)], axis=1)
        du_dphi = np.stack([-sp * ct, -sp * st, cp], axis=1)

        J = np.zeros((self.n_constraints, self.n_decision))
        for row0, m, kind in [(3 * n, m, "r") for n, m in enumerate(self.arrivals)] + [
            (self.n_constraints - 3, K, "v")
        ]:
            for k in range(m):
                tail = T[m] - T[k + 1]
                if kind == "r":
                    ddt = v[k + 1] + acc[k] * tail
                    du = dt[k] * (0.5 * dt[k] + tail)
                else:
                    ddt = acc[k]
                    du = dt[k]
                J[row0 : row0 + 3, k] = ddt * _sigmoid(s[k])
                J[row0 : row0 + 3, K + k] = du * du_dtheta[k]
                J[row0 : row0 + 3, 2 * K + k] = du * du_dphi[k]
        return J


def build_problem(path: WaypointPath, u_max: float, g, opts: NlpOptions | None = None) -> NlpProblem:
    opts = opts or NlpOptions()
    if opts.include_gravity and float(np.linalg.norm(np.asarray(g, float))) >= u_max:
        raise InfeasibleError("|g| >= u_max: waypoint problem unsolvable")
    return NlpProblem(path=path, u_max=u_max, g=as_vec3(g), opts=opts)


def initial_guess(path: WaypointPath, u_max: float, g, opts: NlpOptions | None = None):
    """Chained rest-to-rest guess: each segment accelerates along its chord
    for half the segment time and decelerates for the other half, with the
    input directions tilted so gravity is cancelled exactly.

    The chain is exactly feasible when start/end velocities are zero: every
    waypoint is hit at rest, so the solver starts from a feasible point and
    only improves the objective.  Returns (dt, dirs).
    """
    opts = opts or NlpOptions()
    g = as_vec3(g) if opts.include_gravity else np.zeros(3)
    w = path.waypoints
    ppseg = opts.M + 1
    n_accel = (ppseg + 1) // 2  # pieces sharing the acceleration phase
    dt = []
    dirs = []
    for i in range(len(w) - 1):
        chord = w[i + 1] - w[i]
        d = float(np.linalg.norm(chord))
        e = chord / d
        # net accel a1*e (then -a2*e) with the input exactly on the sphere:
        # |a e - g| = u_max  gives  a = +/-e.g + sqrt((e.g)^2 + u_max^2 - |g|^2)
        eg = float(e @ g)
        root = np.sqrt(eg * eg + u_max * u_max - float(g @ g))
        a1 = eg + root
        a2 = -eg + root
        t1 = np.sqrt(2.0 * d * a2 / (a1 * (a1 + a2)))
        t2 = a1 * t1 / a2
        u_acc = a1 * e - g
        u_dec = -a2 * e - g
        for j in range(ppseg):
            accel_phase = j < n_accel
            if accel_phase:
                dt.append(t1 / n_accel)
                u = u_acc
            else:
                dt.append(t2 / (ppseg - n_accel))
                u = u_dec
            dirs.append(u / np.linalg.norm(u))
    return np.asarray(dt), np.asarray(dirs)


def _augmented_lagrangian(problem: NlpProblem, x0: np.ndarray, opts: NlpOptions, ctol: float):
    lam = np.zeros(problem.n_constraints)
    pen = opts.penalty_init
    x = x0.copy()
    prev_cmax = np.inf
    for _ in range(opts.outer_iters):
        def fun(xx):
            c = problem.constraints(xx)
            J = problem.constraint_jacobian(xx)
            mult = lam + pen * c
            val = problem.objective(xx) + lam @ c + 0.5 * pen * float(c @ c)
            grad = problem.objective_grad(xx) + J.T @ mult
            return val, grad

        res = optimize.minimize(
            fun, x, jac=True, method="L-BFGS-B",
            options={"maxiter": opts.max_iter, "ftol": 1e-16, "gtol": 1e-12},
        )
        x = res.x
        c = problem.constraints(x)
        cmax = float(np.max(np.abs(c))) if len(c) else 0.0
        if cmax < ctol and prev_cmax < ctol:
            lam = lam + pen * c
            break
        if cmax < 0.25 * prev_cmax or cmax < ctol:
            lam = lam + pen * c
        else:
            pen = min(pen * opts.penalty_growth, opts.penalty_max)
        prev_cmax = cmax
    c = problem.constraints(x)
    return x, float(np.max(np.abs(c))), _kkt_residual(problem, x)


def _kkt_residual(problem: NlpProblem, x: np.ndarray) -> float:
    """Stationarity of the Lagrangian with least-squares multipliers."""
    J = problem.constraint_jacobian(x)
    gobj = problem.objective_grad(x)
    lam_ls, *_ = np.linalg.lstsq(J.T, -gobj, rcond=None)
    return float(np.max(np.abs(gobj + J.T @ lam_ls)))


def _restore_feasibility(problem: NlpProblem, x: np.ndarray, ctol: float, max_steps: int = 20):
    """Gauss-Newton projection onto the constraint manifold (minimum-norm steps)."""
    x = x.copy()
    if not np.all(np.isfinite(x)):
        return x, float("inf")
    for _ in range(max_steps):
        c = problem.constraints(x)
        if not np.all(np.isfinite(c)):
            return x, float("inf")
        cmax = float(np.max(np.abs(c)))
        if cmax < 0.1 * ctol:
            break
        J = problem.constraint_jacobian(x)
        step, *_ = np.linalg.lstsq(J, -c, rcond=None)
        x = x + step
    c = problem.constraints(x)
    return x, float(np.max(np.abs(c))) if np.all(np.isfinite(c)) else float("inf")


def _solve_from_start(problem: NlpProblem, x0: np.ndarray, opts: NlpOptions, ctol: float):
    """One local solve: SQP plus a feasibility polish, augmented Lagrangian
    as fallback if that still ends infeasible."""
    res = optimize.minimize(
        problem.objective, x0, jac=problem.objective_grad, method="SLSQP",
        constraints=[{"type": "eq", "fun": problem.constraints,
                      "jac": problem.constraint_jacobian}],
        options={"maxiter": opts.max_iter, "ftol": 1e-12},
    )
    x, cmax = _restore_feasibility(problem, res.x, ctol)
    if cmax < ctol:
        return x, cmax, _kkt_residual(problem, x)
    return _augmented_lagrangian(problem, x0, opts, ctol)


def solve_nlp(problem: NlpProblem, opts: NlpOptions | None = None) -> SwitchingPlan:
    """Solve the switching-point NLP; returns the best feasible multi-start plan."""
    opts = opts or problem.opts
    ctol = problem.opts.position_tol / problem.u_max
    dt0, dirs0 = initial_guess(problem.path, problem.u_max, problem.g, problem.opts)
    x_base = problem.pack(dt0, dirs0)
    rng = np.random.default_rng(opts.seed)
    starts = [x_base]
    for _ in range(opts.n_starts - 1):
        pert = x_base.copy()
        pert[: problem.K] *= rng.uniform(0.7, 1.4, problem.K)
        pert[problem.K :] += rng.normal(0.0, 0.3, 2 * problem.K)
        starts.append(pert)

    best = None
    best_c = np.inf
    best_kkt = np.inf
    for x0 in starts:
        x, cmax, kkt = _solve_from_start(problem, x0, opts, ctol)
        best_c = min(best_c, cmax)
        if cmax > ctol:
            continue
        val = problem.objective(x)
        if best is None or val < best[0]:
            best = (val, x)
            best_kkt = kkt
    if best is None:
        raise ConvergenceError(
            f"NLP did not reach waypoint tolerance ({ctol:g} normalized); "
            f"best residual {best_c:g}",
            best_residual=best_c,
        )
    _, x = best
    dt, dirs = problem.unpack(x)
    _, v = problem.propagate(dt, dirs)
    wp_v = np.empty((problem.N, 3))
    wp_v[0] = problem.v0
    for n, m in enumerate(problem.arrivals):
        wp_v[n + 1] = v[m]
    c = problem.constraints(x)
    return SwitchingPlan(
        M=problem.opts.M,
        dt=dt,
        dirs=dirs,
        waypoint_velocities=wp_v * problem.u_max,
        total_time=float(np.sum(dt)),
        kkt_residual=best_kkt,
        position_residual=float(np.max(np.abs(c))) * problem.u_max,
    )


@dataclass(frozen=True)
class FeasibilityReport:
    max_waypoint_miss: float
    max_dir_norm_deviation: float
    negative_durations: list
    collapsed_pieces: list
    ok: bool


def plan_feasibility_check(plan: SwitchingPlan, path: WaypointPath, u_max: float, g) -> FeasibilityReport:
    """Independently re-propagate the plan and report violations."""
    g = as_vec3(g)
    ppseg = plan.M + 1
    state = PointState(path.waypoints[0], path.v_start)
    max_miss = 0.0
    for n in range(path.n_waypoints - 1):
        for j in range(ppseg):
            k = n * ppseg + j
            state = propagate_constant(state, u_max * plan.dirs[k], g, plan.dt[k])
        miss = float(np.linalg.norm(state.r - path.waypoints[n + 1]))
        max_miss = max(max_miss, miss)
    norm_dev = float(np.max(np.abs(np.linalg.norm(plan.dirs, axis=1) - 1.0)))
    negatives = [int(k) for k in np.nonzero(plan.dt < 0)[0]]
    collapsed = [int(k) for k in np.nonzero((plan.dt >= 0) & (plan.dt < 1e-9))[0]]
    ok = max_miss < 10 * max(1e-6, 1e-6 * u_max) and not negatives and norm_dev < 1e-10
    return FeasibilityReport(
        max_waypoint_miss=max_miss,
        max_dir_norm_deviation=norm_dev,
        negative_durations=negatives,
        collapsed_pieces=collapsed,
        ok=ok,
    )
