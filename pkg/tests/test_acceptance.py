"""End-to-end acceptance suite.

One test per criterion; each prints a single PASS/FAIL line (visible with
``pytest -v`` as the test verdict, and with ``-s`` as an explicit summary
line with the measured numbers).  Expected values come from independent
oracles in ``oracles.py`` (adaptive quadrature, RK4 integration, bang-bang
closed forms, convex collocation), never from the code under test.
"""

import json
import math
import sys
import time

import numpy as np
import pytest

from oracles import (
    bang_bang_rest_to_rest,
    collocation_min_time,
    collocation_min_time_free_split,
    quad_integrals,
)
from toptraj import (
    BoundaryPair,
    NlpOptions,
    PointState,
    SolveOptions,
    WaypointPath,
    allocate_times,
    build_problem,
    closed_form_integrals,
    direct_interpolation,
    eval_input,
    eval_state,
    gravity_shift,
    hamiltonian_profile,
    min_snap,
    normalize,
    pmp_refine,
    sample_poly,
    solve_nlp,
    solve_two_point,
)
from toptraj.cli import main as cli_main
from toptraj.errors import ConvergenceError, PlannerError


def _report(num: int, label: str, ok: bool, detail: str):
    verdict = "PASS" if ok else "FAIL"
    print(f"[criterion {num:2d}] {label}: {verdict} ({detail})", flush=True)
    assert ok, f"criterion {num} {label}: {detail}"


def _lawnmower(n_rows: int, row_len: float, spacing: float, z: float = 5.0):
    """Serpentine course: two waypoints per row, alternating direction."""
    pts = []
    for i in range(n_rows):
        x0, x1 = 0.0, row_len
        if i % 2:
            x0, x1 = x1, x0
        pts.append([x0, i * spacing, z])
        pts.append([x1, i * spacing, z])
    return np.asarray(pts, dtype=float)


# Shared course for criteria 5-7: 10-waypoint zig-zag, high thrust-to-weight.
COURSE_WPS = _lawnmower(5, 6.0, 2.0)
COURSE_U = 30.0
COURSE_G = np.array([0.0, 0.0, -9.8])


@pytest.fixture(scope="module")
def course_plans():
    path = WaypointPath(waypoints=COURSE_WPS, v_start=[0, 0, 0], v_end=[0, 0, 0])
    plans = {}
    for M in (1, 4):
        opts = NlpOptions(M=M, seed=0)
        plans[M] = solve_nlp(build_problem(path, COURSE_U, COURSE_G, opts))
    return path, plans


@pytest.fixture(scope="module")
def course_trajs(course_plans):
    path, plans = course_plans
    plan = plans[1]
    direct = direct_interpolation(plan, path, COURSE_U, COURSE_G)
    pmp = pmp_refine(
        path,
        plan.waypoint_velocities,
        COURSE_U,
        COURSE_G,
        segment_time_upper=direct.segment_times,
    )
    return direct, pmp


def test_criterion_01_two_point_analytic():
    t0 = time.perf_counter()
    b = BoundaryPair(
        start=PointState([0, 0, 0], [0, 0, 0]),
        end=PointState([1, 0, 0], [0, 0, 0]),
        g=[0, 0, 0],
        u_max=1.0,
    )
    t_flat = solve_two_point(b).t_f
    climb = BoundaryPair(
        start=PointState([0, 0, 0], [0, 0, 0]),
        end=PointState([0, 0, 1], [0, 0, 0]),
        g=[0, 0, -9.8],
        u_max=10.5,
    )
    t_climb = solve_two_point(climb).t_f
    # climbing: net accel u-g then braking at u+g
    t_ref = bang_bang_rest_to_rest(1.0, 10.5 - 9.8, 10.5 + 9.8)
    wall = time.perf_counter() - t0
    ok = abs(t_flat - 2.0) < 1e-6 and abs(t_climb - t_ref) < 1e-4 and wall < 1.0
    _report(
        1,
        "two-point analytic",
        ok,
        f"flat t_f={t_flat:.8f} (exp 2), climb t_f={t_climb:.6f} "
        f"(exp {t_ref:.6f}), {wall:.2f}s",
    )


def test_criterion_02_boundary_reproduction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    n_cases, n_conv = 200, 0
    worst_state, worst_unorm = 0.0, 0.0
    opts = SolveOptions(max_restarts=32, seed=0)
    for _ in range(n_cases):
        g = rng.normal(size=3)
        g *= rng.uniform(0.0, 0.93) / np.linalg.norm(g)
        b = BoundaryPair(
            start=PointState(rng.normal(scale=2.0, size=3), rng.normal(size=3)),
            end=PointState(rng.normal(scale=2.0, size=3), rng.normal(size=3)),
            g=g,
            u_max=1.0,
        )
        try:
            sol = solve_two_point(b, opts)
        except (ConvergenceError, PlannerError):
            continue
        n_conv += 1
        end = eval_state(sol, sol.t_f)
        err = max(
            float(np.max(np.abs(end.r - b.end.r))),
            float(np.max(np.abs(end.v - b.end.v))),
        )
        worst_state = max(worst_state, err)
        ts = np.linspace(0.0, sol.t_f, 1000)
        unorm = np.array([np.linalg.norm(eval_input(sol, t)) for t in ts])
        worst_unorm = max(worst_unorm, float(np.max(np.abs(unorm - 1.0))))
    wall = time.perf_counter() - t0
    rate = n_conv / n_cases
    ok = rate >= 0.95 and worst_state < 1e-6 and worst_unorm < 1e-9 and wall < 120
    _report(
        2,
        "boundary reproduction",
        ok,
        f"converged {n_conv}/{n_cases}, max state err {worst_state:.2e}, "
        f"max |u|-1 {worst_unorm:.2e}, {wall:.1f}s",
    )


def test_criterion_03_integrals_vs_quadrature():
    t0 = time.perf_counter()
    worst = 0.0
    for rho in np.linspace(0.05, 8.0, 20):
        for sigma in np.linspace(-0.97, 0.97, 20):
            for t in np.linspace(0.05, 3.0, 10):
                _, v_xi, v_eta, x_xi, x_eta = closed_form_integrals(rho, sigma, t)
                ref = quad_integrals(rho, sigma, t)
                worst = max(
                    worst,
                    abs(v_xi - ref[0]),
                    abs(v_eta - ref[1]),
                    abs(x_xi - ref[2]),
                    abs(x_eta - ref[3]),
                )
    wall = time.perf_counter() - t0
    ok = worst < 1e-8 and wall < 30
    _report(
        3,
        "closed form vs quadrature",
        ok,
        f"max err {worst:.2e} on 20x20x10 grid, {wall:.1f}s",
    )


def test_criterion_04_gravity_shift_equivalence():
    # Moderate speeds and |g| keep horizons short; over long horizons the
    # zero-g image can acquire a faster extremal of its own that is not the
    # image of any gravity-problem extremal, and the identity breaks.
    rng = np.random.default_rng(11)
    worst_t, worst_u = 0.0, 0.0
    for _ in range(50):
        g = rng.normal(size=3)
        g *= rng.uniform(0.1, 0.8) / np.linalg.norm(g)
        b = BoundaryPair(
            start=PointState(rng.normal(scale=2.0, size=3), rng.normal(scale=0.5, size=3)),
            end=PointState(rng.normal(scale=2.0, size=3), rng.normal(scale=0.5, size=3)),
            g=g,
            u_max=1.0,
        )
        sol = solve_two_point(b)
        shifted = gravity_shift(b, sol.t_f)
        sol0 = solve_two_point(shifted)
        worst_t = max(worst_t, abs(sol.t_f - sol0.t_f))
        for t in np.linspace(0.0, min(sol.t_f, sol0.t_f), 25):
            du = np.max(np.abs(eval_input(sol, t) - eval_input(sol0, t)))
            worst_u = max(worst_u, float(du))
    ok = worst_t < 1e-8 and worst_u < 1e-8
    _report(
        4,
        "gravity-shift equivalence",
        ok,
        f"max dt_f {worst_t:.2e}, max du {worst_u:.2e} over 50 cases",
    )


def test_criterion_05_nlp_vs_pmp_dominance(course_plans, course_trajs):
    t0 = time.perf_counter()
    _, plans = course_plans
    direct, pmp = course_trajs
    seg_margin = float(
        np.max(pmp.segment_times / direct.segment_times)
    )
    ratio = direct.total_time / pmp.total_time
    wall = time.perf_counter() - t0
    ok = seg_margin <= 1.0 + 1e-3 and 1.0 <= ratio <= 1.10 and wall < 300
    _report(
        5,
        "NLP vs PMP dominance",
        ok,
        f"10 waypoints, max per-seg t_pmp/t_nlp {seg_margin:.6f}, "
        f"direct/pmp total {ratio:.4f}, {wall:.1f}s",
    )


def test_criterion_06_switching_point_study(course_plans):
    _, plans = course_plans
    t1, t4 = plans[1].total_time, plans[4].total_time
    gap = (t1 - t4) / t1
    ok = t4 <= t1 + 1e-6 and abs(t1 - t4) / t1 < 0.02
    _report(
        6,
        "switching-point study",
        ok,
        f"M=1 {t1:.6f}s, M=4 {t4:.6f}s, gap {gap * 100:.2f}% (< 2%)",
    )


def test_criterion_07_hamiltonian_constancy(course_trajs):
    _, pmp = course_trajs
    prof = hamiltonian_profile(pmp)
    scale = np.array(
        [np.max(np.abs(prof.H[prof.segment == s])) for s in range(len(prof.per_segment_variation))]
    )
    rel_var = float(np.max(prof.per_segment_variation / np.maximum(scale, 1e-300)))
    jumps = ", ".join(f"{j:.3f}" for j in prof.jumps)
    ok = rel_var < 1e-6
    _report(
        7,
        "Hamiltonian constancy",
        ok,
        f"max relative in-segment variation {rel_var:.2e}; jumps [{jumps}]",
    )


def test_criterion_08_baseline_comparison():
    wps = _lawnmower(3, 30.0, 6.0)
    u_max, g = 30.0, COURSE_G
    path = WaypointPath(waypoints=wps, v_start=[0, 0, 0], v_end=[0, 0, 0])
    plan = solve_nlp(build_problem(path, u_max, g, NlpOptions(M=1, seed=0)))
    direct = direct_interpolation(plan, path, u_max, g)
    pmp = pmp_refine(
        path,
        plan.waypoint_velocities,
        u_max,
        g,
        segment_time_upper=direct.segment_times,
    )
    times = allocate_times(path, u_max, g)
    snap = sample_poly(min_snap(path, times), g=g, u_max=u_max, waypoints=wps)
    ratio = snap.total_time / pmp.total_time
    ok = 1.05 <= ratio <= 1.5
    _report(
        8,
        "baseline comparison",
        ok,
        f"minsnap {snap.total_time:.3f}s / pmp {pmp.total_time:.3f}s "
        f"= {ratio:.3f} (exp in [1.05, 1.5])",
    )


def test_criterion_09_oracle_equivalence():
    t0 = time.perf_counter()
    g0 = np.zeros(3)
    g = COURSE_G
    cases = [
        ("2wp rest g=0", [[0, 0, 0], [1, 0, 0]], [0, 0, 0], [0, 0, 0], g0, 1.0, False),
        ("2wp flying", [[0, 0, 5], [3, 1, 6]], [1, 0, 0], [0, 1, 0], g, 12.0, False),
        ("2wp diagonal", [[0, 0, 5], [2, 2, 4]], [0, 0, 0], [0, 0, 0], g, 11.0, False),
        ("3wp collinear g=0", [[0, 0, 0], [1, 0, 0], [2, 0, 0]], [0, 0, 0], [0, 0, 0], g0, 1.0, True),
        ("3wp L-shape", [[0, 0, 5], [2, 0, 5], [2, 2, 5]], [0, 0, 0], [0, 0, 0], g, 12.0, True),
    ]
    worst = 0.0
    details = []
    for name, wps, v0, v1, gg, um, free_split in cases:
        path = WaypointPath(waypoints=np.asarray(wps, float), v_start=v0, v_end=v1)
        best = math.inf
        for M in (4, 7):
            plan = solve_nlp(
                build_problem(path, um, gg, NlpOptions(M=M, seed=0, n_starts=4))
            )
            best = min(best, plan.total_time)
        if free_split:
            oracle = collocation_min_time_free_split(
                wps, v0, v1, gg, um, n_pieces=200, tol=2e-4
            )
        else:
            oracle = collocation_min_time(wps, v0, v1, gg, um, n_pieces=200, tol=2e-4)
        rel = abs(best - oracle) / oracle
        worst = max(worst, rel)
        details.append(f"{name} {rel * 100:+.2f}%")
    wall = time.perf_counter() - t0
    ok = worst < 0.01 and wall < 600
    _report(
        9,
        "oracle equivalence",
        ok,
        f"max |rel| {worst * 100:.2f}% [{'; '.join(details)}], {wall:.0f}s",
    )


def test_criterion_10_cli_determinism(tmp_path):
    configs = {
        "solve2pt": {
            "u_max": 10.5,
            "g": [0, 0, -9.8],
            "start": {"r": [0, 0, 0], "v": [0, 0, 0]},
            "end": {"r": [0, 0, 1], "v": [0, 0, 0]},
        },
        "plan": {
            "u_max": 20.0,
            "g": [0, 0, -9.8],
            "waypoints": [[0, 0, 5], [6, 0, 5], [6, 2, 5], [0, 2, 5]],
            "M": 2,
            "seed": 3,
        },
        "survey": {
            "u_max": 20.0,
            "g": [0, 0, -9.8],
            "survey": {
                "origin": [0, 0, 0],
                "width": 12.0,
                "height": 8.0,
                "altitude": 5.0,
                "fov_x": math.radians(60),
                "fov_y": math.radians(45),
                "overlap_x": 0.1,
                "overlap_y": 0.1,
            },
        },
        "baseline": {
            "u_max": 20.0,
            "g": [0, 0, -9.8],
            "waypoints": [[0, 0, 5], [6, 0, 5], [6, 2, 5], [0, 2, 5]],
            "seed": 3,
        },
    }
    all_ok = True
    checked = []
    for cmd, cfg in configs.items():
        cfg_path = tmp_path / f"{cmd}.json"
        cfg_path.write_text(json.dumps(cfg))
        runs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{cmd}_{tag}"
            rc = cli_main([cmd, "--config", str(cfg_path), "--out", str(out)])
            assert rc == 0, f"{cmd} exited {rc}"
            runs.append(
                {p.name: p.read_bytes() for p in sorted(out.iterdir())}
            )
        same = runs[0] == runs[1]
        all_ok = all_ok and same
        checked.append(f"{cmd}:{'=' if same else '!='}({len(runs[0])} files)")
    _report(10, "CLI determinism", all_ok, ", ".join(checked))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
