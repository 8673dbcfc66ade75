"""Minimum-time point-mass trajectory planning through waypoints under gravity.

Pipeline: two-point PMP steering (steer), switching-point NLP for waypoint
velocities (nlp), continuous assembly and diagnostics (assemble), survey
waypoint generation (coverage), and a minimum-snap baseline (baseline).
"""

from .core import (
    BoundaryPair,
    NormalizedProblem,
    PointState,
    Vec3,
    denormalize,
    gravity_shift,
    normalize,
    propagate_constant,
)
from .errors import ConvergenceError, DegeneracyError, InfeasibleError, PlannerError
from .steer import (
    ScalarCoefficients,
    SolveOptions,
    SteeringSolution,
    closed_form_integrals,
    constant_input_fallback,
    eval_input,
    eval_state,
    recover_vectors,
    residuals,
    scalar_coefficients,
    solve_two_point,
)
from .nlp import (
    NlpOptions,
    SwitchingPlan,
    WaypointPath,
    build_problem,
    initial_guess,
    plan_feasibility_check,
    solve_nlp,
)
from .assemble import (
    HamiltonianProfile,
    Trajectory,
    compare,
    direct_interpolation,
    hamiltonian_profile,
    pmp_refine,
)
from .coverage import SurveySpec, decompose, footprint
from .baseline import PolySegment, allocate_times, min_snap, sample_poly

__version__ = "0.1.0"
