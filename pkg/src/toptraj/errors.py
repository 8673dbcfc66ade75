"""Exception types shared across the planner."""


class PlannerError(Exception):
    """Base class for planner failures."""


class InfeasibleError(PlannerError):
    """Problem cannot be solved with the given input bound (e.g. hover impossible)."""


class DegeneracyError(PlannerError):
    """Parameters hit a singular limit of the closed-form solution (rho -> 0, |sigma| -> 1)."""


class ConvergenceError(PlannerError):
    """No solver candidate met the residual tolerance."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual
