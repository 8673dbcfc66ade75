"""Shared domain types, unit scaling, and exact constant-input propagation.

All internal computation elsewhere in the package runs in input-normalized
units (u_max = 1): positions, velocities and gravity are divided by the
acceleration bound while time is untouched.  SI conversion happens only at
API edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# A 3-vector is a read-only float64 numpy array of shape (3,).
Vec3 = np.ndarray


def as_vec3(value) -> Vec3:
    """Coerce ``value`` to a read-only float64 (3,) array; reject non-finite input."""
    a = np.array(value, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector components must be finite")
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PointState:
    """Position and velocity of the point mass at an instant."""

    r: Vec3
    v: Vec3

    def __post_init__(self):
        object.__setattr__(self, "r", as_vec3(self.r))
        object.__setattr__(self, "v", as_vec3(self.v))

    def scaled(self, factor: float) -> "PointState":
        return PointState(self.r * factor, self.v * factor)


@dataclass(frozen=True)
class BoundaryPair:
    """Two-point steering problem: start/end states, gravity, input bound."""

    start: PointState
    end: PointState
    g: Vec3
    u_max: float

    def __post_init__(self):
        object.__setattr__(self, "g", as_vec3(self.g))
        if not (np.isfinite(self.u_max) and self.u_max > 0):
            raise ValueError("u_max must be a positive finite number")

    @property
    def hover_feasible(self) -> bool:
        """Whether the input bound can counteract gravity (required for the
        gravity-aligned degenerate hover case)."""
        return float(np.linalg.norm(self.g)) < self.u_max


@dataclass(frozen=True)
class NormalizedProblem:
    """A BoundaryPair rescaled so the input bound is exactly 1.

    ``scale`` keeps the original u_max for round-tripping back to SI.
    """

    start: PointState
    end: PointState
    g: Vec3
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "g", as_vec3(self.g))
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError("scale must be a positive finite number")

    @property
    def u_max(self) -> float:
        return 1.0

    @property
    def hover_feasible(self) -> bool:
        return float(np.linalg.norm(self.g)) < 1.0


def normalize(p: BoundaryPair) -> NormalizedProblem:
    """Divide positions, velocities and gravity by p.u_max; time is untouched."""
    k = 1.0 / p.u_max
    return NormalizedProblem(
        start=p.start.scaled(k),
        end=p.end.scaled(k),
        g=p.g * k,
        scale=p.u_max,
    )


def denormalize(p: NormalizedProblem, obj=None):
    """Scale ``obj`` (or the problem itself) back to SI units.

    Accepts a PointState, or any object exposing ``scaled(factor)`` (e.g. a
    Trajectory).  With ``obj=None`` the original BoundaryPair is rebuilt.
    """
    if p.scale <= 0:
        raise ValueError("scale must be positive")
    if obj is None:
        return BoundaryPair(
            start=p.start.scaled(p.scale),
            end=p.end.scaled(p.scale),
            g=p.g * p.scale,
            u_max=p.scale,
        )
    if isinstance(obj, PointState):
        return obj.scaled(p.scale)
    if hasattr(obj, "scaled"):
        return obj.scaled(p.scale)
    raise TypeError(f"cannot denormalize object of type {type(obj).__name__}")


def propagate_constant(s: PointState, u: Vec3, g: Vec3, dt: float) -> PointState:
    """Exact propagation under a constant input: effective acceleration u + g."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    u = np.asarray(u, dtype=float)
    g = np.asarray(g, dtype=float)
    a = u + g
    v1 = s.v + a * dt
    r1 = s.r + s.v * dt + 0.5 * a * dt * dt
    return PointState(r1, v1)


def gravity_shift(b: BoundaryPair, t_f: float) -> BoundaryPair:
    """Zero-gravity image of ``b`` over horizon ``t_f``.

    The substitution v~ = v - g t, r~ = r - g t^2/2 removes gravity from the
    dynamics, so a control is feasible/optimal for one problem iff for the
    other.
    """
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    end = PointState(
        b.end.r - b.g * (t_f * t_f / 2.0),
        b.end.v - b.g * t_f,
    )
    return BoundaryPair(start=b.start, end=end, g=np.zeros(3), u_max=b.u_max)
