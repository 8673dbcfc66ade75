"""Zig-zag (boustrophedon) survey waypoint generation for a flat rectangle.

The region of interest is decomposed into a grid of camera-footprint cells
with prescribed image overlap; waypoints are the cell centers at constant
altitude, visited serpentine row by row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Vec3, as_vec3
from .nlp import WaypointPath


@dataclass(frozen=True)
class SurveySpec:
    """Rectangular region of interest plus pinhole camera geometry.

    width runs along +x from origin, height along +y; altitude along +z.
    """

    origin: Vec3
    width: float
    height: float
    altitude: float
    fov_x: float
    fov_y: float
    overlap_x: float = 0.0
    overlap_y: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "origin", as_vec3(self.origin))
        if self.width <= 0 or self.height <= 0:
            raise ValueError("width and height must be positive")
        if self.altitude <= 0:
            raise ValueError("altitude must be positive")
        for f in (self.fov_x, self.fov_y):
            if not 0.0 < f < math.pi:
                raise ValueError("fov angles must lie in (0, pi)")
        for ov in (self.overlap_x, self.overlap_y):
            if not 0.0 <= ov <= 0.95:
                raise ValueError("overlaps must lie in [0, 0.95]")


def footprint(spec: SurveySpec):
    """Ground footprint (fx, fy) of the camera at the survey altitude."""
    fx = 2.0 * spec.altitude * math.tan(spec.fov_x / 2.0)
    fy = 2.0 * spec.altitude * math.tan(spec.fov_y / 2.0)
    return fx, fy


def grid_shape(spec: SurveySpec):
    fx, fy = footprint(spec)
    px = fx * (1.0 - spec.overlap_x)
    py = fy * (1.0 - spec.overlap_y)
    if px <= 0 or py <= 0:
        raise ValueError("degenerate cell pitch")
    return math.ceil(spec.width / px), math.ceil(spec.height / py), px, py


def decompose(spec: SurveySpec, v_start=(0.0, 0.0, 0.0), v_end=(0.0, 0.0, 0.0)) -> WaypointPath:
    """Cell centers in serpentine order at the survey altitude.

    Cells are centered so edge footprints extend symmetrically beyond the
    region, which guarantees coverage with ceil division.
    """
    nx, ny, px, py = grid_shape(spec)
    x0 = spec.origin[0] + (spec.width - (nx - 1) * px) / 2.0
    y0 = spec.origin[1] + (spec.height - (ny - 1) * py) / 2.0
    z = spec.origin[2] + spec.altitude
    pts = []
    for j in range(ny):
        xs = range(nx) if j % 2 == 0 else range(nx - 1, -1, -1)
        for i in xs:
            pts.append([x0 + i * px, y0 + j * py, z])
    waypoints = np.asarray(pts)
    if len(waypoints) == 1:
        # single-cell survey: no touring needed, but a path needs 2 points;
        # hover-in-place is meaningless, so duplicate offset is not added.
        return WaypointPath(
            waypoints=np.vstack([waypoints, waypoints + [1e-9, 0, 0]]),
            v_start=v_start, v_end=v_end,
        )
    return WaypointPath(waypoints=waypoints, v_start=v_start, v_end=v_end)


def coverage_fraction(spec: SurveySpec, waypoints: np.ndarray, n_grid: int = 100) -> float:
    """Fraction of a fine ground grid covered by at least one footprint."""
    fx, fy = footprint(spec)
    gx = np.linspace(spec.origin[0], spec.origin[0] + spec.width, n_grid)
    gy = np.linspace(spec.origin[1], spec.origin[1] + spec.height, n_grid)
    X, Y = np.meshgrid(gx, gy)
    covered = np.zeros_like(X, dtype=bool)
    for w in waypoints:
        covered |= (np.abs(X - w[0]) <= fx / 2.0 + 1e-12) & (np.abs(Y - w[1]) <= fy / 2.0 + 1e-12)
    return float(np.mean(covered))
