"""Zero-level-set extraction as polylines.

Uses marching squares with linear interpolation (scikit-image's
find_contours) and converts the results to (x, y) image coordinates,
x being the column index. Closed loops repeat their first vertex last.
"""

from __future__ import annotations

import numpy as np
from skimage import measure

from . import grid_ops


def extract_contours(phi, level: float = 0.0) -> list[np.ndarray]:
    """Polylines of the `level` set of phi as (N, 2) float arrays in (x, y)."""
    field = grid_ops.as_field(phi)
    lines = measure.find_contours(field, level=level)
    return [line[:, ::-1].copy() for line in lines]


def polyline_area(polyline: np.ndarray) -> float:
    """Absolute shoelace area of a closed polyline."""
    pts = np.asarray(polyline, dtype=np.float64)
    if pts.shape[0] < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def contours_to_json(contour_list: list[np.ndarray]) -> list[list[list[float]]]:
    return [[[float(x), float(y)] for x, y in line] for line in contour_list]
