"""Grid containers and the discrete operators driving the evolution equation.

Every quantity lives on a dense row-major float64 grid with unit spacing,
indexed [i, j] (axis 0 first). All stencils are central differences with
replicated edge neighbors, which keeps the operators total on finite fields
and adds no boundary forcing. Operators always allocate fresh outputs and
never mutate their inputs.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

MIN_SIDE = 3
INTENSITY_MAX = 255.0


def _check_grid(arr: np.ndarray, kind: str) -> None:
    if arr.ndim != 2:
        raise ParameterError(f"{kind} must be a 2-D grid, got shape {arr.shape}")
    if min(arr.shape) < MIN_SIDE:
        raise ParameterError(
            f"{kind} must be at least {MIN_SIDE}x{MIN_SIDE}, got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{kind} contains non-finite values")


def as_image(values) -> np.ndarray:
    """Validate and copy a grayscale image grid.

    Intensities stay at their raw 8-bit scale [0, 255]; the fitting term is
    calibrated against that range, so images are never normalized here.
    """
    arr = np.array(values, dtype=np.float64)
    _check_grid(arr, "image")
    if arr.min() < 0.0 or arr.max() > INTENSITY_MAX:
        raise ParameterError("image intensities must lie in [0, 255]")
    return arr


def as_field(values, like: np.ndarray | None = None) -> np.ndarray:
    """Validate and copy a level-set (or velocity) field grid."""
    arr = np.array(values, dtype=np.float64)
    _check_grid(arr, "field")
    if like is not None and arr.shape != like.shape:
        raise ParameterError(
            f"field shape {arr.shape} does not match grid {like.shape}"
        )
    return arr


def as_mask(values, like: np.ndarray | None = None) -> np.ndarray:
    """Validate and copy a boolean region mask."""
    arr = np.array(values)
    if arr.dtype != np.bool_:
        if not np.isin(arr, (0, 1)).all():
            raise ParameterError("mask values must be boolean or 0/1")
        arr = arr.astype(bool)
    if arr.ndim != 2:
        raise ParameterError(f"mask must be a 2-D grid, got shape {arr.shape}")
    if like is not None and arr.shape != like.shape:
        raise ParameterError(
            f"mask shape {arr.shape} does not match grid {like.shape}"
        )
    return arr


def dx(field) -> np.ndarray:
    """Central difference along axis 0, edge neighbors replicated."""
    f = np.asarray(field, dtype=np.float64)
    p = np.pad(f, ((1, 1), (0, 0)), mode="edge")
    return (p[2:, :] - p[:-2, :]) * 0.5


def dy(field) -> np.ndarray:
    """Central difference along axis 1, edge neighbors replicated."""
    f = np.asarray(field, dtype=np.float64)
    p = np.pad(f, ((0, 0), (1, 1)), mode="edge")
    return (p[:, 2:] - p[:, :-2]) * 0.5


def grad_mag(field) -> np.ndarray:
    """Gradient magnitude sqrt(dx^2 + dy^2)."""
    return np.hypot(dx(field), dy(field))


def laplacian(field) -> np.ndarray:
    """Five-point Laplacian with unit spacing and replicated edges."""
    f = np.asarray(field, dtype=np.float64)
    p = np.pad(f, 1, mode="edge")
    return (
        p[2:, 1:-1] + p[:-2, 1:-1] + p[1:-1, 2:] + p[1:-1, :-2] - 4.0 * f
    )


def biharmonic(field) -> np.ndarray:
    """Discrete biharmonic, the five-point Laplacian applied twice."""
    return laplacian(laplacian(field))


def div_flux(field) -> np.ndarray:
    """Divergence of the double-well flux (|grad phi|^2 - 1) grad phi.

    Gradients and the outer divergence both use the central stencils above,
    so the operator is a composition of dx/dy and stays linear-cost.
    """
    gx = dx(field)
    gy = dy(field)
    coef = gx * gx + gy * gy - 1.0
    return dx(coef * gx) + dy(coef * gy)


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not np.isfinite(eps) or eps <= 0.0:
        raise ParameterError(f"eps must be a positive finite scalar, got {eps}")
    return eps


def heaviside(phi, eps: float):
    """Smoothed unit step H_eps(phi) = (1 + (2/pi) arctan(phi/eps)) / 2.

    Strictly increasing with full support; H(0) = 1/2 exactly.
    """
    eps = _check_eps(eps)
    scalar = np.isscalar(phi)
    p = np.asarray(phi, dtype=np.float64)
    out = 0.5 * (1.0 + (2.0 / np.pi) * np.arctan(p / eps))
    return float(out) if scalar else out


def dirac(phi, eps: float):
    """Smoothed delta d/dphi H_eps = (1/pi) eps / (eps^2 + phi^2)."""
    eps = _check_eps(eps)
    scalar = np.isscalar(phi)
    p = np.asarray(phi, dtype=np.float64)
    out = (eps / np.pi) / (eps * eps + p * p)
    return float(out) if scalar else out
