"""Stencil operators checked against naive double-loop references.

The references index with explicit edge clamping, so any disagreement in
boundary handling between the vectorized operators and the documented
replicate-edge convention shows up immediately.
"""

from __future__ import annotations

import numpy as np
import pytest

from levelseg import grid_ops
from levelseg.errors import ParameterError


def _clamped(arr: np.ndarray, i: int, j: int) -> float:
    h, w = arr.shape
    return float(arr[min(max(i, 0), h - 1), min(max(j, 0), w - 1)])


def _naive_dx(arr: np.ndarray) -> np.ndarray:
    out = np.zeros_like(arr, dtype=np.float64)
    for i in range(arr.shape[0]):
        for j in range(arr.shape[1]):
            out[i, j] = 0.5 * (_clamped(arr, i + 1, j) - _clamped(arr, i - 1, j))
    return out


def _naive_dy(arr: np.ndarray) -> np.ndarray:
    out = np.zeros_like(arr, dtype=np.float64)
    for i in range(arr.shape[0]):
        for j in range(arr.shape[1]):
            out[i, j] = 0.5 * (_clamped(arr, i, j + 1) - _clamped(arr, i, j - 1))
    return out


def _naive_laplacian(arr: np.ndarray) -> np.ndarray:
    out = np.zeros_like(arr, dtype=np.float64)
    for i in range(arr.shape[0]):
        for j in range(arr.shape[1]):
            out[i, j] = (
                _clamped(arr, i + 1, j)
                + _clamped(arr, i - 1, j)
                + _clamped(arr, i, j + 1)
                + _clamped(arr, i, j - 1)
                - 4.0 * arr[i, j]
            )
    return out


def _naive_div_flux(arr: np.ndarray) -> np.ndarray:
    gx = _naive_dx(arr)
    gy = _naive_dy(arr)
    coef = gx * gx + gy * gy - 1.0
    return _naive_dx(coef * gx) + _naive_dy(coef * gy)


def _random_grids() -> list[np.ndarray]:
    rng = np.random.default_rng(11)
    shapes = [(3, 3), (4, 7), (9, 5), (12, 12)]
    return [rng.normal(scale=3.0, size=shape) for shape in shapes]


def test_dx_matches_naive_reference() -> None:
    for f in _random_grids():
        assert np.allclose(grid_ops.dx(f), _naive_dx(f), atol=1e-12)


def test_dy_matches_naive_reference() -> None:
    for f in _random_grids():
        assert np.allclose(grid_ops.dy(f), _naive_dy(f), atol=1e-12)


def test_laplacian_matches_naive_reference() -> None:
    for f in _random_grids():
        assert np.allclose(grid_ops.laplacian(f), _naive_laplacian(f), atol=1e-12)


def test_biharmonic_matches_iterated_naive_laplacian() -> None:
    for f in _random_grids():
        expected = _naive_laplacian(_naive_laplacian(f))
        assert np.allclose(grid_ops.biharmonic(f), expected, atol=1e-11)


def test_div_flux_matches_naive_composition() -> None:
    for f in _random_grids():
        assert np.allclose(grid_ops.div_flux(f), _naive_div_flux(f), atol=1e-11)


def test_gradient_of_plane_is_exact_in_interior() -> None:
    yy, xx = np.mgrid[0:10, 0:12].astype(np.float64)
    plane = 3.0 * yy + 4.0 * xx  # axis 0 slope 3, axis 1 slope 4
    assert np.allclose(grid_ops.dx(plane)[1:-1, 1:-1], 3.0)
    assert np.allclose(grid_ops.dy(plane)[1:-1, 1:-1], 4.0)
    assert np.allclose(grid_ops.grad_mag(plane)[1:-1, 1:-1], 5.0)


def test_replicated_edges_halve_the_boundary_slope() -> None:
    ramp = np.tile(np.arange(6.0), (5, 1))
    d = grid_ops.dy(ramp)
    assert np.allclose(d[:, 0], 0.5)
    assert np.allclose(d[:, -1], 0.5)
    assert np.allclose(d[:, 1:-1], 1.0)


def test_laplacian_annihilates_planes_in_interior() -> None:
    yy, xx = np.mgrid[0:9, 0:9].astype(np.float64)
    plane = 2.5 * yy - 7.0 * xx + 4.0
    assert np.allclose(grid_ops.laplacian(plane)[1:-1, 1:-1], 0.0, atol=1e-12)
    assert np.allclose(grid_ops.biharmonic(plane)[2:-2, 2:-2], 0.0, atol=1e-11)


def test_laplacian_of_quadratic_bowl() -> None:
    yy, xx = np.mgrid[0:11, 0:11].astype(np.float64)
    bowl = (yy - 5.0) ** 2 + (xx - 5.0) ** 2
    assert np.allclose(grid_ops.laplacian(bowl)[1:-1, 1:-1], 4.0)


def test_operators_are_linear() -> None:
    rng = np.random.default_rng(3)
    f = rng.normal(size=(8, 8))
    g = rng.normal(size=(8, 8))
    for op in (grid_ops.dx, grid_ops.dy, grid_ops.laplacian, grid_ops.biharmonic):
        combined = op(2.0 * f - 3.0 * g)
        assert np.allclose(combined, 2.0 * op(f) - 3.0 * op(g), atol=1e-10)


def test_operators_do_not_mutate_input() -> None:
    rng = np.random.default_rng(5)
    f = rng.normal(size=(6, 6))
    pristine = f.copy()
    for op in (
        grid_ops.dx,
        grid_ops.dy,
        grid_ops.grad_mag,
        grid_ops.laplacian,
        grid_ops.biharmonic,
        grid_ops.div_flux,
    ):
        out = op(f)
        assert out is not f
        assert np.array_equal(f, pristine)


def test_heaviside_exact_values() -> None:
    assert grid_ops.heaviside(0.0, 1.0) == 0.5
    assert grid_ops.heaviside(1.0, 1.0) == pytest.approx(0.75, abs=1e-15)
    assert grid_ops.heaviside(-1.0, 1.0) == pytest.approx(0.25, abs=1e-15)
    assert grid_ops.heaviside(1e12, 1.0) == pytest.approx(1.0, abs=1e-9)
    assert grid_ops.heaviside(-1e12, 1.0) == pytest.approx(0.0, abs=1e-9)


def test_heaviside_is_strictly_increasing() -> None:
    xs = np.linspace(-20.0, 20.0, 401)
    h = grid_ops.heaviside(xs, 0.7)
    assert (np.diff(h) > 0.0).all()
    assert (h > 0.0).all() and (h < 1.0).all()


def test_dirac_exact_values_and_symmetry() -> None:
    assert grid_ops.dirac(0.0, 1.0) == pytest.approx(1.0 / np.pi, abs=1e-15)
    assert grid_ops.dirac(2.0, 0.5) == pytest.approx(
        (0.5 / np.pi) / (0.25 + 4.0), abs=1e-15
    )
    xs = np.linspace(0.1, 30.0, 57)
    assert np.allclose(grid_ops.dirac(xs, 1.3), grid_ops.dirac(-xs, 1.3))
    assert (grid_ops.dirac(xs, 1.3) > 0.0).all()


def test_dirac_scaling_in_eps() -> None:
    # peak height 1 / (pi eps), half-width eps
    for eps in (0.25, 1.0, 4.0):
        assert grid_ops.dirac(0.0, eps) == pytest.approx(1.0 / (np.pi * eps))
        assert grid_ops.dirac(eps, eps) == pytest.approx(0.5 / (np.pi * eps))


def test_dirac_matches_heaviside_derivative() -> None:
    step = 1e-5
    for eps in (0.25, 1.0, 3.0):
        for x in (-5.0, -1.0, -0.3, 0.0, 0.4, 1.0, 7.0):
            fd = (
                grid_ops.heaviside(x + step, eps) - grid_ops.heaviside(x - step, eps)
            ) / (2.0 * step)
            assert abs(fd - grid_ops.dirac(x, eps)) < 1e-6


def test_heaviside_and_dirac_preserve_array_shape() -> None:
    phi = np.zeros((4, 5))
    assert grid_ops.heaviside(phi, 1.0).shape == (4, 5)
    assert grid_ops.dirac(phi, 1.0).shape == (4, 5)
    assert isinstance(grid_ops.heaviside(0.0, 1.0), float)
    assert isinstance(grid_ops.dirac(0.0, 1.0), float)


def test_eps_must_be_positive_and_finite() -> None:
    for bad in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(ParameterError):
            grid_ops.heaviside(0.0, bad)
        with pytest.raises(ParameterError):
            grid_ops.dirac(0.0, bad)


def test_as_image_validation() -> None:
    image = grid_ops.as_image(np.full((5, 5), 100.0))
    assert image.dtype == np.float64
    with pytest.raises(ParameterError):
        grid_ops.as_image(np.full((5, 5), -1.0))
    with pytest.raises(ParameterError):
        grid_ops.as_image(np.full((5, 5), 256.0))
    with pytest.raises(ParameterError):
        grid_ops.as_image(np.full((2, 5), 10.0))
    with pytest.raises(ParameterError):
        grid_ops.as_image(np.full((5,), 10.0))
    bad = np.full((5, 5), 10.0)
    bad[2, 2] = np.nan
    with pytest.raises(ParameterError):
        grid_ops.as_image(bad)


def test_as_image_and_as_field_copy_their_input() -> None:
    raw = np.full((4, 4), 9.0)
    image = grid_ops.as_image(raw)
    image[0, 0] = 17.0
    assert raw[0, 0] == 9.0
    field = grid_ops.as_field(raw)
    field[0, 0] = -3.0
    assert raw[0, 0] == 9.0


def test_as_field_shape_check_against_reference() -> None:
    like = np.zeros((4, 6))
    assert grid_ops.as_field(np.ones((4, 6)), like=like).shape == (4, 6)
    with pytest.raises(ParameterError):
        grid_ops.as_field(np.ones((4, 5)), like=like)
    with pytest.raises(ParameterError):
        grid_ops.as_field(np.full((4, 6), np.inf), like=like)


def test_as_mask_accepts_bool_and_binary_ints() -> None:
    mask = grid_ops.as_mask(np.array([[0, 1, 0], [1, 1, 0], [0, 0, 0]]))
    assert mask.dtype == np.bool_
    assert mask.sum() == 3
    with pytest.raises(ParameterError):
        grid_ops.as_mask(np.array([[0, 2, 0], [1, 1, 0], [0, 0, 0]]))
    with pytest.raises(ParameterError):
        grid_ops.as_mask(np.zeros((3, 3)), like=np.zeros((4, 4)))
