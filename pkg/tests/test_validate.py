"""Validation experiments: analytic oracles, qualitative outcome checks.

The analytic energy is cross-checked against a fine-grid quadrature of the
continuum scene, computed here with none of the library's machinery, so the
closed form and the code under test cannot share a bug.
"""

from __future__ import annotations

import functools
import math

import numpy as np
import pytest

from levelseg.errors import ParameterError
from levelseg.evolve import SolverParams
from levelseg.validate import (
    COLLAPSE_WINDOW,
    ENERGY_CARVED,
    ENERGY_FULL_SQUARE,
    EXPERIMENTS,
    CollapseSpec,
    analytic_cv_energy,
    curvature_velocity,
    discrete_cv_energy,
    make_ablation_scene,
    make_nested_image,
    nested_carved_mask,
    nested_circle_mask,
    nested_demo_script,
    nested_square_mask,
    run_ablation,
    run_collapse_experiment,
    run_experiments,
    run_inequality_experiment,
    run_reconstitution_experiment,
    sharp_field_from_mask,
    signed_distance_disc,
    upwind_grad_mag,
)


def _quadrature_energy(radius: float, n: int = 1500) -> float:
    """Two-phase energy of the continuum nested scene by cell-center
    quadrature on an n x n grid; shares no code with the library."""
    h = 50.0 / n
    centers = (np.arange(n) + 0.5) * h
    xx, yy = np.meshgrid(centers, centers)
    square = (xx >= 10.0) & (xx < 40.0) & (yy >= 10.0) & (yy < 40.0)
    disc = (xx - 25.0) ** 2 + (yy - 25.0) ** 2 <= 100.0
    image = np.where(square, np.where(disc, 128.0, 0.0), 240.0)
    carved = (xx - 25.0) ** 2 + (yy - 25.0) ** 2 <= radius * radius
    fg = square & ~carved
    w = h * h
    c1 = image[fg].sum() / fg.sum()
    c2 = image[~fg].sum() / (~fg).sum()
    return float(
        ((image[fg] - c1) ** 2).sum() * w + ((image[~fg] - c2) ** 2).sum() * w
    )


@functools.cache
def _reconstitution() -> dict:
    return run_reconstitution_experiment()


@functools.cache
def _ablation() -> dict:
    return run_ablation()


# ---------------------------------------------------------------------------
# analytic energy


def test_analytic_energy_matches_frozen_values() -> None:
    assert analytic_cv_energy(0.0) == pytest.approx(ENERGY_FULL_SQUARE, rel=5e-4)
    assert analytic_cv_energy(10.0) == pytest.approx(ENERGY_CARVED, rel=5e-4)


def test_analytic_energy_matches_independent_quadrature() -> None:
    for radius in (0.0, 5.0, 10.0, 12.0):
        assert analytic_cv_energy(radius) == pytest.approx(
            _quadrature_energy(radius), rel=1e-3
        )


def test_energy_landscape_has_a_barrier_between_its_two_minima() -> None:
    e0 = analytic_cv_energy(0.0)
    e5 = analytic_cv_energy(5.0)
    e10 = analytic_cv_energy(10.0)
    assert e10 < e0 < e5  # carving only pays off once the disc is gone
    assert analytic_cv_energy(11.0) > e10  # and overshooting is punished


def test_analytic_energy_is_continuous_at_the_branch_switch() -> None:
    below = analytic_cv_energy(10.0 - 1e-9)
    above = analytic_cv_energy(10.0 + 1e-9)
    assert abs(below - above) < 1e-2


def test_analytic_energy_domain_errors() -> None:
    for bad in (-0.1, 15.1, float("nan"), float("inf")):
        with pytest.raises(ParameterError):
            analytic_cv_energy(bad)


def test_discrete_energy_agrees_with_analytic_on_sharp_masks() -> None:
    image = make_nested_image()
    d_full = discrete_cv_energy(image, sharp_field_from_mask(nested_square_mask()), eps=1.0)
    d_carved = discrete_cv_energy(image, sharp_field_from_mask(nested_carved_mask()), eps=1.0)
    assert d_full == pytest.approx(analytic_cv_energy(0.0), rel=0.02)
    assert d_carved == pytest.approx(analytic_cv_energy(10.0), rel=0.02)


def test_discrete_energy_of_perfect_two_phase_split_is_zero() -> None:
    image = np.full((10, 10), 50.0)
    image[:, 5:] = 200.0
    phi = sharp_field_from_mask(image > 100.0)
    assert discrete_cv_energy(image, phi, eps=1.0) == pytest.approx(0.0, abs=1e-3)


def test_nested_image_composition() -> None:
    image = make_nested_image()
    square = nested_square_mask()
    circle = nested_circle_mask()
    carved = nested_carved_mask()
    assert image.shape == (50, 50)
    assert set(np.unique(image)) == {0.0, 128.0, 240.0}
    assert square.sum() == 900
    assert (image[~square] == 240.0).all()
    assert (image[circle] == 128.0).all()
    assert (image[square & ~circle] == 0.0).all()
    assert circle.sum() == pytest.approx(math.pi * 100.0, abs=12)
    assert np.array_equal(carved, square & ~circle)
    assert (circle & ~square).sum() == 0  # the disc sits inside the square


# ---------------------------------------------------------------------------
# front collapse


def test_upwind_gradient_on_a_ramp_and_cone() -> None:
    yy, xx = np.mgrid[0:20, 0:20].astype(np.float64)
    ramp = 1.0 * xx
    assert np.allclose(upwind_grad_mag(ramp)[:, 1:-1], 1.0)

    peak = 8.0 - np.abs(xx - 10.0)  # ridge with a maximum at x = 10
    assert upwind_grad_mag(peak)[5, 10] > 0.9  # maxima keep collapsing

    valley = np.abs(xx - 10.0)  # kink at a minimum
    assert upwind_grad_mag(valley)[5, 10] == 0.0  # minima stay put


def test_signed_distance_disc_geometry() -> None:
    phi = signed_distance_disc(64, 15.0)
    # the grid center falls between pixels, half a diagonal from (32, 32)
    assert phi[32, 32] == pytest.approx(15.0 - math.sqrt(0.5), abs=1e-9)
    assert (phi > 0.0).sum() == pytest.approx(math.pi * 225.0, abs=30)
    assert phi[0, 0] < 0.0


def test_collapse_time_is_near_the_radius_over_speed_bound() -> None:
    result = run_collapse_experiment(CollapseSpec())
    lo, hi = COLLAPSE_WINDOW
    assert result.spec.radius == 15.0 and result.spec.speed == -1.0
    assert lo <= result.collapse_time <= hi
    assert result.steps == pytest.approx(result.collapse_time / result.spec.dt, abs=1)


def test_collapse_time_scales_linearly() -> None:
    base = run_collapse_experiment(CollapseSpec())
    fast = run_collapse_experiment(CollapseSpec(speed=-2.0))
    wide = run_collapse_experiment(CollapseSpec(radius=30.0, size=128))
    assert fast.collapse_time == pytest.approx(base.collapse_time / 2.0, rel=0.10)
    assert wide.collapse_time == pytest.approx(base.collapse_time * 2.0, rel=0.10)


def test_collapse_shrinks_monotonically() -> None:
    spec = CollapseSpec()
    phi = signed_distance_disc(spec.size, spec.radius)
    area = int((phi > 0.0).sum())
    for _ in range(200):
        phi = phi + spec.dt * spec.speed * upwind_grad_mag(phi)
        new_area = int((phi > 0.0).sum())
        assert new_area <= area
        area = new_area


# ---------------------------------------------------------------------------
# refinement inequality


def test_ratio_growth_under_refinement_stays_bounded() -> None:
    result = run_inequality_experiment()
    assert result["passed"]
    assert result["growth"] <= result["limit"] == 1.5
    assert result["coarse_max_ratio"] > 0.0
    assert math.isfinite(result["fine_max_ratio"])


# ---------------------------------------------------------------------------
# curvature comparator pieces


def test_curvature_velocity_reads_minus_one_over_radius() -> None:
    radius = 12.0
    phi = signed_distance_disc(64, radius)
    g = np.hypot(*np.gradient(phi))
    velocity = curvature_velocity(phi, gain=1.0, clamp=1e9)
    for y, x in ((32, 32 + 12), (32, 32 - 12), (32 + 12, 32), (32 - 12, 32)):
        kappa = velocity[y, x] / g[y, x]
        assert kappa == pytest.approx(-1.0 / radius, rel=0.25)


def test_curvature_velocity_vanishes_on_a_plane() -> None:
    yy, xx = np.mgrid[0:30, 0:30].astype(np.float64)
    plane = 2.0 * xx - 1.0 * yy
    velocity = curvature_velocity(plane, gain=1.0, clamp=1e9)
    assert np.abs(velocity[2:-2, 2:-2]).max() < 1e-6


def test_positive_gain_contracts_a_convex_front() -> None:
    phi = signed_distance_disc(48, 10.0)
    area0 = int((phi > 0.0).sum())
    for _ in range(50):
        phi = phi + 0.1 * curvature_velocity(phi, gain=1.0, clamp=1e9)
    assert int((phi > 0.0).sum()) < area0


def test_curvature_clamp_saturates_the_force() -> None:
    from levelseg import grid_ops

    rng = np.random.default_rng(2)
    phi = rng.normal(size=(20, 20))
    clamp = 5.0
    velocity = curvature_velocity(phi, gain=1e12, clamp=clamp)
    # |force| = |velocity| / |grad phi| stays within the clamp
    ratio = np.abs(velocity) / np.maximum(grid_ops.grad_mag(phi), 1e-12)
    assert ratio.max() <= clamp + 1e-6


# ---------------------------------------------------------------------------
# reconstitution workflow


def test_reconstitution_hits_both_dice_floors() -> None:
    result = _reconstitution()
    assert result["dice_round1"] >= 0.95
    assert result["dice_round2"] >= 0.95
    assert result["passed"]


def test_reconstitution_round2_actually_carves_the_disc() -> None:
    result = _reconstitution()
    circle = nested_circle_mask()
    in_circle_round1 = (result["mask_round1"] & circle).sum() / circle.sum()
    in_circle_round2 = (result["mask_round2"] & circle).sum() / circle.sum()
    assert in_circle_round1 > 0.9  # round 1 keeps the disc as foreground
    assert in_circle_round2 < 0.1  # round 2 removes it


def test_nested_demo_script_shape() -> None:
    script = nested_demo_script()
    known = set(SolverParams().to_dict())
    assert set(script["params"]) <= known
    rounds = [event["round"] for event in script["events"]]
    assert rounds == [1, 2]
    assert script["events"][0]["point"] is None
    assert script["events"][1]["point"] is not None
    assert script["events"][1]["shape"]["type"] == "scribble"


# ---------------------------------------------------------------------------
# ablation


def test_ablation_scene_layout_is_sound() -> None:
    scene = make_ablation_scene()
    assert (scene.init_region & ~scene.target).sum() == 0  # seed inside target
    assert (scene.target & ~scene.roi).sum() == 0  # target inside roi
    bright_outside = (scene.image > 100.0) & ~scene.roi
    assert bright_outside.sum() > 50  # distractor blobs exist outside the roi
    again = make_ablation_scene()
    assert np.array_equal(scene.image, again.image)


def test_ablation_constant_force_variant_is_contained_and_accurate() -> None:
    result = _ablation()
    outcome = result["constant_force"]
    assert outcome["contained"]
    assert not outcome["diverged"]
    assert outcome["dice"] >= 0.9


def test_ablation_curvature_variant_leaks_past_the_roi() -> None:
    result = _ablation()
    assert not result["curvature_force"]["contained"]


def test_ablation_regularization_keeps_drift_down() -> None:
    result = _ablation()
    with_reg = result["constant_force"]["drift"]
    runs = result["runs"]
    without_reg = runs["no_regularization"].drift
    assert with_reg < without_reg
    assert result["passed"]


# ---------------------------------------------------------------------------
# registry


def test_run_experiments_default_order_and_reports() -> None:
    reports = run_experiments(["energy"])
    assert [r.name for r in reports] == ["energy"]
    assert reports[0].passed
    payload = reports[0].as_dict()
    assert sorted(payload) == ["expected", "measured", "name", "notes", "passed"]


def test_run_experiments_rejects_unknown_selectors() -> None:
    with pytest.raises(ParameterError):
        run_experiments(["energy", "nonsense"])


def test_experiment_registry_names() -> None:
    assert list(EXPERIMENTS) == [
        "energy",
        "collapse",
        "inequality",
        "reconstitution",
        "ablation",
    ]
