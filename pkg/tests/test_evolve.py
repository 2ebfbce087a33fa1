"""Solver-core behavior: region means, velocity terms, stepping, guards."""

from __future__ import annotations

import numpy as np
import pytest

from levelseg import grid_ops
from levelseg.errors import DivergenceError, ParameterError, ProtocolError
from levelseg.evolve import (
    RegionMeans,
    SolverParams,
    SolverState,
    StepDiagnostics,
    compute_region_means,
    interaction_velocity,
    mbe_velocity,
    run,
    segmentation_velocity,
    signed_distance_drift,
    step,
)
from levelseg.validate import discrete_cv_energy, random_blob_image


def _all_true(shape: tuple[int, int]) -> np.ndarray:
    return np.ones(shape, dtype=bool)


def _blob_state(**overrides) -> SolverState:
    image = random_blob_image(seed=2, size=24)
    rng = np.random.default_rng(9)
    phi = rng.normal(scale=2.0, size=image.shape)
    defaults = dict(
        image=image,
        phi=phi,
        velocity=np.zeros_like(phi),
        interested=_all_true(image.shape),
        params=SolverParams(dt=1e-4),
    )
    defaults.update(overrides)
    return SolverState(**defaults)


# ---------------------------------------------------------------------------
# region means


def test_constant_image_means_are_the_constant() -> None:
    image = np.full((8, 8), 77.0)
    rng = np.random.default_rng(1)
    phi = rng.normal(size=(8, 8))
    means = compute_region_means(image, phi, _all_true((8, 8)), eps=1.0)
    assert means.c1 == pytest.approx(77.0, abs=1e-12)
    assert means.c2 == pytest.approx(77.0, abs=1e-12)


def test_means_match_direct_weighted_sums() -> None:
    rng = np.random.default_rng(4)
    image = rng.uniform(0.0, 255.0, size=(10, 10))
    phi = rng.normal(scale=3.0, size=(10, 10))
    interested = np.zeros((10, 10), dtype=bool)
    interested[2:8, 1:6] = True
    eps = 0.8
    means = compute_region_means(image, phi, interested, eps=eps)
    h = grid_ops.heaviside(phi, eps)
    assert means.c1 == pytest.approx(float((h * image).sum() / h.sum()), rel=1e-12)
    hc = 1.0 - h
    expected_c2 = float((hc * image)[interested].sum() / hc[interested].sum())
    assert means.c2 == pytest.approx(expected_c2, rel=1e-12)


def test_background_mean_ignores_pixels_outside_interest_region() -> None:
    shape = (12, 12)
    phi = np.full(shape, -5.0)
    phi[4:8, 4:8] = 5.0
    interested = np.zeros(shape, dtype=bool)
    interested[2:10, 2:10] = True

    image_a = np.full(shape, 40.0)
    image_a[4:8, 4:8] = 100.0
    image_b = image_a.copy()
    image_b[~interested] = 250.0  # untouched territory changes

    means_a = compute_region_means(image_a, phi, interested, eps=1.0)
    means_b = compute_region_means(image_b, phi, interested, eps=1.0)
    assert means_a.c2 == pytest.approx(means_b.c2, rel=1e-12)
    # but the foreground mean is global, so it does move
    assert means_b.c1 > means_a.c1


def test_empty_interest_region_is_a_protocol_error() -> None:
    image = np.full((6, 6), 10.0)
    phi = np.ones((6, 6))
    with pytest.raises(ProtocolError):
        compute_region_means(image, phi, np.zeros((6, 6), dtype=bool), eps=1.0)


def test_fully_foreground_interest_region_falls_back_to_global_complement() -> None:
    shape = (20, 20)
    image = np.full(shape, 30.0)
    image[0:4, 0:4] = 200.0
    phi = np.full(shape, -1e12)
    phi[0:4, 0:4] = 1e12
    interested = np.zeros(shape, dtype=bool)
    interested[0:4, 0:4] = True
    means = compute_region_means(image, phi, interested, eps=1.0)
    assert means.c1 == pytest.approx(200.0, abs=1e-6)
    assert means.c2 == pytest.approx(30.0, abs=1e-6)


def test_everything_foreground_collapses_background_mean_onto_c1() -> None:
    shape = (20, 20)
    image = np.full(shape, 99.0)
    phi = np.full(shape, 1e12)
    means = compute_region_means(image, phi, _all_true(shape), eps=1.0)
    assert means.c2 == means.c1


# ---------------------------------------------------------------------------
# velocity terms


def test_segmentation_velocity_hand_value() -> None:
    image = np.full((3, 3), 200.0)
    phi = np.zeros((3, 3))
    means = RegionMeans(c1=100.0, c2=150.0)
    params = SolverParams(lambda1=2.0, lambda2=0.5, eps=1.0)
    v = segmentation_velocity(image, phi, means, params)
    expected = -(1.0 / np.pi) * (2.0 * 100.0**2 - 0.5 * 50.0**2)
    assert np.allclose(v, expected)


def test_segmentation_velocity_sign_pulls_toward_closer_mean() -> None:
    means = RegionMeans(c1=100.0, c2=20.0)
    params = SolverParams()
    phi = np.zeros((3, 3))
    near_c1 = segmentation_velocity(np.full((3, 3), 95.0), phi, means, params)
    near_c2 = segmentation_velocity(np.full((3, 3), 25.0), phi, means, params)
    assert (near_c1 > 0.0).all()  # looks like foreground: phi grows
    assert (near_c2 < 0.0).all()  # looks like background: phi sinks


def test_interaction_velocity_scales_gradient_magnitude() -> None:
    yy, xx = np.mgrid[0:8, 0:8].astype(np.float64)
    phi = 3.0 * yy + 4.0 * xx
    force = np.full((8, 8), 2.0)
    v = interaction_velocity(phi, force)
    assert np.allclose(v[1:-1, 1:-1], 10.0)


def test_mbe_velocity_zero_when_mu_is_zero() -> None:
    rng = np.random.default_rng(8)
    phi = rng.normal(size=(7, 7))
    assert np.array_equal(mbe_velocity(phi, SolverParams(mu=0.0)), np.zeros((7, 7)))


def test_mbe_velocity_composition() -> None:
    rng = np.random.default_rng(8)
    phi = rng.normal(size=(9, 9))
    params = SolverParams(mu=2.0, alpha=5.0)
    expected = 2.0 * (-5.0 * grid_ops.biharmonic(phi) + grid_ops.div_flux(phi))
    assert np.allclose(mbe_velocity(phi, params), expected, atol=1e-12)


# ---------------------------------------------------------------------------
# stepping


def test_step_is_pure_and_matches_manual_euler() -> None:
    state = _blob_state()
    phi_before = state.phi.copy()
    new_phi = step(state)
    assert np.array_equal(state.phi, phi_before)

    means = compute_region_means(state.image, state.phi, state.interested, state.params.eps)
    rate = segmentation_velocity(state.image, state.phi, means, state.params)
    rate += mbe_velocity(state.phi, state.params)
    rate += interaction_velocity(state.phi, state.velocity)
    assert np.allclose(new_phi, state.phi + state.params.dt * rate, atol=1e-12)


def test_run_advances_in_place_and_reports_steps() -> None:
    state = _blob_state()
    phi0 = state.phi.copy()
    diagnostics = run(state, 5)
    assert [d.step for d in diagnostics] == [1, 2, 3, 4, 5]
    assert not np.array_equal(state.phi, phi0)
    assert all(np.isfinite(d.max_delta) for d in diagnostics)


def test_run_composes_and_is_deterministic() -> None:
    state_a = _blob_state()
    state_b = _blob_state()
    run(state_a, 7)
    run(state_b, 3)
    run(state_b, 4)
    assert state_a.phi.tobytes() == state_b.phi.tobytes()


def test_run_zero_steps_is_a_no_op() -> None:
    state = _blob_state()
    phi0 = state.phi.copy()
    assert run(state, 0) == []
    assert np.array_equal(state.phi, phi0)


def test_run_rejects_bad_step_counts() -> None:
    state = _blob_state()
    with pytest.raises(ParameterError):
        run(state, -1)
    with pytest.raises(ParameterError):
        run(state, 2.5)


def test_solver_state_copies_its_arrays() -> None:
    image = random_blob_image(seed=3, size=16)
    phi = np.zeros_like(image)
    phi[4:10, 4:10] = 1.0
    state = SolverState(
        image=image,
        phi=phi,
        velocity=np.zeros_like(image),
        interested=_all_true(image.shape),
        params=SolverParams(dt=1e-4),
    )
    run(state, 3)
    assert np.array_equal(phi[4:10, 4:10], np.ones((6, 6)))


def test_solver_state_validates_shapes() -> None:
    image = np.full((6, 6), 50.0)
    with pytest.raises(ParameterError):
        SolverState(
            image=image,
            phi=np.zeros((6, 5)),
            velocity=np.zeros((6, 6)),
            interested=_all_true((6, 6)),
            params=SolverParams(),
        )


def test_progress_callback_sees_every_step() -> None:
    state = _blob_state()
    seen: list[tuple[int, float]] = []

    def spy(record: StepDiagnostics, phi: np.ndarray) -> None:
        seen.append((record.step, float(phi[0, 0])))

    run(state, 4, progress=spy)
    assert [s for s, _ in seen] == [1, 2, 3, 4]
    assert seen[-1][1] == state.phi[0, 0]


def test_zero_forcing_leaves_field_unchanged() -> None:
    image = random_blob_image(seed=5, size=16)
    rng = np.random.default_rng(6)
    phi = rng.normal(size=image.shape)
    state = SolverState(
        image=image,
        phi=phi,
        velocity=np.zeros_like(phi),
        interested=_all_true(image.shape),
        params=SolverParams(lambda1=0.0, lambda2=0.0, mu=0.0, dt=1e-2),
    )
    run(state, 10)
    assert np.array_equal(state.phi, phi)


def test_uniform_negative_force_never_raises_phi() -> None:
    image = random_blob_image(seed=7, size=20)
    rng = np.random.default_rng(12)
    phi = rng.normal(scale=4.0, size=image.shape)
    state = SolverState(
        image=image,
        phi=phi.copy(),
        velocity=np.full(image.shape, -3.0),
        interested=_all_true(image.shape),
        params=SolverParams(lambda1=0.0, lambda2=0.0, mu=0.0, dt=1e-2),
    )
    previous = state.phi.copy()
    for _ in range(20):
        run(state, 1)
        assert (state.phi <= previous + 1e-15).all()
        previous = state.phi.copy()


def test_fitting_flow_does_not_increase_two_phase_energy() -> None:
    image = random_blob_image(seed=11, size=32)
    phi = grid_ops.as_field(np.where(image > image.mean(), 2.0, -2.0))
    state = SolverState(
        image=image,
        phi=phi,
        velocity=np.zeros_like(phi),
        interested=_all_true(image.shape),
        params=SolverParams(mu=0.0, dt=1e-5),
    )
    energies = [discrete_cv_energy(state.image, state.phi, eps=1.0)]
    for _ in range(100):
        run(state, 1)
        energies.append(discrete_cv_energy(state.image, state.phi, eps=1.0))
    drops = np.diff(energies)
    assert (drops <= 1e-6 * energies[0]).all()
    assert energies[-1] < energies[0]


def test_divergence_guard_raises_and_keeps_last_finite_field() -> None:
    rng = np.random.default_rng(13)
    image = np.full((16, 16), 100.0)
    phi = rng.normal(size=(16, 16))
    state = SolverState(
        image=image,
        phi=phi,
        velocity=np.zeros_like(phi),
        interested=_all_true((16, 16)),
        params=SolverParams(lambda1=0.0, lambda2=0.0, mu=1.0, alpha=5.0, dt=0.5),
    )
    with pytest.raises(DivergenceError) as excinfo:
        run(state, 50)
    assert excinfo.value.step is not None and excinfo.value.step >= 1
    assert np.all(np.isfinite(state.phi))
    assert np.max(np.abs(state.phi)) <= SolverParams().blowup_limit


def test_diagnostics_dict_round_trip() -> None:
    record = StepDiagnostics(step=3, max_delta=0.5, drift=0.1, c1=10.0, c2=20.0)
    assert record.as_dict() == {
        "step": 3,
        "max_delta": 0.5,
        "drift": 0.1,
        "c1": 10.0,
        "c2": 20.0,
    }


# ---------------------------------------------------------------------------
# parameters


def test_params_reject_bad_values() -> None:
    with pytest.raises(ParameterError):
        SolverParams(lambda1=-1.0)
    with pytest.raises(ParameterError):
        SolverParams(mu=float("nan"))
    with pytest.raises(ParameterError):
        SolverParams(dt=0.0)
    with pytest.raises(ParameterError):
        SolverParams(eps=0.0)
    with pytest.raises(ParameterError):
        SolverParams(steps_per_round=0)
    with pytest.raises(ParameterError):
        SolverParams(blowup_limit=-5.0)


def test_params_dict_round_trip_and_replace() -> None:
    params = SolverParams(lambda2=1.1, dt=2e-4, eps=0.25, steps_per_round=150)
    assert SolverParams.from_dict(params.to_dict()) == params
    assert params.replace(dt=1e-3).dt == 1e-3
    assert params.replace(dt=1e-3).lambda2 == 1.1
    with pytest.raises(ParameterError):
        SolverParams.from_dict({"lambda_3": 1.0})


# ---------------------------------------------------------------------------
# drift statistic


def test_drift_is_small_on_a_true_distance_cone() -> None:
    size = 33
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    phi = 10.0 - np.hypot(xx - 16.0, yy - 16.0)
    assert signed_distance_drift(phi) < 0.05


def test_drift_sees_cliffs_steeper_than_the_band() -> None:
    phi = np.full((10, 10), -50.0)
    phi[:, 5:] = 50.0
    assert signed_distance_drift(phi) == pytest.approx(49.0)


def test_drift_is_zero_without_any_contour() -> None:
    assert signed_distance_drift(np.full((8, 8), -40.0)) == 0.0


def test_drift_of_flat_zero_field_counts_the_band() -> None:
    # |phi| < band everywhere, gradient zero: mean | 0 - 1 | = 1
    assert signed_distance_drift(np.zeros((8, 8))) == pytest.approx(1.0)
