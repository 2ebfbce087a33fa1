"""Built-in validation experiments with analytically known outcomes.

Each experiment builds its own synthetic inputs, runs the engine and
compares against closed-form values or qualitative guarantees:

  energy          piecewise closed-form two-phase fitting energy on the
                  nested square/circle test image, plus agreement of the
                  discrete energy with the continuous formula
  collapse        a uniformly negative speed must shrink a circular front
                  to nothing by radius/|speed| (upwind transport scheme)
  inequality      the contour-length vs |laplacian|^2 bound stays controlled
                  under grid refinement for a family of radial bumps
  reconstitution  the two-round nested-image workflow recovers first the
                  square, then the square with the inner disc carved out
  ablation        constant inward force vs curvature comparator vs no
                  regularization on a three-blob scene

Experiments report measured numbers next to their tolerances; the CLI and
the acceptance suite consume the same registry.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import grid_ops
from .errors import ExperimentError, ParameterError
from .evolve import (
    SolverParams,
    SolverState,
    compute_region_means,
    mbe_velocity,
    run,
    segmentation_velocity,
    signed_distance_drift,
)
from .metrics import evaluate, mask_from_field
from .session import SessionState, apply_interaction, parse_event

# ---------------------------------------------------------------------------
# nested test image (50x50: background 240, 30x30 square 0, r=10 disc 128)

NESTED_SIZE = 50
NESTED_SQUARE = (10, 40)  # half-open row/col span of the dark square
NESTED_CIRCLE_RADIUS = 10.0
NESTED_CENTER = (NESTED_SIZE - 1) / 2.0  # 24.5, shared by square and disc

ENERGY_FULL_SQUARE = 3_350_480.0
ENERGY_CARVED = 3_294_030.0
ENERGY_RTOL = 5e-4  # 0.05 %
DISCRETE_ENERGY_RTOL = 0.02


def make_nested_image() -> np.ndarray:
    img = np.full((NESTED_SIZE, NESTED_SIZE), 240.0)
    lo, hi = NESTED_SQUARE
    img[lo:hi, lo:hi] = 0.0
    img[nested_circle_mask()] = 128.0
    return img


def nested_square_mask() -> np.ndarray:
    mask = np.zeros((NESTED_SIZE, NESTED_SIZE), dtype=bool)
    lo, hi = NESTED_SQUARE
    mask[lo:hi, lo:hi] = True
    return mask


def nested_circle_mask() -> np.ndarray:
    yy, xx = np.mgrid[0:NESTED_SIZE, 0:NESTED_SIZE]
    r2 = (xx - NESTED_CENTER) ** 2 + (yy - NESTED_CENTER) ** 2
    return r2 <= NESTED_CIRCLE_RADIUS**2


def nested_carved_mask() -> np.ndarray:
    """Square with the central disc removed."""
    return nested_square_mask() & ~nested_circle_mask()


def analytic_cv_energy(radius: float) -> float:
    """Closed-form two-phase fitting energy of the nested image when the
    foreground is the square minus a centered disc of the given radius.

    Uses continuous areas (square 900, disc 100*pi, background 1600) with
    unit fitting weights. Valid for radius in [0, 15]; the formula switches
    branches at radius 10 where the carved disc exhausts the inner circle.
    """
    r = float(radius)
    if not (0.0 <= r <= 15.0) or not math.isfinite(r):
        raise ParameterError(f"radius must lie in [0, 15], got {radius}")
    pi = math.pi
    if r <= 10.0:
        c1 = 128.0 * pi * (100.0 - r * r) / (900.0 - pi * r * r)
        c2 = (128.0 * pi * r * r + 384000.0) / (pi * r * r + 1600.0)
        return (
            c1 * c1 * (900.0 - 100.0 * pi)
            + (128.0 - c1) ** 2 * (100.0 * pi - pi * r * r)
            + (128.0 - c2) ** 2 * pi * r * r
            + (240.0 - c2) ** 2 * 1600.0
        )
    c2 = (12800.0 * pi + 384000.0) / (pi * r * r + 1600.0)
    return (
        (128.0 - c2) ** 2 * 100.0 * pi
        + c2 * c2 * (r * r - 100.0) * pi
        + (240.0 - c2) ** 2 * 1600.0
    )


def sharp_field_from_mask(mask, magnitude: float = 1e12) -> np.ndarray:
    """A near-binary field: +magnitude on the mask, -magnitude elsewhere."""
    mask = grid_ops.as_mask(mask)
    return np.where(mask, magnitude, -magnitude)


def discrete_cv_energy(image, phi, eps: float) -> float:
    """Discrete two-phase fitting energy with whole-domain region means."""
    image = grid_ops.as_image(image)
    phi = grid_ops.as_field(phi, like=image)
    h = grid_ops.heaviside(phi, eps)
    hc = 1.0 - h
    den1 = float(h.sum())
    den2 = float(hc.sum())
    c1 = float((h * image).sum() / den1) if den1 > 0.0 else 0.0
    c2 = float((hc * image).sum() / den2) if den2 > 0.0 else 0.0
    return float(
        (h * (image - c1) ** 2).sum() + (hc * (image - c2) ** 2).sum()
    )


# ---------------------------------------------------------------------------
# collapse experiment (pure transport under uniformly negative speed)


@dataclass(frozen=True)
class CollapseSpec:
    radius: float = 15.0
    speed: float = -1.0
    size: int = 64
    dt: float = 0.1
    scheme: str = "upwind"

    def __post_init__(self):
        if self.speed >= 0.0 or not math.isfinite(self.speed):
            raise ParameterError("collapse speed must be negative")
        if self.radius <= 0.0 or self.radius >= self.size / 2.0:
            raise ParameterError("front radius must fit inside the grid")
        if self.dt <= 0.0 or self.dt * abs(self.speed) >= 1.0:
            raise ParameterError("dt * |speed| must stay below one cell per step")
        if self.scheme not in ("upwind", "central"):
            raise ParameterError(f"unknown scheme {self.scheme!r}")


def signed_distance_disc(size: int, radius: float, center=None) -> np.ndarray:
    """phi = radius - distance-to-center; positive inside the disc."""
    if center is None:
        center = ((size - 1) / 2.0, (size - 1) / 2.0)
    cy, cx = center
    yy, xx = np.mgrid[0:size, 0:size]
    return radius - np.hypot(xx - cx, yy - cy)


def upwind_grad_mag(phi) -> np.ndarray:
    """Godunov gradient magnitude for transport under negative speed.

    Per axis, square of max(backward difference, 0) vs min(forward, 0),
    the monotone choice for a front moving against its own gradient; this
    keeps cone apexes collapsing instead of freezing, unlike the central
    stencil which reads zero slope there.
    """
    f = np.asarray(phi, dtype=np.float64)
    p = np.pad(f, 1, mode="edge")
    back_x = f - p[:-2, 1:-1]
    fwd_x = p[2:, 1:-1] - f
    back_y = f - p[1:-1, :-2]
    fwd_y = p[1:-1, 2:] - f
    gx2 = np.maximum(np.maximum(back_x, 0.0) ** 2, np.minimum(fwd_x, 0.0) ** 2)
    gy2 = np.maximum(np.maximum(back_y, 0.0) ** 2, np.minimum(fwd_y, 0.0) ** 2)
    return np.sqrt(gx2 + gy2)


@dataclass(frozen=True)
class CollapseResult:
    collapse_time: float
    steps: int
    spec: CollapseSpec


def run_collapse_experiment(spec: CollapseSpec | None = None) -> CollapseResult:
    """Evolve phi_t = speed * |grad phi| until the positive set empties.

    Returns the first time with no strictly positive pixel. Raises
    ExperimentError if the front survives past 3 * radius / |speed|, three
    times the analytic collapse deadline.
    """
    spec = spec or CollapseSpec()
    phi = signed_distance_disc(spec.size, spec.radius)
    deadline = 3.0 * spec.radius / abs(spec.speed)
    grad = upwind_grad_mag if spec.scheme == "upwind" else grid_ops.grad_mag
    t = 0.0
    steps = 0
    while (phi > 0.0).any():
        if t > deadline:
            raise ExperimentError(
                f"front failed to collapse within {deadline:.1f} time units"
            )
        phi = phi + spec.dt * spec.speed * grad(phi)
        t += spec.dt
        steps += 1
    return CollapseResult(collapse_time=t, steps=steps, spec=spec)


# ---------------------------------------------------------------------------
# contour-length vs squared-Laplacian inequality under refinement


@dataclass(frozen=True)
class InequalitySample:
    """A field on a disc domain with physical spacing h."""

    phi: np.ndarray
    domain: np.ndarray
    radial: np.ndarray
    h: float
    eps: float
    label: str


@dataclass(frozen=True)
class InequalityReport:
    ratios: dict
    max_ratio: float
    skipped: list


# bump family geometry, in continuum units on [-1, 1]^2
BUMP_RADIUS = 0.8
BUMP_BLUR = 0.05
BUMP_EPS = 0.05
BUMP_SIGMAS = (0.5, 1.0, 1.5, 2.0)
GRADIENT_FLOOR_FRACTION = 0.2


def build_bump_samples(grid_n: int, sigmas=BUMP_SIGMAS) -> list[InequalitySample]:
    """Radial cone bumps sigma * (1 - r/R), Gaussian-smoothed, on a disc.

    The blur width is fixed in continuum units so coarse and refined grids
    sample the same underlying field.
    """
    h = 2.0 / grid_n
    coords = -1.0 + h * (np.arange(grid_n) + 0.5)
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    r = np.hypot(xx, yy)
    domain = r <= BUMP_RADIUS
    samples = []
    for sigma in sigmas:
        cone = sigma * np.clip(1.0 - r / BUMP_RADIUS, 0.0, None)
        phi = ndimage.gaussian_filter(cone, sigma=BUMP_BLUR / h, mode="nearest")
        samples.append(
            InequalitySample(
                phi=phi,
                domain=domain,
                radial=r,
                h=h,
                eps=BUMP_EPS,
                label=f"sigma={sigma}@n={grid_n}",
            )
        )
    return samples


def check_inequality(samples: list[InequalitySample]) -> InequalityReport:
    """Ratio of smoothed contour length to integrated squared Laplacian.

    L = sum delta_eps(phi) |grad phi| h^2 and Q = sum (lap phi / h^2)^2 h^2
    over the disc domain. Samples that fail the theorem's hypotheses are
    skipped: a vanishing boundary slope or a near-zero Q (affine-like
    fields) both disqualify a sample rather than failing the check.
    """
    ratios: dict[str, float] = {}
    skipped: list[str] = []
    for s in samples:
        gx = grid_ops.dx(s.phi) / s.h
        gy = grid_ops.dy(s.phi) / s.h
        gmag = np.hypot(gx, gy)

        # hypothesis: slope bounded away from zero near the domain boundary
        band = s.domain & (s.radial >= BUMP_RADIUS - 3.0 * s.h)
        interior_slope = float(np.median(gmag[s.domain]))
        if band.any() and float(gmag[band].min()) < GRADIENT_FLOOR_FRACTION * interior_slope:
            skipped.append(s.label)
            continue

        lap = grid_ops.laplacian(s.phi) / (s.h * s.h)
        area = s.h * s.h
        length = float((grid_ops.dirac(s.phi, s.eps) * gmag)[s.domain].sum() * area)
        quad = float((lap[s.domain] ** 2).sum() * area)
        if quad < 1e-12:
            skipped.append(s.label)
            continue
        ratios[s.label] = length / quad
    if not ratios:
        raise ExperimentError("every inequality sample was skipped")
    return InequalityReport(
        ratios=ratios, max_ratio=max(ratios.values()), skipped=skipped
    )


INEQUALITY_GROWTH_LIMIT = 1.5


def run_inequality_experiment(coarse_n: int = 64) -> dict:
    """Check that the max L/Q ratio does not grow unboundedly when the grid
    is refined: max ratio at h/2 must stay within 1.5x the value at h."""
    coarse = check_inequality(build_bump_samples(coarse_n))
    fine = check_inequality(build_bump_samples(coarse_n * 2))
    return {
        "coarse_max_ratio": coarse.max_ratio,
        "fine_max_ratio": fine.max_ratio,
        "growth": fine.max_ratio / coarse.max_ratio,
        "limit": INEQUALITY_GROWTH_LIMIT,
        "skipped": coarse.skipped + fine.skipped,
        "passed": fine.max_ratio <= INEQUALITY_GROWTH_LIMIT * coarse.max_ratio,
    }


# ---------------------------------------------------------------------------
# curvature comparator velocity


CURVATURE_SAFEGUARD = 1e-8
CURVATURE_CLAMP = 1e6


def curvature_velocity(phi, gain: float, clamp: float = CURVATURE_CLAMP) -> np.ndarray:
    """Curve-shortening style velocity gain * div(grad phi / |grad phi|) * |grad phi|.

    The normal field uses a small safeguard in the denominator, and the force
    saturates at +/- clamp before being multiplied by |grad phi|. With the
    inside-positive convention the divergence term reads about -1/R on a
    convex front of radius R, so positive gain contracts convex fronts.
    """
    phi = grid_ops.as_field(phi)
    g = grid_ops.grad_mag(phi)
    nx = grid_ops.dx(phi) / (g + CURVATURE_SAFEGUARD)
    ny = grid_ops.dy(phi) / (g + CURVATURE_SAFEGUARD)
    kappa = grid_ops.dx(nx) + grid_ops.dy(ny)
    force = np.clip(gain * kappa, -clamp, clamp)
    return force * g


# ---------------------------------------------------------------------------
# synthetic scenes


def random_blob_image(
    seed: int, size: int = 20, n_blobs: int = 2, low: float = 10.0, high: float = 80.0
) -> np.ndarray:
    """Small test image: soft random blobs on a flat background.

    Contrast is kept moderate so explicit fitting steps at dt = 1e-3 stay in
    the monotone-descent regime.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.full((size, size), low)
    for _ in range(n_blobs):
        cy, cx = rng.uniform(size * 0.2, size * 0.8, size=2)
        r = rng.uniform(size * 0.12, size * 0.3)
        img += (high - low) * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * r * r))
    return np.clip(img, 0.0, 255.0)


def two_blob_image(size: int = 64) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Two bright discs on a dark background plus their individual masks."""
    yy, xx = np.mgrid[0:size, 0:size]
    left = (xx - 20.0) ** 2 + (yy - 32.0) ** 2 <= 10.0**2
    right = (xx - 44.0) ** 2 + (yy - 32.0) ** 2 <= 10.0**2
    img = np.full((size, size), 30.0)
    img[left | right] = 200.0
    return img, left, right


@dataclass(frozen=True)
class AblationScene:
    image: np.ndarray
    roi: np.ndarray
    target: np.ndarray
    init_region: np.ndarray
    seed: int


ABLATION_SEED = 7


def make_ablation_scene(seed: int = ABLATION_SEED, size: int = 128) -> AblationScene:
    """Three bright blobs on a dark background, circular ROI around one.

    The target blob sits at a fixed center so the ROI stays concentric and
    the seed box stays strictly inside it; the two distractor blobs get a
    small seeded jitter. Seeding inside the target matters: it starts the
    foreground mean at the blob intensity, which selects the bright phase
    as foreground even with equal fitting weights.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    target_center = (36.0, 36.0)
    distractor_centers = [(96.0, 40.0), (64.0, 98.0)]
    radius = 8.0
    image = np.full((size, size), 20.0)
    target = (xx - target_center[0]) ** 2 + (yy - target_center[1]) ** 2 <= radius**2
    image[target] = 220.0
    for cx, cy in distractor_centers:
        jx, jy = rng.uniform(-2.0, 2.0, size=2)
        blob = (xx - (cx + jx)) ** 2 + (yy - (cy + jy)) ** 2 <= radius**2
        image[blob] = 220.0
    roi = (xx - target_center[0]) ** 2 + (yy - target_center[1]) ** 2 <= 26.0**2
    init_region = np.zeros((size, size), dtype=bool)
    half = int(radius) - 3
    cy, cx = int(target_center[1]), int(target_center[0])
    init_region[cy - half : cy + half + 1, cx - half : cx + half + 1] = True
    return AblationScene(
        image=image, roi=roi, target=target, init_region=init_region, seed=seed
    )


# ---------------------------------------------------------------------------
# ablation experiment


@dataclass(frozen=True)
class AblationConfig:
    iterations: int = 300
    dt: float = 3e-4
    eps: float = 1.0
    speed: float = 500.0
    alpha: float = 5.0
    init_amplitude: float = 5.0
    curvature_gain: float = 1e20
    curvature_clamp: float = 2e3
    seed: int = ABLATION_SEED


@dataclass
class AblationRun:
    name: str
    phi: np.ndarray
    diverged: bool
    contained: bool
    dice: float
    drift: float


def _run_curvature_variant(
    image, phi, interested, params: SolverParams, gain: float, clamp: float, n: int
) -> tuple[np.ndarray, bool]:
    """Evolution loop with the interaction force recomputed from curvature."""
    diverged = False
    for _ in range(n):
        means = compute_region_means(image, phi, interested, params.eps)
        rate = segmentation_velocity(image, phi, means, params)
        rate += mbe_velocity(phi, params)
        rate += curvature_velocity(phi, gain, clamp)
        candidate = phi + params.dt * rate
        if not np.all(np.isfinite(candidate)) or np.max(np.abs(candidate)) > params.blowup_limit:
            diverged = True
            break
        phi = candidate
    return phi, diverged


def run_ablation(config: AblationConfig | None = None) -> dict:
    """Three 300-iteration runs on the blob scene.

    (a) constant inward force outside the ROI with full regularization,
    (b) same but the force replaced by a saturated curvature comparator,
    (c) same as (a) with regularization off (mu = 0).

    Expectations: (a) stays contained in the ROI and hits dice >= 0.9 on the
    target blob; (b) leaks outside the ROI; (a) keeps a smaller near-contour
    slope drift than (c). Divergence in (c) counts as a recorded outcome,
    with its drift treated as unbounded.
    """
    config = config or AblationConfig()
    scene = make_ablation_scene(config.seed)
    base = SolverParams(
        mu=1.0,
        alpha=config.alpha,
        dt=config.dt,
        eps=config.eps,
        steps_per_round=config.iterations,
    )
    # Seed high inside the box, mildly negative outside: the shallow exterior
    # keeps the smoothed-delta response alive there, which is what lets the
    # fitting term act on the distractor blobs in the comparator run.
    phi0 = np.where(scene.init_region, config.init_amplitude, -1.0)
    force = np.where(scene.roi, 0.0, -config.speed)
    runs: dict[str, AblationRun] = {}

    def finish(name: str, phi: np.ndarray, diverged: bool) -> AblationRun:
        seg = mask_from_field(phi)
        contained = not bool((seg & ~scene.roi).any())
        dice = evaluate(seg, scene.target).dice if seg.any() else 0.0
        drift = math.inf if diverged else signed_distance_drift(phi)
        rec = AblationRun(
            name=name, phi=phi, diverged=diverged,
            contained=contained, dice=dice, drift=drift,
        )
        runs[name] = rec
        return rec

    # (a) proposed configuration
    state = SolverState(
        image=scene.image, phi=phi0.copy(), velocity=force,
        interested=scene.roi, params=base,
    )
    try:
        run(state, config.iterations)
        finish("constant_force", state.phi, False)
    except Exception:
        finish("constant_force", state.phi, True)

    # (b) curvature comparator
    phi_b, div_b = _run_curvature_variant(
        grid_ops.as_image(scene.image), phi0.copy(), scene.roi, base,
        config.curvature_gain, config.curvature_clamp, config.iterations,
    )
    finish("curvature_force", phi_b, div_b)

    # (c) regularization off
    state_c = SolverState(
        image=scene.image, phi=phi0.copy(), velocity=force,
        interested=scene.roi, params=base.replace(mu=0.0),
    )
    try:
        run(state_c, config.iterations)
        finish("no_regularization", state_c.phi, False)
    except Exception:
        finish("no_regularization", state_c.phi, True)

    a, b, c = runs["constant_force"], runs["curvature_force"], runs["no_regularization"]
    return {
        "config": {
            "iterations": config.iterations,
            "dt": config.dt,
            "eps": config.eps,
            "speed": config.speed,
            "curvature_clamp": config.curvature_clamp,
            "seed": config.seed,
        },
        "constant_force": {
            "contained": a.contained, "dice": a.dice,
            "drift": a.drift, "diverged": a.diverged,
        },
        "curvature_force": {
            "contained": b.contained, "dice": b.dice,
            "drift": b.drift, "diverged": b.diverged,
        },
        "no_regularization": {
            "contained": c.contained, "dice": c.dice,
            "drift": None if math.isinf(c.drift) else c.drift, "diverged": c.diverged,
        },
        "passed": bool(
            a.contained and not a.diverged and a.dice >= 0.9
            and not b.contained
            and a.drift < c.drift
        ),
        "runs": runs,
    }


# ---------------------------------------------------------------------------
# two-round nested workflow (reconstitution experiment)

# Tuned stable integration for the nested demo. dt sits under the explicit
# fourth-order bound; eps shrinks the step-function tails. The two-phase
# labeling is energy-degenerate at lambda1 = lambda2 and the global
# foreground mean (unlike the interest-restricted background mean) picks up
# the bright border outside the drawn box, which tips the run toward the
# inverted labeling; lambda2 = 1.1 counters that tilt and stays robust
# across dt in [1e-4, 3e-4], eps in [0.2, 0.3], margins 1-3 and round
# lengths 150-300.
NESTED_DEMO_PARAMS = {
    "lambda2": 1.1,
    "dt": 2e-4,
    "eps": 0.25,
    "steps_per_round": 200,
}
NESTED_DEMO_MARGIN = 2
NESTED_DEMO_SPEED = 500.0
NESTED_DEMO_ROUND2_STEPS = 100


def nested_demo_script() -> dict:
    """Canonical two-round script for the nested image.

    Round 1 seeds a near-full box and contracts onto the dark square;
    round 2 scribbles a disc over the inner circle from a foreground seed
    point, carving it out. Shared by the validation experiment, the CLI
    round-trip tests and the bundled UI demo.
    """
    m = NESTED_DEMO_MARGIN
    hi = NESTED_SIZE - 1 - m
    center = NESTED_CENTER
    return {
        "params": dict(NESTED_DEMO_PARAMS),
        "events": [
            {
                "round": 1,
                "shape": {"type": "rect", "coords": [m, m, hi, hi]},
                "point": None,
                "speed": NESTED_DEMO_SPEED,
            },
            {
                "round": 2,
                "shape": {
                    "type": "scribble",
                    "points": [[center, center]],
                    "radius": NESTED_CIRCLE_RADIUS,
                },
                "point": [25, 25],
                "speed": 0.0,
                "steps": NESTED_DEMO_ROUND2_STEPS,
            },
        ],
    }


RECONSTITUTION_DICE_FLOOR = 0.95


def run_reconstitution_experiment() -> dict:
    """Two-round nested workflow; dice floors at 0.95 for both stages."""
    script = nested_demo_script()
    image = make_nested_image()
    params = SolverParams().replace(**script["params"])
    state = SessionState(image=image, params=params)

    event1 = parse_event(script["events"][0], image.shape)
    apply_interaction(state, event1)
    mask_round1 = state.mask()
    dice_round1 = evaluate(mask_round1, nested_square_mask()).dice

    event2 = parse_event(script["events"][1], image.shape)
    apply_interaction(state, event2)
    mask_round2 = state.mask()
    dice_round2 = evaluate(mask_round2, nested_carved_mask()).dice

    return {
        "dice_round1": dice_round1,
        "dice_round2": dice_round2,
        "floor": RECONSTITUTION_DICE_FLOOR,
        "params": script["params"],
        "mask_round1": mask_round1,
        "mask_round2": mask_round2,
        "passed": bool(
            dice_round1 >= RECONSTITUTION_DICE_FLOOR
            and dice_round2 >= RECONSTITUTION_DICE_FLOOR
        ),
    }


# ---------------------------------------------------------------------------
# experiment registry


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    passed: bool
    measured: dict
    expected: dict
    notes: str = ""
    # Optional named boolean masks for PNG snapshot output; never serialized.
    artifacts: dict | None = dataclasses.field(default=None, compare=False, repr=False)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "measured": self.measured,
            "expected": self.expected,
            "notes": self.notes,
        }


def run_energy_experiment() -> ExperimentReport:
    e_full = analytic_cv_energy(0.0)
    e_carved = analytic_cv_energy(10.0)
    image = make_nested_image()
    d_full = discrete_cv_energy(image, sharp_field_from_mask(nested_square_mask()), eps=1.0)
    d_carved = discrete_cv_energy(image, sharp_field_from_mask(nested_carved_mask()), eps=1.0)
    checks = [
        abs(e_full - ENERGY_FULL_SQUARE) <= ENERGY_RTOL * ENERGY_FULL_SQUARE,
        abs(e_carved - ENERGY_CARVED) <= ENERGY_RTOL * ENERGY_CARVED,
        abs(d_full - e_full) <= DISCRETE_ENERGY_RTOL * e_full,
        abs(d_carved - e_carved) <= DISCRETE_ENERGY_RTOL * e_carved,
    ]
    return ExperimentReport(
        name="energy",
        passed=all(checks),
        measured={
            "analytic_full_square": e_full,
            "analytic_carved": e_carved,
            "discrete_full_square": d_full,
            "discrete_carved": d_carved,
        },
        expected={
            "full_square": ENERGY_FULL_SQUARE,
            "carved": ENERGY_CARVED,
            "analytic_rtol": ENERGY_RTOL,
            "discrete_rtol": DISCRETE_ENERGY_RTOL,
        },
    )


COLLAPSE_WINDOW = (12.0, 18.0)
COLLAPSE_SCALING_RTOL = 0.10


def run_collapse_suite() -> ExperimentReport:
    base = run_collapse_experiment(CollapseSpec())
    fast = run_collapse_experiment(CollapseSpec(speed=-2.0))
    wide = run_collapse_experiment(CollapseSpec(radius=30.0, size=128))
    lo, hi = COLLAPSE_WINDOW
    in_window = lo <= base.collapse_time <= hi
    halves = abs(fast.collapse_time - base.collapse_time / 2.0) <= (
        COLLAPSE_SCALING_RTOL * base.collapse_time / 2.0
    )
    doubles = abs(wide.collapse_time - 2.0 * base.collapse_time) <= (
        COLLAPSE_SCALING_RTOL * 2.0 * base.collapse_time
    )
    return ExperimentReport(
        name="collapse",
        passed=bool(in_window and halves and doubles),
        measured={
            "base_time": base.collapse_time,
            "double_speed_time": fast.collapse_time,
            "double_radius_time": wide.collapse_time,
        },
        expected={
            "window": list(COLLAPSE_WINDOW),
            "scaling_rtol": COLLAPSE_SCALING_RTOL,
        },
    )


def run_inequality_suite() -> ExperimentReport:
    result = run_inequality_experiment()
    return ExperimentReport(
        name="inequality",
        passed=bool(result["passed"]),
        measured={
            "coarse_max_ratio": result["coarse_max_ratio"],
            "fine_max_ratio": result["fine_max_ratio"],
            "growth": result["growth"],
        },
        expected={"growth_limit": result["limit"]},
        notes=f"skipped samples: {result['skipped']}" if result["skipped"] else "",
    )


def run_reconstitution_suite() -> ExperimentReport:
    result = run_reconstitution_experiment()
    return ExperimentReport(
        name="reconstitution",
        passed=bool(result["passed"]),
        measured={
            "dice_round1": result["dice_round1"],
            "dice_round2": result["dice_round2"],
        },
        expected={"dice_floor": result["floor"], "params": result["params"]},
        artifacts={
            "round1_mask": result["mask_round1"],
            "round2_mask": result["mask_round2"],
        },
    )


def run_ablation_suite() -> ExperimentReport:
    result = run_ablation()
    return ExperimentReport(
        name="ablation",
        passed=bool(result["passed"]),
        measured={
            "constant_force": result["constant_force"],
            "curvature_force": result["curvature_force"],
            "no_regularization": result["no_regularization"],
        },
        expected={
            "constant_force": "contained in ROI, dice >= 0.9",
            "curvature_force": "not contained in ROI",
            "drift": "constant_force < no_regularization",
        },
        artifacts={
            name: mask_from_field(rec.phi) for name, rec in result["runs"].items()
        },
    )


EXPERIMENTS = {
    "energy": run_energy_experiment,
    "collapse": run_collapse_suite,
    "inequality": run_inequality_suite,
    "reconstitution": run_reconstitution_suite,
    "ablation": run_ablation_suite,
}


def run_experiments(names=None) -> list[ExperimentReport]:
    """Run the named experiments (all of them by default), in order."""
    if names is None or names == "all" or names == ["all"]:
        names = list(EXPERIMENTS)
    unknown = [n for n in names if n not in EXPERIMENTS]
    if unknown:
        raise ParameterError(f"unknown experiment selectors: {unknown}")
    return [EXPERIMENTS[name]() for name in names]
