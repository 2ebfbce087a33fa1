"""Multi-round interaction protocol: events, shapes and session state.

A session starts empty. Round 1 seeds the level-set field from the user's
region and arms a contraction force outside it; every later round flips the
drawn region toward foreground or background depending on the field sign at
the seed point, patches the force there and re-runs the solver. Regions
arrive as shapes (rect, polygon, scribble) in image coordinates where x is
the column and y the row; masks derived from shapes are deterministic, so a
persisted event script replays bit-exactly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import grid_ops
from .errors import (
    AmbiguousPointError,
    ParameterError,
    ProtocolError,
    RoundOrderError,
)
from .evolve import SolverParams, SolverState, StepDiagnostics, run

DEFAULT_SCRIBBLE_RADIUS = 3.0


def field_checksum(phi: np.ndarray) -> str:
    """SHA-256 of the row-major little-endian float64 bytes of the field."""
    data = np.ascontiguousarray(phi, dtype="<f8")
    return hashlib.sha256(data.tobytes()).hexdigest()


# ---------------------------------------------------------------------------
# shapes -> masks


def rect_mask(grid_shape: tuple[int, int], coords) -> np.ndarray:
    """Axis-aligned rectangle [x0, y0, x1, y1], inclusive at pixel centers."""
    if len(coords) != 4:
        raise ParameterError("rect coords must be [x0, y0, x1, y1]")
    x0, y0, x1, y1 = (float(c) for c in coords)
    if x1 < x0 or y1 < y0:
        raise ParameterError("rect coords must satisfy x0 <= x1 and y0 <= y1")
    h, w = grid_shape
    ys = np.arange(h, dtype=np.float64)[:, None]
    xs = np.arange(w, dtype=np.float64)[None, :]
    return (xs >= x0) & (xs <= x1) & (ys >= y0) & (ys <= y1)


def polygon_mask(grid_shape: tuple[int, int], points) -> np.ndarray:
    """Even-odd fill of a closed polygon, tested at integer pixel centers."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ParameterError("polygon needs at least 3 [x, y] vertices")
    h, w = grid_shape
    ys = np.arange(h, dtype=np.float64)[:, None]
    xs = np.arange(w, dtype=np.float64)[None, :]
    inside = np.zeros(grid_shape, dtype=bool)
    n = pts.shape[0]
    for k in range(n):
        x1, y1 = pts[k]
        x2, y2 = pts[(k + 1) % n]
        crosses = (y1 > ys) != (y2 > ys)
        if not crosses.any():
            continue
        # safe: y2 != y1 wherever crosses holds
        with np.errstate(divide="ignore", invalid="ignore"):
            x_at = x1 + (x2 - x1) * (ys - y1) / (y2 - y1)
        inside ^= crosses & (xs < x_at)
    return inside


def scribble_mask(grid_shape: tuple[int, int], points, radius: float | None = None) -> np.ndarray:
    """Freehand stroke dilated to a disc: pixels within `radius` of the
    polyline through `points` (a single point yields a plain disc)."""
    if radius is None:
        radius = DEFAULT_SCRIBBLE_RADIUS
    radius = float(radius)
    if not np.isfinite(radius) or radius <= 0.0:
        raise ParameterError(f"scribble radius must be positive, got {radius}")
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise ParameterError("scribble needs at least one [x, y] point")
    h, w = grid_shape
    ys = np.arange(h, dtype=np.float64)[:, None]
    xs = np.arange(w, dtype=np.float64)[None, :]
    d2 = np.full(grid_shape, np.inf)
    segments = [(pts[0], pts[0])] if pts.shape[0] == 1 else list(zip(pts[:-1], pts[1:]))
    for (x1, y1), (x2, y2) in segments:
        ux, uy = x2 - x1, y2 - y1
        norm2 = ux * ux + uy * uy
        if norm2 == 0.0:
            px, py = np.full_like(xs + ys, x1), np.full_like(xs + ys, y1)
        else:
            t = np.clip(((xs - x1) * ux + (ys - y1) * uy) / norm2, 0.0, 1.0)
            px, py = x1 + t * ux, y1 + t * uy
        d2 = np.minimum(d2, (xs - px) ** 2 + (ys - py) ** 2)
    return d2 <= radius * radius


def mask_from_shape(shape: dict, grid_shape: tuple[int, int]) -> np.ndarray:
    """Materialize a shape description into a boolean region mask."""
    if not isinstance(shape, dict) or "type" not in shape:
        raise ParameterError("shape must be an object with a 'type' key")
    kind = shape["type"]
    if kind == "rect":
        return rect_mask(grid_shape, shape.get("coords", ()))
    if kind == "polygon":
        return polygon_mask(grid_shape, shape.get("points", ()))
    if kind == "scribble":
        return scribble_mask(grid_shape, shape.get("points", ()), shape.get("radius"))
    raise ParameterError(f"unknown shape type {kind!r}")


# ---------------------------------------------------------------------------
# events


@dataclass(frozen=True)
class InteractionEvent:
    """One user round: a region, an optional seed point and a speed.

    Round 1 seeds the session (no point, speed > 0); later rounds require a
    point and allow speed >= 0. `steps` optionally overrides the per-round
    step count. The original shape dict is retained verbatim so scripts
    replay bit-exactly.
    """

    round_index: int
    region: np.ndarray
    speed: float
    point: tuple[int, int] | None = None
    steps: int | None = None
    shape: dict | None = None

    def validate(self, grid_shape: tuple[int, int]) -> None:
        if int(self.round_index) != self.round_index or self.round_index < 1:
            raise ParameterError(f"round index must be >= 1, got {self.round_index}")
        region = grid_ops.as_mask(self.region)
        if region.shape != grid_shape:
            raise ParameterError(
                f"region shape {region.shape} does not match grid {grid_shape}"
            )
        area = int(region.sum())
        if area == 0:
            raise ProtocolError("event region is empty on this grid")
        if not np.isfinite(self.speed):
            raise ParameterError("speed must be finite")
        if self.steps is not None and (int(self.steps) != self.steps or self.steps < 1):
            raise ParameterError(f"steps override must be >= 1, got {self.steps}")
        if self.round_index == 1:
            if area == region.size:
                raise ProtocolError("first-round region must not cover the full grid")
            if self.point is not None:
                raise ParameterError("round 1 takes no seed point")
            if self.speed <= 0.0:
                raise ParameterError("round 1 speed must be > 0")
        else:
            if self.point is None:
                raise ParameterError("rounds after the first require a seed point")
            x, y = self.point
            h, w = grid_shape
            if not (0 <= x < w and 0 <= y < h):
                raise ParameterError(f"seed point {self.point} is outside the grid")
            if self.speed < 0.0:
                raise ParameterError("speed must be >= 0")


def parse_event(obj: dict, grid_shape: tuple[int, int]) -> InteractionEvent:
    """Build an event from its script/JSON form."""
    if not isinstance(obj, dict):
        raise ParameterError("event must be a JSON object")
    try:
        round_index = int(obj["round"])
        shape = obj["shape"]
        speed = float(obj["speed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParameterError(f"malformed event: {exc}") from exc
    region = mask_from_shape(shape, grid_shape)
    point = obj.get("point")
    if point is not None:
        try:
            point = (int(point[0]), int(point[1]))
        except (TypeError, ValueError, IndexError) as exc:
            raise ParameterError(f"malformed seed point: {exc}") from exc
    steps = obj.get("steps")
    if steps is not None:
        steps = int(steps)
    return InteractionEvent(
        round_index=round_index,
        region=region,
        speed=speed,
        point=point,
        steps=steps,
        shape=shape,
    )


def event_to_json(event: InteractionEvent) -> dict:
    if event.shape is None:
        raise ParameterError("event carries no shape; cannot serialize to script form")
    out = {
        "round": event.round_index,
        "shape": event.shape,
        "point": list(event.point) if event.point is not None else None,
        "speed": event.speed,
    }
    if event.steps is not None:
        out["steps"] = event.steps
    return out


# ---------------------------------------------------------------------------
# level-set seeding and patching


def init_lsf(region) -> np.ndarray:
    """Balanced piecewise-constant seed field.

    phi = +c inside the region and -1 outside with c = area_out / area_in,
    so the field sums to zero over the grid.
    """
    region = grid_ops.as_mask(region)
    inside = int(region.sum())
    total = region.size
    if inside == 0:
        raise ProtocolError("seed region is empty")
    if inside == total:
        raise ProtocolError("seed region covers the full grid")
    c = (total - inside) / inside
    phi = np.full(region.shape, -1.0)
    phi[region] = c
    return phi


def build_first_velocity(region, speed: float) -> np.ndarray:
    """Contraction force for round 1: -speed outside the region, 0 inside."""
    region = grid_ops.as_mask(region)
    speed = float(speed)
    if not np.isfinite(speed) or speed <= 0.0:
        raise ParameterError(f"first-round speed must be > 0, got {speed}")
    return np.where(region, 0.0, -speed)


def reconstitute(phi, region, point: tuple[int, int]) -> np.ndarray:
    """Flip the drawn region to the opposite phase of phi at the seed point.

    With k = area(grid \\ region) / area(region), the region is overwritten
    with +k when phi(point) < 0 (pull to foreground) and with -k when
    phi(point) > 0 (push to background). An exactly-zero sample is refused
    as ambiguous.
    """
    phi = grid_ops.as_field(phi)
    region = grid_ops.as_mask(region, like=phi)
    x, y = int(point[0]), int(point[1])
    h, w = phi.shape
    if not (0 <= x < w and 0 <= y < h):
        raise ParameterError(f"seed point ({x}, {y}) is outside the grid")
    value = phi[y, x]
    if value == 0.0:
        raise AmbiguousPointError((x, y))
    inside = int(region.sum())
    if inside == 0:
        raise ProtocolError("reconstitution region is empty")
    if inside == region.size:
        raise ProtocolError("reconstitution region covers the full grid")
    k = (region.size - inside) / inside
    out = phi.copy()
    out[region] = k if value < 0.0 else -k
    return out


def patch_velocity(velocity, region, point_sign: float, speed: float) -> np.ndarray:
    """Overwrite the force on the drawn region to follow the flip direction.

    point_sign is the sign of phi at the seed point before reconstitution:
    negative -> +speed (expand), positive -> -speed (contract). Pixels
    outside the region keep their inherited force.
    """
    velocity = grid_ops.as_field(velocity)
    region = grid_ops.as_mask(region, like=velocity)
    speed = float(speed)
    if not np.isfinite(speed) or speed < 0.0:
        raise ParameterError(f"patch speed must be >= 0, got {speed}")
    if point_sign == 0.0:
        raise AmbiguousPointError((-1, -1))
    out = velocity.copy()
    out[region] = speed if point_sign < 0.0 else -speed
    return out


# ---------------------------------------------------------------------------
# session state


@dataclass
class RoundRecord:
    """History entry for one executed interaction round.

    point_sign records which side of the zero set the seed point sat on
    (+1/-1, None for round 1) so that velocity patches can be rebuilt from
    metadata without re-running the solver.
    """

    round_index: int
    event: dict
    steps_run: int
    pre_checksum: str | None
    phi_checksum: str
    last_diagnostics: dict | None
    overlapping_region: bool
    point_sign: float | None = None
    metrics: dict | None = None
    phi_snapshot: np.ndarray | None = None

    def as_dict(self) -> dict:
        return {
            "round": self.round_index,
            "event": self.event,
            "steps_run": self.steps_run,
            "pre_checksum": self.pre_checksum,
            "phi_checksum": self.phi_checksum,
            "last_diagnostics": self.last_diagnostics,
            "overlapping_region": self.overlapping_region,
            "point_sign": self.point_sign,
            "metrics": self.metrics,
        }


@dataclass
class SessionState:
    """A live segmentation session. phi/velocity stay None until round 1."""

    image: np.ndarray
    params: SolverParams
    phi: np.ndarray | None = None
    velocity: np.ndarray | None = None
    interested: np.ndarray | None = None
    history: list[RoundRecord] = dc_field(default_factory=list)
    keep_round_snapshots: bool = False

    def __post_init__(self):
        self.image = grid_ops.as_image(self.image)

    @property
    def started(self) -> bool:
        return self.phi is not None

    @property
    def next_round(self) -> int:
        return len(self.history) + 1

    def mask(self) -> np.ndarray | None:
        """Strictly-positive phase of the field, or None before round 1."""
        if self.phi is None:
            return None
        return self.phi > 0.0


def apply_interaction(
    session: SessionState,
    event: InteractionEvent,
    progress=None,
) -> RoundRecord:
    """Execute one interaction round: seed or flip, patch the force, evolve.

    Mutates the session in place and appends a history record. On divergence
    mid-round the session rolls back to its pre-round state and the error
    propagates, so persisted scripts only ever contain completed rounds.
    """
    grid_shape = session.image.shape
    if event.round_index != session.next_round:
        raise RoundOrderError(
            f"expected round {session.next_round}, got {event.round_index}"
        )
    event.validate(grid_shape)
    region = grid_ops.as_mask(event.region, like=session.image)

    before = (session.phi, session.velocity, session.interested)
    pre_checksum = field_checksum(session.phi) if session.phi is not None else None

    if event.round_index == 1:
        session.phi = init_lsf(region)
        session.velocity = build_first_velocity(region, event.speed)
        session.interested = region.copy()
        overlapping = False
        point_sign = None
    else:
        x, y = event.point
        sign = float(session.phi[y, x])
        if sign == 0.0:
            raise AmbiguousPointError((x, y))
        point_sign = 1.0 if sign > 0.0 else -1.0
        session.phi = reconstitute(session.phi, region, event.point)
        session.velocity = patch_velocity(session.velocity, region, sign, event.speed)
        overlapping = bool((region & session.interested).any())
        session.interested = session.interested | region

    steps = event.steps if event.steps is not None else session.params.steps_per_round
    state = SolverState(
        image=session.image,
        phi=session.phi,
        velocity=session.velocity,
        interested=session.interested,
        params=session.params,
    )
    try:
        diagnostics = run(state, steps, progress=progress)
    except Exception:
        session.phi, session.velocity, session.interested = before
        raise
    session.phi = state.phi

    record = RoundRecord(
        round_index=event.round_index,
        event=event_to_json(event) if event.shape is not None else {},
        steps_run=steps,
        pre_checksum=pre_checksum,
        phi_checksum=field_checksum(session.phi),
        last_diagnostics=diagnostics[-1].as_dict() if diagnostics else None,
        overlapping_region=overlapping,
        point_sign=point_sign,
        phi_snapshot=session.phi.copy() if session.keep_round_snapshots else None,
    )
    session.history.append(record)
    return record
