"""Disk persistence for sessions: images, scripts, snapshots, replay.

Layout under the data directory, one folder per session id:

    image.png      original upload, verbatim bytes
    gt.png         optional ground-truth upload, verbatim bytes
    params.json    solver parameters for the session
    script.json    ordered log of committed operations; entries are either
                   {"kind": "interaction", "event": {...}} or
                   {"kind": "steps", "n": int, "dt": float | null}
    state.json     round checksums and bookkeeping
    phi.bin        latest field snapshot (cache)

The script is the source of truth: replaying it against the stored image
reproduces the field bit-exactly, and the state.json checksums verify it.
The binary snapshot only short-circuits that replay; when it is missing or
stale the loader silently falls back to replay.
"""

from __future__ import annotations

import io
import json
import logging
import struct
import threading
import uuid
from dataclasses import dataclass, field as dc_field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, ParameterError, ProtocolError
from .evolve import SolverParams, SolverState, run
from .session import (
    RoundRecord,
    SessionState,
    apply_interaction,
    build_first_velocity,
    field_checksum,
    mask_from_shape,
    parse_event,
    patch_velocity,
)

log = logging.getLogger(__name__)

FIELD_MAGIC = b"PHIGRID1"

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def decode_image(data: bytes) -> np.ndarray:
    """Decode image bytes to a float64 grayscale grid in [0, 255].

    Color inputs collapse to luminance 0.299 R + 0.587 G + 0.114 B; 16-bit
    grayscale rescales to the 8-bit range.
    """
    try:
        with Image.open(io.BytesIO(data)) as img:
            img.load()
            mode = img.mode
            if mode in ("RGB", "RGBA", "P", "CMYK", "YCbCr"):
                rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
                arr = rgb @ np.array(LUMA_WEIGHTS)
            elif mode in ("I", "I;16", "I;16B", "I;16L"):
                arr = np.asarray(img, dtype=np.float64) * (255.0 / 65535.0)
            elif mode == "F":
                arr = np.asarray(img, dtype=np.float64)
            else:
                arr = np.asarray(img.convert("L"), dtype=np.float64)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"could not decode image bytes: {exc}") from exc
    arr = np.clip(arr, 0.0, 255.0)
    if arr.ndim != 2 or min(arr.shape) < 3:
        raise DecodeError(f"image must be 2-D and at least 3x3, got shape {arr.shape}")
    return arr


def encode_mask_png(mask: np.ndarray) -> bytes:
    """Foreground mask as an 8-bit PNG, 255 inside and 0 outside."""
    img = Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def write_field(path: Path, phi: np.ndarray) -> None:
    """Binary field snapshot: magic, u32 height, u32 width, then row-major
    little-endian float64 samples."""
    data = np.ascontiguousarray(phi, dtype="<f8")
    header = FIELD_MAGIC + struct.pack("<II", data.shape[0], data.shape[1])
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(header + data.tobytes())
    tmp.replace(path)


def read_field(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < len(FIELD_MAGIC) + 8 or not raw.startswith(FIELD_MAGIC):
        raise DecodeError(f"{path} is not a field snapshot")
    h, w = struct.unpack_from("<II", raw, len(FIELD_MAGIC))
    expected = len(FIELD_MAGIC) + 8 + h * w * 8
    if len(raw) != expected:
        raise DecodeError(f"{path} is truncated: {len(raw)} bytes, expected {expected}")
    flat = np.frombuffer(raw, dtype="<f8", offset=len(FIELD_MAGIC) + 8)
    return flat.reshape(h, w).astype(np.float64)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class SessionRecord:
    """In-memory handle for one persisted session."""

    session_id: str
    session: SessionState
    script: list[dict]
    ground_truth: np.ndarray | None
    created: str
    updated: str
    lock: threading.Lock = dc_field(default_factory=threading.Lock, repr=False)


class SessionStore:
    """Directory-backed session registry with replay-based recovery."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._records: dict[str, SessionRecord] = {}
        self._registry_lock = threading.Lock()

    # -- paths ------------------------------------------------------------

    def _dir(self, session_id: str) -> Path:
        return self.data_dir / session_id

    def list_ids(self) -> list[str]:
        on_disk = {
            p.name for p in self.data_dir.iterdir()
            if p.is_dir() and (p / "script.json").exists()
        }
        return sorted(on_disk | set(self._records))

    # -- creation ---------------------------------------------------------

    def create(
        self,
        image_bytes: bytes,
        params: SolverParams | None = None,
        ground_truth_bytes: bytes | None = None,
    ) -> SessionRecord:
        image = decode_image(image_bytes)
        params = params or SolverParams()
        gt = None
        if ground_truth_bytes is not None:
            gt_img = decode_image(ground_truth_bytes)
            if gt_img.shape != image.shape:
                raise ParameterError(
                    f"ground-truth shape {gt_img.shape} does not match image {image.shape}"
                )
            gt = gt_img > 127.0

        session_id = uuid.uuid4().hex
        folder = self._dir(session_id)
        folder.mkdir(parents=True)
        (folder / "image.png").write_bytes(image_bytes)
        if ground_truth_bytes is not None:
            (folder / "gt.png").write_bytes(ground_truth_bytes)
        (folder / "params.json").write_text(json.dumps(params.to_dict(), indent=2))
        (folder / "script.json").write_text("[]")

        record = SessionRecord(
            session_id=session_id,
            session=SessionState(image=image, params=params),
            script=[],
            ground_truth=gt,
            created=_now(),
            updated=_now(),
        )
        self._write_state(record)
        with self._registry_lock:
            self._records[session_id] = record
        return record

    # -- retrieval --------------------------------------------------------

    def get(self, session_id: str) -> SessionRecord:
        with self._registry_lock:
            record = self._records.get(session_id)
        if record is not None:
            return record
        record = self._load(session_id)
        with self._registry_lock:
            return self._records.setdefault(session_id, record)

    def _load(self, session_id: str) -> SessionRecord:
        folder = self._dir(session_id)
        if not (folder / "script.json").exists():
            raise KeyError(session_id)
        image_bytes = (folder / "image.png").read_bytes()
        image = decode_image(image_bytes)
        params = SolverParams.from_dict(json.loads((folder / "params.json").read_text()))
        script = json.loads((folder / "script.json").read_text())
        state_meta = json.loads((folder / "state.json").read_text())
        gt = None
        if (folder / "gt.png").exists():
            gt = decode_image((folder / "gt.png").read_bytes()) > 127.0

        session = self._replay(image, params, script, folder, state_meta)
        return SessionRecord(
            session_id=session_id,
            session=session,
            script=script,
            ground_truth=gt,
            created=state_meta.get("created", _now()),
            updated=state_meta.get("updated", _now()),
        )

    def _replay(
        self,
        image: np.ndarray,
        params: SolverParams,
        script: list[dict],
        folder: Path,
        state_meta: dict,
    ) -> SessionState:
        session = SessionState(image=image, params=params)
        expected = state_meta.get("phi_checksum")

        snapshot_path = folder / "phi.bin"
        if script and expected and snapshot_path.exists():
            try:
                phi = read_field(snapshot_path)
                if phi.shape == image.shape and field_checksum(phi) == expected:
                    self._rebuild_from_meta(session, state_meta.get("rounds", []))
                    session.phi = phi
                    return session
                log.warning("stale field snapshot for %s; replaying script", folder.name)
            except DecodeError:
                log.warning("unreadable field snapshot for %s; replaying script", folder.name)
            session = SessionState(image=image, params=params)

        for entry in script:
            self._apply_entry(session, entry)
        if expected and session.phi is not None:
            actual = field_checksum(session.phi)
            if actual != expected:
                raise ProtocolError(
                    f"replay checksum mismatch for {folder.name}: "
                    f"expected {expected}, got {actual}"
                )
        return session

    def _rebuild_from_meta(self, session: SessionState, rounds_meta: list[dict]) -> None:
        """Rebuild velocity, interest region and history from state metadata.

        Only used when a checksum-verified snapshot already provides the
        field. Velocity patches are deterministic functions of each round's
        region, speed and recorded seed sign, so no solver steps are needed.
        """
        for meta in rounds_meta:
            event = meta["event"]
            region = mask_from_shape(event["shape"], session.image.shape)
            speed = float(event["speed"])
            if meta["round"] == 1:
                session.velocity = build_first_velocity(region, speed)
                session.interested = region.copy()
            else:
                session.velocity = patch_velocity(
                    session.velocity, region, float(meta["point_sign"]), speed
                )
                session.interested = session.interested | region
            session.history.append(
                RoundRecord(
                    round_index=meta["round"],
                    event=event,
                    steps_run=meta["steps_run"],
                    pre_checksum=meta["pre_checksum"],
                    phi_checksum=meta["phi_checksum"],
                    last_diagnostics=meta["last_diagnostics"],
                    overlapping_region=meta["overlapping_region"],
                    point_sign=meta.get("point_sign"),
                    metrics=meta.get("metrics"),
                )
            )

    def _apply_entry(self, session: SessionState, entry: dict) -> None:
        kind = entry.get("kind")
        if kind == "interaction":
            event = parse_event(entry["event"], session.image.shape)
            apply_interaction(session, event)
        elif kind == "steps":
            if not session.started:
                raise ProtocolError("steps entry before the first interaction")
            params = session.params
            if entry.get("dt") is not None:
                params = params.replace(dt=float(entry["dt"]))
            state = SolverState(
                image=session.image,
                phi=session.phi,
                velocity=session.velocity,
                interested=session.interested,
                params=params,
            )
            run(state, int(entry["n"]))
            session.phi = state.phi
        else:
            raise ProtocolError(f"unknown script entry kind {kind!r}")

    # -- commit -----------------------------------------------------------

    def commit(self, record: SessionRecord, entry: dict) -> None:
        """Append a script entry and persist snapshot plus state metadata."""
        record.script.append(entry)
        record.updated = _now()
        folder = self._dir(record.session_id)
        tmp = folder / "script.json.tmp"
        tmp.write_text(json.dumps(record.script, indent=2))
        tmp.replace(folder / "script.json")
        if record.session.phi is not None:
            write_field(folder / "phi.bin", record.session.phi)
        self._write_state(record)

    def _write_state(self, record: SessionRecord) -> None:
        folder = self._dir(record.session_id)
        session = record.session
        meta = {
            "session_id": record.session_id,
            "created": record.created,
            "updated": record.updated,
            "rounds": [r.as_dict() for r in session.history],
            "phi_checksum": field_checksum(session.phi) if session.started else None,
        }
        tmp = folder / "state.json.tmp"
        tmp.write_text(json.dumps(meta, indent=2))
        tmp.replace(folder / "state.json")

    # -- recovery hooks (used by tests and the service) ---------------------

    def drop_cached(self, session_id: str) -> None:
        """Forget the in-memory record; next access reloads from disk."""
        with self._registry_lock:
            self._records.pop(session_id, None)
