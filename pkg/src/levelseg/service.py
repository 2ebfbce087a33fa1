"""HTTP facade over the session engine.

Endpoints (JSON unless noted):

    POST /sessions                        create from base64 image bytes
    GET  /sessions/{id}                   full session state summary
    POST /sessions/{id}/interactions      run one interaction round
    POST /sessions/{id}/steps             extra solver steps, streamed as
                                          JSON lines (one diagnostics record
                                          per step, terminal status record)
    GET  /sessions/{id}/mask.png          current foreground mask as PNG
    GET  /sessions/{id}/contours          zero-set polylines in (x, y)

Error mapping: unknown session 404, out-of-order round 409, everything a
client can fix (bad payloads, ambiguous seed points, undecodable images,
divergent step requests) 422. Mutations hold a per-session lock and commit
only after a round or step batch finishes, so concurrent readers always see
a committed state and a mid-flight divergence leaves the last good field.
"""

from __future__ import annotations

import base64
import binascii
import dataclasses
import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response, StreamingResponse

from .contours import contours_to_json, extract_contours
from .errors import (
    AmbiguousPointError,
    DivergenceError,
    LevelSegError,
    ParameterError,
    RoundOrderError,
)
from .evolve import SolverParams, SolverState, run, signed_distance_drift
from .metrics import evaluate, mask_from_field
from .session import apply_interaction, field_checksum, parse_event
from .store import SessionRecord, SessionStore, encode_mask_png

ENV_PREFIX = "LEVELSEG_"


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8077
    data_dir: str = "./levelseg-data"
    params: SolverParams = SolverParams()


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    """Config file first, then LEVELSEG_* environment overrides."""
    env = os.environ if env is None else env
    config = ServiceConfig()
    if path is not None:
        raw = json.loads(Path(path).read_text())
        params = SolverParams.from_dict(raw.get("params", {}))
        config = ServiceConfig(
            host=raw.get("host", config.host),
            port=int(raw.get("port", config.port)),
            data_dir=raw.get("data_dir", config.data_dir),
            params=params,
        )
    if ENV_PREFIX + "HOST" in env:
        config = replace(config, host=env[ENV_PREFIX + "HOST"])
    if ENV_PREFIX + "PORT" in env:
        config = replace(config, port=int(env[ENV_PREFIX + "PORT"]))
    if ENV_PREFIX + "DATA_DIR" in env:
        config = replace(config, data_dir=env[ENV_PREFIX + "DATA_DIR"])
    return config


def _decode_b64(field_name: str, payload: str) -> bytes:
    try:
        return base64.b64decode(payload, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ParameterError(f"{field_name} is not valid base64: {exc}") from exc


def _round_metrics(record: SessionRecord) -> dict | None:
    if record.ground_truth is None or not record.session.started:
        return None
    seg = mask_from_field(record.session.phi)
    return evaluate(seg, record.ground_truth).as_dict()


def _session_summary(record: SessionRecord) -> dict:
    session = record.session
    h, w = session.image.shape
    summary = {
        "id": record.session_id,
        "status": "active" if session.started else "awaiting first interaction",
        "width": w,
        "height": h,
        "rounds_completed": len(session.history),
        "params": session.params.to_dict(),
        "created": record.created,
        "updated": record.updated,
        "has_ground_truth": record.ground_truth is not None,
        "history": [r.as_dict() for r in session.history],
    }
    if session.started:
        phi = session.phi
        summary["phi"] = {
            "min": float(phi.min()),
            "max": float(phi.max()),
            "mean": float(phi.mean()),
            "drift": signed_distance_drift(phi),
            "checksum": field_checksum(phi),
        }
        summary["mask_area"] = int((phi > 0).sum())
        summary["interested_area"] = int(session.interested.sum())
        summary["interested_png_b64"] = base64.b64encode(
            encode_mask_png(session.interested)
        ).decode("ascii")
        metrics = _round_metrics(record)
        if metrics is not None:
            summary["metrics"] = metrics
    return summary


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    store = SessionStore(config.data_dir)
    app = FastAPI(title="levelseg", version="0.1.0")
    app.state.config = config
    app.state.store = store
    # The reference front end is served from its own dev server, so the API
    # answers cross-origin requests; sessions carry no credentials.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(LevelSegError)
    async def _handle_engine_error(request: Request, exc: LevelSegError):
        if isinstance(exc, RoundOrderError):
            status = 409
        elif isinstance(exc, DivergenceError):
            status = 422
        else:
            status = 422
        body = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, AmbiguousPointError):
            body["point"] = list(exc.point)
        if isinstance(exc, DivergenceError) and exc.step is not None:
            body["step"] = exc.step
        return JSONResponse(status_code=status, content=body)

    @app.exception_handler(KeyError)
    async def _handle_missing(request: Request, exc: KeyError):
        return JSONResponse(
            status_code=404,
            content={"error": "NotFound", "detail": f"unknown session {exc.args[0]!r}"},
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        payload = await request.json()
        if not isinstance(payload, dict) or "image_b64" not in payload:
            raise ParameterError("request body must carry image_b64")
        image_bytes = _decode_b64("image_b64", payload["image_b64"])
        gt_bytes = None
        if payload.get("ground_truth_b64"):
            gt_bytes = _decode_b64("ground_truth_b64", payload["ground_truth_b64"])
        params = config.params
        if payload.get("params"):
            params = params.replace(**_coerce_params(payload["params"]))
        record = store.create(image_bytes, params=params, ground_truth_bytes=gt_bytes)
        return _session_summary(record)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        record = store.get(session_id)
        with record.lock:
            return _session_summary(record)

    @app.post("/sessions/{session_id}/interactions")
    def post_interaction(session_id: str, payload: dict):
        record = store.get(session_id)
        with record.lock:
            event = parse_event(payload, record.session.image.shape)
            round_record = apply_interaction(record.session, event)
            round_record.metrics = _round_metrics(record)
            store.commit(record, {"kind": "interaction", "event": round_record.event})
            mask = mask_from_field(record.session.phi)
            return {
                "round": round_record.as_dict(),
                "mask_area": int(mask.sum()),
                "phi_checksum": round_record.phi_checksum,
                "contours": contours_to_json(extract_contours(record.session.phi)),
                "metrics": round_record.metrics,
            }

    @app.post("/sessions/{session_id}/steps")
    def post_steps(session_id: str, payload: dict | None = None):
        payload = payload or {}
        n = payload.get("n", 0)
        if not isinstance(n, int) or n < 0:
            raise ParameterError(f"step count must be a non-negative integer, got {n!r}")
        dt = payload.get("dt")
        if dt is not None:
            dt = float(dt)
        record = store.get(session_id)

        def stream():
            with record.lock:
                session = record.session
                if not session.started:
                    err = {"event": "error", "detail": "session has no field yet"}
                    yield json.dumps(err) + "\n"
                    return
                params = session.params if dt is None else session.params.replace(dt=dt)
                state = SolverState(
                    image=session.image,
                    phi=session.phi,
                    velocity=session.velocity,
                    interested=session.interested,
                    params=params,
                )
                emitted = []

                try:
                    for k in range(1, n + 1):
                        diagnostics = run(state, 1)
                        rec = diagnostics[0].as_dict()
                        rec["step"] = k
                        emitted.append(rec)
                        yield json.dumps(rec) + "\n"
                except DivergenceError as exc:
                    yield json.dumps(
                        {
                            "event": "divergence",
                            "step": len(emitted) + 1,
                            "detail": str(exc),
                        }
                    ) + "\n"
                    return
                if n > 0:
                    session.phi = state.phi
                    store.commit(record, {"kind": "steps", "n": n, "dt": dt})
                yield json.dumps(
                    {
                        "event": "done",
                        "steps": n,
                        "phi_checksum": field_checksum(session.phi),
                    }
                ) + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    @app.get("/sessions/{session_id}/mask.png")
    def get_mask(session_id: str):
        record = store.get(session_id)
        with record.lock:
            if not record.session.started:
                return JSONResponse(
                    status_code=404,
                    content={
                        "error": "NotFound",
                        "detail": "session has no mask before the first interaction",
                    },
                )
            png = encode_mask_png(mask_from_field(record.session.phi))
        return Response(content=png, media_type="image/png")

    @app.get("/sessions/{session_id}/contours")
    def get_contours(session_id: str):
        record = store.get(session_id)
        with record.lock:
            if not record.session.started:
                return {"contours": []}
            return {"contours": contours_to_json(extract_contours(record.session.phi))}

    return app


def _coerce_params(raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise ParameterError("params must be an object")
    known = {f.name for f in dataclasses.fields(SolverParams)}
    unknown = set(raw) - known
    if unknown:
        raise ParameterError(f"unknown solver parameters: {sorted(unknown)}")
    out = {}
    for key, value in raw.items():
        if key == "steps_per_round":
            out[key] = int(value)
        else:
            out[key] = float(value)
    return out
