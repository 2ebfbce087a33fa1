"""Command-line front door: scripted segmentation, validation, service.

    levelseg segment --image cell.png --script rounds.json --out results/
    levelseg validate all --out report.json
    levelseg serve --config service.json

Exit codes: 0 success, 2 usage, 3 input decode failure, 4 protocol violation
(script out of order, ambiguous seed point, malformed script), 5 solver
divergence, 6 validation experiment failure. Segment output is deterministic:
the same inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from .contours import contours_to_json, extract_contours
from .errors import (
    DecodeError,
    DivergenceError,
    ParameterError,
    ProtocolError,
)
from .evolve import SolverParams
from .metrics import evaluate
from .session import SessionState, apply_interaction, parse_event
from .store import decode_image, encode_mask_png
from .validate import run_experiments

PARAM_FLAGS = ("dt", "mu", "alpha", "lambda1", "lambda2", "eps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levelseg",
        description="Interactive level-set segmentation: batch runs, "
        "validation experiments, HTTP service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="replay an interaction script on an image")
    seg.add_argument("--image", required=True, help="input image path")
    seg.add_argument("--script", required=True, help="interaction script JSON path")
    seg.add_argument("--out", required=True, help="output directory")
    seg.add_argument("--gt", help="ground-truth mask image (enables metrics.json)")
    seg.add_argument("--steps", type=int, help="override steps per round")
    seg.add_argument(
        "--snapshot-every",
        type=int,
        metavar="K",
        help="write a mask snapshot every K solver steps",
    )
    for name in PARAM_FLAGS:
        seg.add_argument(f"--{name}", type=float, help=f"override solver {name}")
    seg.set_defaults(func=cmd_segment)

    val = sub.add_parser("validate", help="run validation experiments")
    val.add_argument(
        "selectors",
        nargs="*",
        help="experiment names (default: all)",
    )
    val.add_argument("--out", help="write the JSON report to this path")
    val.add_argument(
        "--snapshots", help="directory for final-mask PNG snapshots", metavar="DIR"
    )
    val.set_defaults(func=cmd_validate)

    srv = sub.add_parser("serve", help="run the HTTP session service")
    srv.add_argument("--config", help="JSON config file")
    srv.add_argument("--host")
    srv.add_argument("--port", type=int)
    srv.add_argument("--data-dir")
    srv.set_defaults(func=cmd_serve)

    return parser


# ---------------------------------------------------------------------------
# segment


def _read_bytes(path: str, kind: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise DecodeError(f"cannot read {kind} {path!r}: {exc}") from exc


def _load_script(path: str) -> tuple[dict, list[dict]]:
    """Script file: either {"params": {...}, "events": [...]} or a bare
    event list. Returns (params overrides, events)."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DecodeError(f"cannot read script {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"script {path!r} is not valid JSON: {exc}") from exc
    if isinstance(raw, list):
        return {}, raw
    if isinstance(raw, dict):
        events = raw.get("events")
        if not isinstance(events, list):
            raise ProtocolError(f"script {path!r} has no event list")
        params = raw.get("params", {})
        if not isinstance(params, dict):
            raise ProtocolError(f"script {path!r} params must be an object")
        return params, events
    raise ProtocolError(f"script {path!r} must be a JSON object or list")


def _resolve_params(script_params: dict, args) -> SolverParams:
    params = SolverParams.from_dict(script_params)
    overrides = {
        name: getattr(args, name)
        for name in PARAM_FLAGS
        if getattr(args, name) is not None
    }
    if args.steps is not None:
        overrides["steps_per_round"] = args.steps
    if overrides:
        params = params.replace(**overrides)
    return params


def _overlay_png(image: np.ndarray, contour_list) -> bytes:
    """Grayscale image as RGB with the zero-set contour painted red."""
    rgb = np.repeat(np.round(image).astype(np.uint8)[:, :, None], 3, axis=2)
    h, w = image.shape
    for line in contour_list:
        cols = np.clip(np.round(line[:, 0]).astype(int), 0, w - 1)
        rows = np.clip(np.round(line[:, 1]).astype(int), 0, h - 1)
        rgb[rows, cols] = (255, 0, 0)
    img = Image.fromarray(rgb, mode="RGB")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def cmd_segment(args) -> int:
    image = decode_image(_read_bytes(args.image, "image"))
    gt = None
    if args.gt:
        gt_img = decode_image(_read_bytes(args.gt, "ground truth"))
        if gt_img.shape != image.shape:
            raise ParameterError(
                f"ground-truth shape {gt_img.shape} does not match image {image.shape}"
            )
        gt = gt_img > 127.0
    script_params, events = _load_script(args.script)
    params = _resolve_params(script_params, args)

    session = SessionState(image=image, params=params)
    diagnostics_lines: list[str] = []
    snapshots: list[tuple[str, bytes]] = []
    round_metrics: list[dict] = []
    every = args.snapshot_every
    if every is not None and every < 1:
        raise ParameterError(f"--snapshot-every must be >= 1, got {every}")

    for obj in events:
        event = parse_event(obj, image.shape)
        round_index = event.round_index

        def progress(record, phi, _round=round_index):
            line = {"round": _round, **record.as_dict()}
            diagnostics_lines.append(json.dumps(line, sort_keys=True))
            if every is not None and record.step % every == 0:
                name = f"round{_round:02d}_step{record.step:05d}.png"
                snapshots.append((name, encode_mask_png(phi > 0.0)))

        apply_interaction(session, event, progress=progress)
        if gt is not None:
            report = evaluate(session.mask(), gt)
            round_metrics.append({"round": round_index, **report.as_dict()})

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    contour_list = extract_contours(session.phi)

    (out / "mask.png").write_bytes(encode_mask_png(session.mask()))
    (out / "contours.json").write_text(
        json.dumps({"contours": contours_to_json(contour_list)}, sort_keys=True)
    )
    (out / "overlay.png").write_bytes(_overlay_png(image, contour_list))
    (out / "diagnostics.jsonl").write_text(
        "".join(line + "\n" for line in diagnostics_lines)
    )
    if snapshots:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        for name, payload in snapshots:
            (snap_dir / name).write_bytes(payload)
    if gt is not None:
        final = evaluate(session.mask(), gt).as_dict()
        (out / "metrics.json").write_text(
            json.dumps(
                {"rounds": round_metrics, "final": final},
                sort_keys=True,
                indent=2,
            )
            + "\n"
        )
        print(f"segmented {args.image}: {len(events)} rounds, dice={final['dice']:.4f}")
    else:
        print(f"segmented {args.image}: {len(events)} rounds")
    print(f"outputs in {out}")
    return 0


# ---------------------------------------------------------------------------
# validate


def cmd_validate(args) -> int:
    try:
        reports = run_experiments(args.selectors or None)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for report in reports:
        print(f"{report.name}: {'PASS' if report.passed else 'FAIL'}")
    if args.out:
        payload = [r.as_dict() for r in reports]
        Path(args.out).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    if args.snapshots:
        snap_dir = Path(args.snapshots)
        snap_dir.mkdir(parents=True, exist_ok=True)
        for report in reports:
            for name, mask in (report.artifacts or {}).items():
                path = snap_dir / f"{report.name}_{name}.png"
                path.write_bytes(encode_mask_png(np.asarray(mask, dtype=bool)))
    return 0 if all(r.passed for r in reports) else 6


# ---------------------------------------------------------------------------
# serve


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app, load_config

    config = load_config(args.config)
    if args.host:
        config = dataclasses.replace(config, host=args.host)
    if args.port is not None:
        config = dataclasses.replace(config, port=args.port)
    if args.data_dir:
        config = dataclasses.replace(config, data_dir=args.data_dir)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port)
    return 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DecodeError as exc:
        print(f"decode error: {exc}", file=sys.stderr)
        return 3
    except ProtocolError as exc:
        print(f"protocol error: {exc}", file=sys.stderr)
        return 4
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 5
    except ParameterError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
