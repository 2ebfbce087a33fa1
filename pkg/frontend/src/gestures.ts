import type { EventSpec, ScriptDocument, SessionSummary, ShapeSpec } from "./types.js";

// Annotation gestures as captured from the canvas, in image pixel space.
// Conversion to the wire shape is exact and lossless so that a recorded
// gesture log replays to the same masks through the command line.

export interface RectGesture {
  tool: "rect";
  // two drag corners, any order
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface PolygonGesture {
  tool: "polygon";
  vertices: [number, number][];
}

export interface ScribbleGesture {
  tool: "scribble";
  path: [number, number][];
  radius: number;
}

export type RegionGesture = RectGesture | PolygonGesture | ScribbleGesture;

export class GestureError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "GestureError";
  }
}

function clampCoord(v: number, limit: number): number {
  return Math.min(Math.max(v, 0), limit - 1);
}

function clampPair(
  p: [number, number],
  width: number,
  height: number
): [number, number] {
  return [clampCoord(p[0], width), clampCoord(p[1], height)];
}

export interface ShapeConversion {
  shape: ShapeSpec;
  // true when any coordinate had to be pulled back inside the image
  clamped: boolean;
}

export function gestureToShape(
  gesture: RegionGesture,
  width: number,
  height: number
): ShapeConversion {
  switch (gesture.tool) {
    case "rect": {
      const xs = [Math.round(gesture.x0), Math.round(gesture.x1)];
      const ys = [Math.round(gesture.y0), Math.round(gesture.y1)];
      const raw: [number, number, number, number] = [
        Math.min(...xs),
        Math.min(...ys),
        Math.max(...xs),
        Math.max(...ys),
      ];
      const coords: [number, number, number, number] = [
        clampCoord(raw[0], width),
        clampCoord(raw[1], height),
        clampCoord(raw[2], width),
        clampCoord(raw[3], height),
      ];
      const clamped = coords.some((v, i) => v !== raw[i]);
      return { shape: { type: "rect", coords }, clamped };
    }
    case "polygon": {
      if (gesture.vertices.length < 3) {
        throw new GestureError("a polygon needs at least 3 vertices");
      }
      const points = gesture.vertices.map((p) => clampPair(p, width, height));
      const clamped = points.some(
        (p, i) => p[0] !== gesture.vertices[i][0] || p[1] !== gesture.vertices[i][1]
      );
      return { shape: { type: "polygon", points }, clamped };
    }
    case "scribble": {
      if (gesture.path.length === 0) {
        throw new GestureError("a scribble needs at least one point");
      }
      if (!(gesture.radius > 0)) {
        throw new GestureError(`scribble radius must be positive, got ${gesture.radius}`);
      }
      const points = gesture.path.map((p) => clampPair(p, width, height));
      const clamped = points.some(
        (p, i) => p[0] !== gesture.path[i][0] || p[1] !== gesture.path[i][1]
      );
      return { shape: { type: "scribble", points, radius: gesture.radius }, clamped };
    }
  }
}

export interface RoundInput {
  round: number;
  gesture: RegionGesture;
  point: [number, number] | null;
  speed: number;
  steps?: number;
  width: number;
  height: number;
}

export interface RoundConversion {
  event: EventSpec;
  clamped: boolean;
}

// Build the wire event for one round, enforcing the protocol the server
// will enforce anyway so mistakes surface before a network trip: round 1
// seeds the session (no point, positive speed), later rounds must carry a
// seed point and a non-negative speed.
export function buildRoundEvent(input: RoundInput): RoundConversion {
  const { round, width, height } = input;
  if (!Number.isInteger(round) || round < 1) {
    throw new GestureError(`round must be a positive integer, got ${round}`);
  }
  if (!Number.isFinite(input.speed)) {
    throw new GestureError("speed must be a finite number");
  }
  let clamped = false;
  let point: [number, number] | null = null;
  if (round === 1) {
    if (input.point !== null) {
      throw new GestureError("the point tool is only available from round 2 on");
    }
    if (input.speed <= 0) {
      throw new GestureError("round 1 needs a positive contraction speed");
    }
  } else {
    if (input.point === null) {
      throw new GestureError(`round ${round} needs a seed point`);
    }
    if (input.speed < 0) {
      throw new GestureError("correction speed must be >= 0");
    }
    const rounded: [number, number] = [
      Math.round(input.point[0]),
      Math.round(input.point[1]),
    ];
    point = [clampCoord(rounded[0], width), clampCoord(rounded[1], height)];
    clamped = point[0] !== rounded[0] || point[1] !== rounded[1];
  }
  const conversion = gestureToShape(input.gesture, width, height);
  const event: EventSpec = {
    round,
    shape: conversion.shape,
    point,
    speed: input.speed,
  };
  if (input.steps !== undefined) {
    if (!Number.isInteger(input.steps) || input.steps < 1) {
      throw new GestureError(`steps override must be a positive integer, got ${input.steps}`);
    }
    event.steps = input.steps;
  }
  return { event, clamped: clamped || conversion.clamped };
}

// The exportable gesture log, rebuilt from the server's own record of the
// session. Using the echoed events (rather than anything remembered
// client-side) keeps the export correct across page reloads and guarantees
// the command-line replay sees exactly what the engine ran.
export function scriptFromSummary(summary: SessionSummary): ScriptDocument {
  return {
    params: { ...summary.params },
    events: summary.history.map((record) => record.event),
  };
}

export function serializeScript(script: ScriptDocument): string {
  return JSON.stringify(script, null, 2) + "\n";
}
