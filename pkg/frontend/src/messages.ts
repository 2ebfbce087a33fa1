import { ServiceError } from "./api.js";
import { GestureError } from "./gestures.js";

export interface ErrorNotice {
  text: string;
  // pixel to highlight on the canvas (ambiguous seed points)
  pixel?: [number, number];
}

// Human-facing rendering of anything a round can throw. Service errors keep
// their API code and detail verbatim; an ambiguous seed point additionally
// carries the offending pixel so the canvas can mark it.
export function describeError(err: unknown): ErrorNotice {
  if (err instanceof ServiceError) {
    let text = `${err.code} (HTTP ${err.status}): ${err.detail}`;
    if (err.code === "AmbiguousPointError" && err.point) {
      const [x, y] = err.point;
      text += ` — the field is exactly zero at pixel (${x}, ${y}); nudge the point to either side of the contour`;
      return { text, pixel: [x, y] };
    }
    if (err.step !== undefined) {
      text += ` (step ${err.step})`;
    }
    return { text };
  }
  if (err instanceof GestureError) {
    return { text: err.message };
  }
  if (err instanceof Error) {
    return { text: `${err.name}: ${err.message}` };
  }
  return { text: String(err) };
}
