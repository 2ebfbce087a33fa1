import type { EventSpec, ScriptDocument } from "./types.js";

// Bundled walkthrough scene: a 50x50 image holding a bright square with a
// darker disc punched through its middle. Round 1 boxes the square and lets
// the contraction force find its outline; round 2 scribbles over the disc
// with zero speed, so the reconstituted field and the fitting term carve
// the hole. The PNG bytes and the script are pinned verbatim — the same
// pair drives the engine's own demo, so an exported log replays to
// bit-identical masks.

export const DEMO_IMAGE_B64 =
  "iVBORw0KGgoAAAANSUhEUgAAADIAAAAyCAAAAAA7VNdtAAAAf0lEQVR4nO2TSw7AIAhEa+MBPDJH9ghdtSBD/KQ2xcRZGCDzIEYM+RjVOUxsxCkSOUxVY34zxS0S7TKJUyvkJ0wKKCP2GUjZ+87Yh3ehamoiTQECXaEwYQr0xJLbhfkHIbTo0jKv37HJc74YW+WEJoJi3zIL0yFx/Q+nbMQncgFS5RfyOcYxAAAAAABJRU5ErkJggg==";

// Ground truth for the final contour (square minus disc), for the metrics
// panel of the walkthrough.
export const DEMO_GROUND_TRUTH_B64 =
  "iVBORw0KGgoAAAANSUhEUgAAADIAAAAyCAAAAAA7VNdtAAAAdklEQVR4nO2U4QrAIAiEdez9X9l+DNbqDlcgrJH3pzr6MkMTSe0rrVMb3HjMR1kWObl9JcsfhCJ6jwwiiDZzhDAXdZcUeRUgcCoYAVHw6mAtWzDfIKSoeiviYhAGjJD0zV0K7Rd7lMhgi1VoopH9b/A3BZNKuSpbXA9H8ts+swAAAABJRU5ErkJggg==";

export const DEMO_PARAMS: Record<string, number> = {
  lambda2: 1.1,
  dt: 0.0002,
  eps: 0.25,
  steps_per_round: 200,
};

export const DEMO_EVENTS: EventSpec[] = [
  {
    round: 1,
    shape: { type: "rect", coords: [2, 2, 47, 47] },
    point: null,
    speed: 500.0,
  },
  {
    round: 2,
    shape: { type: "scribble", points: [[24.5, 24.5]], radius: 10.0 },
    point: [25, 25],
    speed: 0.0,
    steps: 100,
  },
];

export function demoScript(): ScriptDocument {
  return {
    params: { ...DEMO_PARAMS },
    events: DEMO_EVENTS.map((event) => ({ ...event })),
  };
}
