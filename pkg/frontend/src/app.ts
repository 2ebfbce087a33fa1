import { base64ToBytes, SessionClient } from "./api.js";
import {
  buildRoundEvent,
  scriptFromSummary,
  serializeScript,
  type RegionGesture,
} from "./gestures.js";
import { describeError } from "./messages.js";
import {
  DEMO_EVENTS,
  DEMO_GROUND_TRUTH_B64,
  DEMO_IMAGE_B64,
  DEMO_PARAMS,
} from "./nested_demo.js";
import { CanvasView } from "./overlay.js";
import type { EventSpec, SessionSummary, StepStreamLine } from "./types.js";

type ToolName = "rect" | "polygon" | "scribble" | "point";

// ============================================
// DOM LOOKUP
// ============================================

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("view");
const baseUrlInput = el<HTMLInputElement>("base-url");
const connectState = el<HTMLSpanElement>("connect-state");
const imageInput = el<HTMLInputElement>("image-file");
const gtInput = el<HTMLInputElement>("gt-file");
const demoButton = el<HTMLButtonElement>("demo");
const toolRadios = Array.from(
  document.querySelectorAll<HTMLInputElement>("input[name=tool]")
);
const speedInput = el<HTMLInputElement>("speed");
const stepsInput = el<HTMLInputElement>("steps");
const radiusInput = el<HTMLInputElement>("radius");
const pointReadout = el<HTMLSpanElement>("point-readout");
const roundLabel = el<HTMLSpanElement>("round-label");
const runButton = el<HTMLButtonElement>("run-round");
const clearButton = el<HTMLButtonElement>("clear-gesture");
const freeStepsInput = el<HTMLInputElement>("free-steps");
const freeRunButton = el<HTMLButtonElement>("run-steps");
const exportButton = el<HTMLButtonElement>("export-log");
const historyList = el<HTMLUListElement>("history");
const diagLog = el<HTMLPreElement>("diagnostics");
const banner = el<HTMLDivElement>("banner");
const clampNote = el<HTMLSpanElement>("clamp-note");

// ============================================
// SESSION STATE
// ============================================

interface AppState {
  client: SessionClient;
  sessionId: string | null;
  summary: SessionSummary | null;
  width: number;
  height: number;
  tool: ToolName;
  gesture: RegionGesture | null;
  seedPoint: [number, number] | null;
  busy: boolean;
  drag: { x: number; y: number } | null;
}

const state: AppState = {
  client: new SessionClient("http://127.0.0.1:8077"),
  sessionId: null,
  summary: null,
  width: 0,
  height: 0,
  tool: "rect",
  gesture: null,
  seedPoint: null,
  busy: false,
  drag: null,
};

const view = new CanvasView(canvas);

function nextRound(): number {
  return (state.summary?.rounds_completed ?? 0) + 1;
}

function setBusy(busy: boolean): void {
  state.busy = busy;
  for (const node of [
    runButton,
    freeRunButton,
    demoButton,
    exportButton,
    imageInput,
    gtInput,
  ]) {
    node.disabled = busy;
  }
  document.body.classList.toggle("busy", busy);
}

function showError(err: unknown): void {
  const notice = describeError(err);
  banner.textContent = notice.text;
  banner.hidden = false;
  view.setBadPixel(notice.pixel ?? null);
}

function clearError(): void {
  banner.hidden = true;
  banner.textContent = "";
  view.setBadPixel(null);
}

function refreshRoundPanel(): void {
  const round = nextRound();
  roundLabel.textContent = String(round);
  const pointRadio = toolRadios.find((r) => r.value === "point");
  if (pointRadio) {
    pointRadio.disabled = round < 2;
    if (round < 2 && state.tool === "point") selectTool("rect");
  }
  pointReadout.textContent = state.seedPoint
    ? `(${state.seedPoint[0]}, ${state.seedPoint[1]})`
    : round < 2
      ? "n/a in round 1"
      : "none";
}

function renderHistory(summary: SessionSummary): void {
  historyList.textContent = "";
  for (const record of summary.history) {
    const item = document.createElement("li");
    const dice = record.metrics ? ` · dice ${record.metrics.dice.toFixed(4)}` : "";
    item.textContent =
      `round ${record.round} · ${record.event.shape.type}` +
      ` · speed ${record.event.speed} · ${record.steps_run} steps${dice}`;
    historyList.appendChild(item);
  }
  exportButton.disabled = summary.history.length === 0;
}

async function refreshOverlay(): Promise<void> {
  if (!state.sessionId || !state.summary?.rounds_completed) return;
  const [mask, contours] = await Promise.all([
    state.client.fetchMask(state.sessionId),
    state.client.getContours(state.sessionId),
  ]);
  await view.setMaskPng(mask);
  view.setContours(contours);
}

function applySummary(summary: SessionSummary): void {
  state.summary = summary;
  state.width = summary.width;
  state.height = summary.height;
  renderHistory(summary);
  refreshRoundPanel();
}

// ============================================
// SESSION LIFECYCLE
// ============================================

function imageStorageKey(sessionId: string): string {
  return `levelseg:image:${sessionId}`;
}

async function startSession(
  imageBytes: Uint8Array,
  groundTruthBytes?: Uint8Array,
  params?: Record<string, number>
): Promise<void> {
  clearError();
  setBusy(true);
  try {
    const summary = await state.client.createSession({
      imageBytes,
      groundTruthBytes,
      params,
    });
    state.sessionId = summary.id;
    state.gesture = null;
    state.seedPoint = null;
    view.clearDecorations();
    await view.setImage(imageBytes);
    applySummary(summary);
    diagLog.textContent = "";
    try {
      localStorage.setItem(
        imageStorageKey(summary.id),
        btoa(String.fromCharCode(...imageBytes))
      );
    } catch {
      // image too large for localStorage: restore will fall back to a
      // blank backdrop, everything else still works
    }
    window.location.hash = `s=${summary.id}`;
  } finally {
    setBusy(false);
  }
}

// Reload with #s=<id> in the URL: the server state document is the single
// source of truth, the locally stashed upload only restores the backdrop.
async function restoreSession(sessionId: string): Promise<void> {
  const summary = await state.client.getSession(sessionId);
  state.sessionId = sessionId;
  const stashed = localStorage.getItem(imageStorageKey(sessionId));
  if (stashed) {
    await view.setImage(base64ToBytes(stashed));
  }
  applySummary(summary);
  await refreshOverlay();
}

async function runRound(): Promise<void> {
  if (!state.sessionId || !state.gesture) {
    showError(new Error("draw a region first"));
    return;
  }
  clearError();
  const stepsRaw = stepsInput.value.trim();
  let built;
  try {
    built = buildRoundEvent({
      round: nextRound(),
      gesture: state.gesture,
      point: nextRound() >= 2 ? state.seedPoint : null,
      speed: Number(speedInput.value),
      steps: stepsRaw === "" ? undefined : Number(stepsRaw),
      width: state.width,
      height: state.height,
    });
  } catch (err) {
    showError(err);
    return;
  }
  clampNote.hidden = !built.clamped;
  await submitEvent(built.event);
}

async function submitEvent(event: EventSpec): Promise<void> {
  if (!state.sessionId) return;
  setBusy(true);
  try {
    const response = await state.client.submitInteraction(state.sessionId, event);
    appendDiag(
      `round ${response.round.round}: ${response.round.steps_run} steps, ` +
        `mask ${response.mask_area} px` +
        (response.metrics ? `, dice ${response.metrics.dice.toFixed(4)}` : "")
    );
    state.gesture = null;
    state.seedPoint = null;
    view.clearDecorations();
    const summary = await state.client.getSession(state.sessionId);
    applySummary(summary);
    await refreshOverlay();
  } catch (err) {
    showError(err);
  } finally {
    setBusy(false);
  }
}

async function runFreeSteps(): Promise<void> {
  if (!state.sessionId) return;
  const n = Number(freeStepsInput.value);
  if (!Number.isInteger(n) || n < 1) {
    showError(new Error("step count must be a positive integer"));
    return;
  }
  clearError();
  setBusy(true);
  try {
    for await (const line of state.client.steps(state.sessionId, n)) {
      appendDiag(describeStreamLine(line));
    }
    const summary = await state.client.getSession(state.sessionId);
    applySummary(summary);
    await refreshOverlay();
  } catch (err) {
    showError(err);
  } finally {
    setBusy(false);
  }
}

function describeStreamLine(line: StepStreamLine): string {
  if ("event" in line) {
    if (line.event === "done") return `done: ${line.steps} steps committed`;
    if (line.event === "divergence")
      return `diverged at step ${line.step}: ${line.detail}`;
    return `error: ${line.detail}`;
  }
  return (
    `step ${line.step}: max|Δφ| ${line.max_delta.toExponential(2)}, ` +
    `drift ${line.drift.toFixed(4)}, c1 ${line.c1.toFixed(1)}, c2 ${line.c2.toFixed(1)}`
  );
}

function appendDiag(text: string): void {
  diagLog.textContent += text + "\n";
  diagLog.scrollTop = diagLog.scrollHeight;
}

// ============================================
// DEMO WALKTHROUGH
// ============================================

async function runDemo(): Promise<void> {
  try {
    await startSession(
      base64ToBytes(DEMO_IMAGE_B64),
      base64ToBytes(DEMO_GROUND_TRUTH_B64),
      { ...DEMO_PARAMS }
    );
    for (const event of DEMO_EVENTS) {
      await submitEvent({ ...event });
      if (banner.hidden === false) return; // stop the script on any error
    }
    appendDiag("demo complete: square found in round 1, disc carved in round 2");
  } catch (err) {
    showError(err);
  }
}

// ============================================
// GESTURE LOG EXPORT
// ============================================

async function exportLog(): Promise<void> {
  if (!state.sessionId) return;
  try {
    const summary = await state.client.getSession(state.sessionId);
    const script = serializeScript(scriptFromSummary(summary));
    const blob = new Blob([script], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = `levelseg-session-${state.sessionId.slice(0, 8)}.json`;
    link.click();
    URL.revokeObjectURL(link.href);
  } catch (err) {
    showError(err);
  }
}

// ============================================
// CANVAS INPUT
// ============================================

function selectTool(tool: ToolName): void {
  state.tool = tool;
  for (const radio of toolRadios) radio.checked = radio.value === tool;
  if (tool !== "point") view.setSeedPoint(state.seedPoint);
}

function onPointerDown(event: MouseEvent): void {
  if (state.busy || !state.sessionId) return;
  const [x, y] = view.toImageCoords(event);
  switch (state.tool) {
    case "rect":
      state.drag = { x, y };
      state.gesture = { tool: "rect", x0: x, y0: y, x1: x, y1: y };
      break;
    case "polygon": {
      if (state.gesture?.tool !== "polygon") {
        state.gesture = { tool: "polygon", vertices: [] };
      }
      state.gesture.vertices.push([x, y]);
      break;
    }
    case "scribble": {
      state.drag = { x, y };
      state.gesture = {
        tool: "scribble",
        path: [[x, y]],
        radius: Number(radiusInput.value) || 3,
      };
      break;
    }
    case "point": {
      state.seedPoint = [Math.round(x), Math.round(y)];
      view.setSeedPoint(state.seedPoint);
      refreshRoundPanel();
      return;
    }
  }
  view.setGesture(state.gesture);
}

function onPointerMove(event: MouseEvent): void {
  if (!state.drag || !state.gesture) return;
  const [x, y] = view.toImageCoords(event);
  if (state.gesture.tool === "rect") {
    state.gesture.x1 = x;
    state.gesture.y1 = y;
  } else if (state.gesture.tool === "scribble") {
    state.gesture.path.push([x, y]);
  }
  view.setGesture(state.gesture);
}

function onPointerUp(): void {
  state.drag = null;
}

// ============================================
// WIRING
// ============================================

canvas.addEventListener("mousedown", onPointerDown);
canvas.addEventListener("mousemove", onPointerMove);
window.addEventListener("mouseup", onPointerUp);

for (const radio of toolRadios) {
  radio.addEventListener("change", () => {
    if (radio.checked) selectTool(radio.value as ToolName);
  });
}

runButton.addEventListener("click", () => void runRound());
clearButton.addEventListener("click", () => {
  state.gesture = null;
  state.seedPoint = null;
  view.clearDecorations();
  view.draw();
  refreshRoundPanel();
});
freeRunButton.addEventListener("click", () => void runFreeSteps());
demoButton.addEventListener("click", () => void runDemo());
exportButton.addEventListener("click", () => void exportLog());

baseUrlInput.addEventListener("change", async () => {
  state.client = new SessionClient(baseUrlInput.value);
  localStorage.setItem("levelseg:base-url", baseUrlInput.value);
  await checkHealth();
});

imageInput.addEventListener("change", async () => {
  const file = imageInput.files?.[0];
  if (!file) return;
  const image = new Uint8Array(await file.arrayBuffer());
  const gtFile = gtInput.files?.[0];
  const gt = gtFile ? new Uint8Array(await gtFile.arrayBuffer()) : undefined;
  try {
    await startSession(image, gt);
  } catch (err) {
    showError(err);
  }
});

async function checkHealth(): Promise<void> {
  try {
    const ok = await state.client.healthz();
    connectState.textContent = ok ? "connected" : "unreachable";
    connectState.className = ok ? "ok" : "bad";
  } catch {
    connectState.textContent = "unreachable";
    connectState.className = "bad";
  }
}

async function boot(): Promise<void> {
  const savedUrl = localStorage.getItem("levelseg:base-url");
  if (savedUrl) state.client = new SessionClient(savedUrl);
  baseUrlInput.value = state.client.baseUrl;
  await checkHealth();
  const match = window.location.hash.match(/s=([0-9a-f-]+)/);
  if (match) {
    try {
      await restoreSession(match[1]);
    } catch (err) {
      showError(err);
    }
  }
  refreshRoundPanel();
}

void boot();
