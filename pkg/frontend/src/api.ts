import { parseNdjson } from "./ndjson.js";
import type {
  ErrorBody,
  EventSpec,
  InteractionResponse,
  SessionSummary,
  StepStreamLine,
} from "./types.js";

// Typed error for any non-2xx service response. `code` is the server's
// exception name (RoundOrderError, AmbiguousPointError, ...); `point` is
// set when the server pinpointed an offending pixel.
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
    readonly point?: [number, number],
    readonly step?: number
  ) {
    super(`${code}: ${detail}`);
    this.name = "ServiceError";
  }
}

export function bytesToBase64(bytes: Uint8Array): string {
  let binary = "";
  const CHUNK = 0x8000;
  for (let i = 0; i < bytes.length; i += CHUNK) {
    binary += String.fromCharCode(...bytes.subarray(i, i + CHUNK));
  }
  return btoa(binary);
}

export function base64ToBytes(b64: string): Uint8Array {
  const binary = atob(b64);
  const out = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) out[i] = binary.charCodeAt(i);
  return out;
}

async function raiseForStatus(response: Response): Promise<void> {
  if (response.ok) return;
  let body: ErrorBody;
  try {
    body = (await response.json()) as ErrorBody;
  } catch {
    throw new ServiceError(response.status, "HttpError", response.statusText);
  }
  throw new ServiceError(
    response.status,
    body.error ?? "HttpError",
    body.detail ?? response.statusText,
    body.point,
    body.step
  );
}

export interface CreateSessionRequest {
  imageBytes: Uint8Array;
  groundTruthBytes?: Uint8Array;
  params?: Record<string, number>;
}

export class SessionClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/+$/, "") + path;
  }

  async healthz(): Promise<boolean> {
    const response = await fetch(this.url("/healthz"));
    return response.ok;
  }

  async createSession(request: CreateSessionRequest): Promise<SessionSummary> {
    const payload: Record<string, unknown> = {
      image_b64: bytesToBase64(request.imageBytes),
    };
    if (request.groundTruthBytes) {
      payload.ground_truth_b64 = bytesToBase64(request.groundTruthBytes);
    }
    if (request.params && Object.keys(request.params).length > 0) {
      payload.params = request.params;
    }
    const response = await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    await raiseForStatus(response);
    return (await response.json()) as SessionSummary;
  }

  async getSession(sessionId: string): Promise<SessionSummary> {
    const response = await fetch(this.url(`/sessions/${sessionId}`));
    await raiseForStatus(response);
    return (await response.json()) as SessionSummary;
  }

  async submitInteraction(
    sessionId: string,
    event: EventSpec
  ): Promise<InteractionResponse> {
    const response = await fetch(this.url(`/sessions/${sessionId}/interactions`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(event),
    });
    await raiseForStatus(response);
    return (await response.json()) as InteractionResponse;
  }

  // Extra solver steps, yielded line by line as the server computes them.
  async *steps(
    sessionId: string,
    n: number,
    dt?: number
  ): AsyncGenerator<StepStreamLine> {
    const payload: Record<string, number> = { n };
    if (dt !== undefined) payload.dt = dt;
    const response = await fetch(this.url(`/sessions/${sessionId}/steps`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    await raiseForStatus(response);
    if (!response.body) throw new ServiceError(0, "HttpError", "empty stream body");
    yield* parseNdjson<StepStreamLine>(response.body);
  }

  async fetchMask(sessionId: string): Promise<Uint8Array> {
    const response = await fetch(this.url(`/sessions/${sessionId}/mask.png`));
    await raiseForStatus(response);
    return new Uint8Array(await response.arrayBuffer());
  }

  async getContours(sessionId: string): Promise<number[][][]> {
    const response = await fetch(this.url(`/sessions/${sessionId}/contours`));
    await raiseForStatus(response);
    const body = (await response.json()) as { contours: number[][][] };
    return body.contours;
  }
}
