// Shapes exchanged with the session service. These mirror the JSON the
// server emits verbatim; nothing here is recomputed client-side.

export type ShapeSpec =
  | { type: "rect"; coords: [number, number, number, number] }
  | { type: "polygon"; points: [number, number][] }
  | { type: "scribble"; points: [number, number][]; radius?: number };

export interface EventSpec {
  round: number;
  shape: ShapeSpec;
  point: [number, number] | null;
  speed: number;
  steps?: number;
}

export interface ScriptDocument {
  params: Record<string, number>;
  events: EventSpec[];
}

export interface StepDiagnostics {
  step: number;
  max_delta: number;
  drift: number;
  c1: number;
  c2: number;
}

export interface RoundMetrics {
  dice: number;
  jaccard: number;
  [extra: string]: number;
}

export interface RoundRecord {
  round: number;
  event: EventSpec;
  steps_run: number;
  pre_checksum: string | null;
  phi_checksum: string;
  last_diagnostics: StepDiagnostics | null;
  overlapping_region: boolean;
  point_sign: number | null;
  metrics: RoundMetrics | null;
}

export interface PhiSummary {
  min: number;
  max: number;
  mean: number;
  drift: number;
  checksum: string;
}

export interface SessionSummary {
  id: string;
  status: string;
  width: number;
  height: number;
  rounds_completed: number;
  params: Record<string, number>;
  created: string;
  updated: string;
  has_ground_truth: boolean;
  history: RoundRecord[];
  phi?: PhiSummary;
  mask_area?: number;
  interested_area?: number;
  interested_png_b64?: string;
  metrics?: RoundMetrics;
}

export interface InteractionResponse {
  round: RoundRecord;
  mask_area: number;
  phi_checksum: string;
  contours: number[][][];
  metrics: RoundMetrics | null;
}

// One parsed line from the step stream: a diagnostics record, then a single
// terminal record ("done" after the batch commits, "divergence"/"error" when
// it does not).
export type StepStreamLine =
  | StepDiagnostics
  | { event: "done"; steps: number; phi_checksum: string }
  | { event: "divergence"; step: number; detail: string }
  | { event: "error"; detail: string };

export interface ErrorBody {
  error: string;
  detail: string;
  point?: [number, number];
  step?: number;
}
