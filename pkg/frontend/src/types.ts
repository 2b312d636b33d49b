/**
 * Wire types for the /api/v1 endpoints. These mirror the JSON schemas
 * documented in docs/explanation-schema.md and docs/snapshot-schema.md;
 * the dashboard never recomputes any of these numbers client-side.
 */

export interface VariableRef {
  id: string;
  in_service?: boolean;
  description?: string;
}

export interface BoundsJson {
  lower: number | null;
  upper: number | null;
}

export interface SnapshotJson {
  timestamp: string;
  mvs: VariableRef[];
  cvs: VariableRef[];
  gains: number[][];
  costs: number[];
  mv_current: number[];
  cv_ss: number[];
  mv_bounds: BoundsJson[];
  cv_bounds: BoundsJson[];
  cv_rank?: number[] | null;
}

export interface SolutionJson {
  delta_mv: number[];
  objective: number;
  lambda: number[];
  mu: number[];
  mv_status: string[];
  cv_status: string[];
  infeasible_cvs: number[];
  iterations: number;
  degenerate: boolean;
}

export interface ActiveSetJson {
  mv_u: number[];
  mv_c: number[];
  cv_c: number[];
  cv_u: number[];
  k: number;
  g_a: number[][];
  g_a_inv: number[][] | null;
  c_u: number[];
  lambda_active: number[];
  cond_estimate: number | null;
  cond_warning: boolean;
}

export interface MatricesJson {
  w: number[][];
  w_corr: number[][];
  pi: number[][] | null;
  sign_vector: number[];
  anomalous_columns: number[];
}

export interface PairJson {
  row: number;
  col: number;
  penalty: number | null; // null encodes a forced forbidden pair
  local_best: boolean;
  forbidden: boolean;
}

export interface AssignmentJson {
  pairs: PairJson[];
  total_penalty: number | null;
  assignment_matrix: number[][];
  forbidden_used: boolean;
}

export interface PairingJson {
  mv: string;
  cv: string;
  side: "HI" | "LO";
}

export interface ExplanationDocument {
  schema_version: number;
  timestamp: string;
  mv_ids: string[];
  cv_ids: string[];
  solution: SolutionJson;
  kkt: { passed: boolean; stationarity_inf: number };
  active_set: ActiveSetJson;
  matrices: MatricesJson;
  penalty: { p: (number | null)[][] };
  assignment: AssignmentJson;
  pairings: PairingJson[];
}

export interface LabelStatJson {
  label: string;
  count: number;
  pct: number;
  pct_text: string;
}

export interface MvRowJson {
  mv: string;
  top: LabelStatJson[];
  tail: LabelStatJson[];
}

export interface InfeasibleStatJson {
  cv: string;
  count: number;
  pct: number;
  pct_text: string;
  sides: string[];
  partners: LabelStatJson[];
}

export type DotColor = "GREEN" | "YELLOW" | "RED" | null;

export interface OverlayJson {
  mv: Record<string, { label: string; color: DotColor }>;
  infeasible: { cv: string; side: string; color: "RED" }[];
  intent_configured: boolean;
}

export interface HistorySummary {
  window: { start: string; end: string; intervals: number };
  explained: number;
  failed: number;
  columns: number;
  rows: MvRowJson[];
  infeasible: InfeasibleStatJson[];
  overlay?: OverlayJson;
  intent_configured?: boolean;
}

export interface OverridePatch {
  lower?: number | null;
  upper?: number | null;
  cost?: number;
  in_service?: boolean;
}

export interface WhatIfRequest {
  base: SnapshotJson | "latest";
  overrides: ({ id: string } & OverridePatch)[];
}

export interface DiffJson {
  pairs_added: PairingJson[];
  pairs_removed: PairingJson[];
  pairs_rerouted: {
    mv: string;
    from_cv: string;
    from_side: string;
    to_cv: string;
    to_side: string;
  }[];
  mv_status_changes: { mv: string; before: string; after: string }[];
  cv_changes: {
    cv: string;
    before: string;
    after: string;
    before_side: string | null;
    after_side: string | null;
  }[];
  lambda_changes: { cv: string; before: number; after: number }[];
}

export interface WhatIfResponse {
  before: ExplanationDocument;
  after: ExplanationDocument;
  diff: DiffJson;
}

export type MatrixView = "w" | "w_corr" | "pi" | "p";
