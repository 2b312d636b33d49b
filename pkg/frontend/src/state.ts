/**
 * Session state: the loaded base snapshot, the pending override set and the
 * last what-if response. Overrides accumulate locally and are only ever
 * sent to /api/v1/whatif; the base snapshot object is never mutated --
 * adopting a what-if as the new baseline builds a fresh snapshot.
 */

import type {
  MatrixView,
  OverridePatch,
  SnapshotJson,
  WhatIfRequest,
  WhatIfResponse,
  HistorySummary,
} from "./types.js";

export interface UISessionState {
  base: SnapshotJson | "latest" | null;
  overrides: Map<string, OverridePatch>;
  lastWhatIf: WhatIfResponse | null;
  matrixView: MatrixView;
  summary: HistorySummary | null;
}

export function newSession(): UISessionState {
  return {
    base: null,
    overrides: new Map(),
    lastWhatIf: null,
    matrixView: "pi",
    summary: null,
  };
}

export function setBase(state: UISessionState, base: SnapshotJson | "latest"): void {
  state.base = base;
  state.overrides.clear();
  state.lastWhatIf = null;
}

export interface SetResult {
  ok: boolean;
  error?: string;
}

function knownIds(base: SnapshotJson | "latest" | null): Set<string> | null {
  if (base === null || base === "latest") return null;
  return new Set([...base.mvs, ...base.cvs].map((v) => v.id));
}

/**
 * Merge a patch into the pending override for one variable. Rejects edits
 * that could not serialize into a valid request (unknown id, lower above
 * upper), leaving the previous pending state untouched.
 */
export function setOverride(
  state: UISessionState,
  id: string,
  patch: OverridePatch,
): SetResult {
  const ids = knownIds(state.base);
  if (ids !== null && !ids.has(id)) {
    return { ok: false, error: `unknown variable ${id}` };
  }
  const merged: OverridePatch = { ...(state.overrides.get(id) ?? {}), ...patch };
  if (
    merged.lower !== undefined &&
    merged.upper !== undefined &&
    merged.lower !== null &&
    merged.upper !== null &&
    merged.lower > merged.upper
  ) {
    return { ok: false, error: `lower ${merged.lower} exceeds upper ${merged.upper}` };
  }
  if (Object.keys(merged).length === 0) {
    state.overrides.delete(id);
  } else {
    state.overrides.set(id, merged);
  }
  return { ok: true };
}

export function clearOverride(state: UISessionState, id: string): void {
  state.overrides.delete(id);
}

export function hasPendingEdits(state: UISessionState): boolean {
  return state.overrides.size > 0;
}

/** Pending overrides are kept valid on entry, so this always succeeds. */
export function buildWhatIfRequest(state: UISessionState): WhatIfRequest {
  if (state.base === null) {
    throw new Error("no base snapshot loaded");
  }
  const overrides = [...state.overrides.entries()]
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([id, patch]) => ({ id, ...patch }));
  return { base: state.base, overrides };
}

/** Apply the pending overrides to a snapshot copy (input editing only --
 * all derived numbers still come from the server). */
export function snapshotWithOverrides(
  base: SnapshotJson,
  overrides: Map<string, OverridePatch>,
): SnapshotJson {
  const copy: SnapshotJson = JSON.parse(JSON.stringify(base));
  const mvIndex = new Map(copy.mvs.map((v, i) => [v.id, i] as const));
  const cvIndex = new Map(copy.cvs.map((v, i) => [v.id, i] as const));
  for (const [id, patch] of overrides) {
    const mi = mvIndex.get(id);
    const ci = cvIndex.get(id);
    const bounds =
      mi !== undefined ? copy.mv_bounds[mi] : ci !== undefined ? copy.cv_bounds[ci] : null;
    if (bounds === null) continue;
    if (patch.lower !== undefined) bounds.lower = patch.lower;
    if (patch.upper !== undefined) bounds.upper = patch.upper;
    if (patch.cost !== undefined && mi !== undefined) copy.costs[mi] = patch.cost;
    if (patch.in_service !== undefined) {
      const vars = mi !== undefined ? copy.mvs : copy.cvs;
      vars[mi ?? ci!].in_service = patch.in_service;
    }
  }
  return copy;
}

/**
 * Make the last what-if the new exploration baseline (explicit user action):
 * the override set folds into a fresh base snapshot and clears.
 */
export function adoptBaseline(state: UISessionState): SetResult {
  if (state.lastWhatIf === null) {
    return { ok: false, error: "no what-if response to adopt" };
  }
  if (state.base === null || state.base === "latest") {
    return { ok: false, error: "adopt needs an inline base snapshot" };
  }
  state.base = snapshotWithOverrides(state.base, state.overrides);
  state.overrides.clear();
  state.lastWhatIf = null;
  return { ok: true };
}
