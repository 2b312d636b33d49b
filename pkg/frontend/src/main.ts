/**
 * Browser bootstrap: wires the API client and render functions onto the
 * page. All DOM access lives here; the render modules stay pure so the
 * contract tests can run without a browser.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  adoptBaseline,
  buildWhatIfRequest,
  hasPendingEdits,
  newSession,
  setBase,
  setOverride,
} from "./state.js";
import { renderHeatmap } from "./render/heatmap.js";
import { renderPairingTable } from "./render/pairingTable.js";
import { renderDiff, renderOverrideEditor } from "./render/whatif.js";
import type { ExplanationDocument, MatrixView, SnapshotJson } from "./types.js";

const api = new ApiClient("");
const state = newSession();
let currentDoc: ExplanationDocument | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function note(text: string, isError = false): void {
  const bar = el<HTMLElement>("statusbar");
  bar.textContent = text;
  bar.className = isError ? "error" : "";
}

function redrawHeatmap(): void {
  el("heatmap").innerHTML = currentDoc
    ? renderHeatmap(currentDoc, state.matrixView)
    : '<div class="placeholder">No explanation loaded.</div>';
}

function redrawWhatIf(): void {
  el("editor").innerHTML = renderOverrideEditor(state);
  el("diff").innerHTML = renderDiff(state.lastWhatIf, hasPendingEdits(state));
}

async function refreshSummary(): Promise<void> {
  try {
    state.summary = await api.summary();
    el("pairings").innerHTML = renderPairingTable(state.summary);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      el("pairings").innerHTML =
        '<div class="placeholder">Server started without a history file.</div>';
    } else {
      throw err;
    }
  }
}

async function loadSnapshot(snapshot: SnapshotJson | "latest"): Promise<void> {
  setBase(state, snapshot);
  if (snapshot !== "latest") {
    currentDoc = await api.explain(snapshot);
    try {
      await api.postLive(snapshot);
      await refreshSummary();
    } catch {
      /* overlay is optional */
    }
  }
  redrawHeatmap();
  redrawWhatIf();
  note(`Base snapshot loaded${snapshot === "latest" ? " (latest interval)" : ""}.`);
}

async function submitWhatIf(): Promise<void> {
  try {
    state.lastWhatIf = await api.whatIf(buildWhatIfRequest(state));
    currentDoc = state.lastWhatIf.after;
    redrawHeatmap();
    redrawWhatIf();
    note("Scenario computed server-side.");
  } catch (err) {
    if (err instanceof ApiError) {
      note(`Scenario rejected: ${JSON.stringify(err.body)}`, true);
    } else {
      throw err;
    }
  }
}

function wire(): void {
  document.querySelectorAll<HTMLButtonElement>("[data-view]").forEach((btn) => {
    btn.addEventListener("click", () => {
      state.matrixView = btn.dataset.view as MatrixView;
      document
        .querySelectorAll("[data-view]")
        .forEach((b) => b.classList.toggle("active", b === btn));
      redrawHeatmap();
    });
  });

  el<HTMLButtonElement>("load-snapshot").addEventListener("click", () => {
    const text = el<HTMLTextAreaElement>("snapshot-input").value.trim();
    if (!text) {
      note("Paste a snapshot JSON document first.", true);
      return;
    }
    try {
      void loadSnapshot(JSON.parse(text) as SnapshotJson);
    } catch {
      note("Snapshot is not valid JSON.", true);
    }
  });
  el<HTMLButtonElement>("use-latest").addEventListener("click", () => {
    void loadSnapshot("latest");
  });
  el<HTMLButtonElement>("submit-whatif").addEventListener("click", () => {
    void submitWhatIf();
  });

  // Override edits and adopt clicks bubble up from rendered panels.
  el("editor").addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    if (!input.classList.contains("ov")) return;
    const id = input.dataset.id!;
    const field = input.dataset.field!;
    let value: number | boolean | null;
    if (field === "in_service") {
      value = input.checked;
    } else {
      value = input.value === "" ? null : Number(input.value);
      if (value !== null && Number.isNaN(value)) {
        note(`${id}.${field}: not a number`, true);
        return;
      }
    }
    const result = setOverride(state, id, { [field]: value });
    if (!result.ok) {
      note(`${id}: ${result.error}`, true);
    } else {
      note(`${id}.${field} staged; submit to evaluate.`);
    }
    redrawWhatIf();
  });
  el("diff").addEventListener("click", (event) => {
    if ((event.target as HTMLElement).id === "adopt") {
      const result = adoptBaseline(state);
      note(result.ok ? "Scenario adopted as baseline." : result.error!, !result.ok);
      redrawWhatIf();
    }
  });
  el("pairings").addEventListener("click", (event) => {
    const cell = (event.target as HTMLElement).closest<HTMLElement>(".pair-cell");
    if (cell?.dataset.cv && currentDoc) {
      state.matrixView = "pi";
      redrawHeatmap();
      const col = currentDoc.active_set.cv_c
        .map((j) => currentDoc!.cv_ids[j])
        .indexOf(cell.dataset.cv);
      document
        .querySelectorAll(`#heatmap td[data-col="${col}"]`)
        .forEach((td) => td.classList.add("cell-focus"));
    }
  });
}

async function start(): Promise<void> {
  wire();
  await refreshSummary();
  note("Ready.");
}

void start();
