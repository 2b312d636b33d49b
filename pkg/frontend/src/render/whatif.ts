/**
 * What-if panel: per-variable override editor (limits, cost, in-service)
 * and the before/after diff of a submitted scenario. Edits accumulate
 * locally; nothing is sent anywhere except an explicit submit to
 * /api/v1/whatif, and the response only becomes the new baseline through
 * the explicit adopt action.
 */

import type { UISessionState } from "../state.js";
import type { DiffJson, SnapshotJson, WhatIfResponse } from "../types.js";
import { esc } from "./util.js";

function boundValue(value: number | null | undefined): string {
  return value === null || value === undefined ? "" : String(value);
}

export function renderOverrideEditor(state: UISessionState): string {
  if (state.base === null) {
    return '<div class="placeholder">Load a base snapshot (or use the latest history interval) to explore scenarios.</div>';
  }
  if (state.base === "latest") {
    return (
      '<p class="notice">Base: latest history interval (server-side). ' +
      "Overrides below are applied to it on submit.</p>" +
      renderOverrideRowsFromIds(state)
    );
  }
  return renderOverrideRows(state, state.base);
}

function overrideInput(id: string, field: string, value: string, step = "any"): string {
  return (
    `<input class="ov" data-id="${esc(id)}" data-field="${field}" ` +
    `type="number" step="${step}" value="${esc(value)}">`
  );
}

function renderOverrideRowsFromIds(state: UISessionState): string {
  const rows = [...state.overrides.entries()]
    .map(([id, patch]) => `<li>${esc(id)}: ${esc(JSON.stringify(patch))}</li>`)
    .join("");
  return `<ul class="pending">${rows || "<li>(no pending overrides)</li>"}</ul>`;
}

function renderOverrideRows(state: UISessionState, base: SnapshotJson): string {
  const parts: string[] = ['<table class="editor">'];
  parts.push(
    "<thead><tr><th></th><th>lower</th><th>upper</th><th>cost</th>" +
      "<th>in service</th><th>current</th></tr></thead><tbody>",
  );
  base.mvs.forEach((mv, i) => {
    const patch = state.overrides.get(mv.id) ?? {};
    const bounds = base.mv_bounds[i];
    const edited = state.overrides.has(mv.id) ? " edited" : "";
    const service = patch.in_service ?? mv.in_service ?? true;
    parts.push(
      `<tr class="mv-row${edited}" data-id="${esc(mv.id)}"><th>${esc(mv.id)}</th>` +
        `<td>${overrideInput(mv.id, "lower", boundValue(patch.lower ?? bounds.lower))}</td>` +
        `<td>${overrideInput(mv.id, "upper", boundValue(patch.upper ?? bounds.upper))}</td>` +
        `<td>${overrideInput(mv.id, "cost", String(patch.cost ?? base.costs[i]))}</td>` +
        `<td><input class="ov" data-id="${esc(mv.id)}" data-field="in_service" ` +
        `type="checkbox"${service ? " checked" : ""}></td>` +
        `<td class="current">${base.mv_current[i]}</td></tr>`,
    );
  });
  base.cvs.forEach((cv, j) => {
    const patch = state.overrides.get(cv.id) ?? {};
    const bounds = base.cv_bounds[j];
    const edited = state.overrides.has(cv.id) ? " edited" : "";
    parts.push(
      `<tr class="cv-row${edited}" data-id="${esc(cv.id)}"><th>${esc(cv.id)}</th>` +
        `<td>${overrideInput(cv.id, "lower", boundValue(patch.lower ?? bounds.lower))}</td>` +
        `<td>${overrideInput(cv.id, "upper", boundValue(patch.upper ?? bounds.upper))}</td>` +
        `<td class="na"></td><td class="na"></td>` +
        `<td class="current">${base.cv_ss[j]}</td></tr>`,
    );
  });
  parts.push("</tbody></table>");
  return parts.join("\n");
}

function arrow(mv: string, cv: string, side: string): string {
  return `<span class="pair">${esc(mv)} &rarr; ${esc(cv)} (${esc(side)})</span>`;
}

export function renderDiff(response: WhatIfResponse | null, pendingEdits: boolean): string {
  if (response === null) {
    return '<div class="placeholder">Submit a scenario to see how the optimizer re-routes its degrees of freedom.</div>';
  }
  const diff: DiffJson = response.diff;
  const empty =
    diff.pairs_added.length === 0 &&
    diff.pairs_removed.length === 0 &&
    diff.pairs_rerouted.length === 0 &&
    diff.mv_status_changes.length === 0 &&
    diff.cv_changes.length === 0 &&
    diff.lambda_changes.length === 0;
  if (empty) {
    return '<div class="placeholder no-change">No change: the scenario leaves the solution untouched.</div>';
  }
  const parts: string[] = ['<div class="diff">'];
  if (diff.pairs_rerouted.length) {
    parts.push('<h4>Re-routed pairings</h4><ul class="rerouted">');
    for (const r of diff.pairs_rerouted) {
      parts.push(
        `<li>${esc(r.mv)}: ${esc(r.from_cv)} (${esc(r.from_side)}) &#10142; ` +
          `<strong>${esc(r.to_cv)} (${esc(r.to_side)})</strong></li>`,
      );
    }
    parts.push("</ul>");
  }
  if (diff.pairs_removed.length) {
    parts.push('<h4>Pairings lost</h4><ul class="removed">');
    for (const p of diff.pairs_removed) parts.push(`<li>${arrow(p.mv, p.cv, p.side)} &#10142; released</li>`);
    parts.push("</ul>");
  }
  if (diff.pairs_added.length) {
    parts.push('<h4>Pairings gained</h4><ul class="added">');
    for (const p of diff.pairs_added) parts.push(`<li>${arrow(p.mv, p.cv, p.side)}</li>`);
    parts.push("</ul>");
  }
  if (diff.mv_status_changes.length || diff.cv_changes.length) {
    parts.push('<h4>Status changes</h4><ul class="statuses">');
    for (const c of diff.mv_status_changes) {
      parts.push(`<li>${esc(c.mv)}: ${esc(c.before)} &#10142; <strong>${esc(c.after)}</strong></li>`);
    }
    for (const c of diff.cv_changes) {
      parts.push(`<li>${esc(c.cv)}: ${esc(c.before)} &#10142; <strong>${esc(c.after)}</strong></li>`);
    }
    parts.push("</ul>");
  }
  if (diff.lambda_changes.length) {
    parts.push('<h4>Shadow price changes</h4><table class="lambda-diff">');
    parts.push("<tr><th>CV</th><th>before</th><th>after</th></tr>");
    for (const c of diff.lambda_changes) {
      parts.push(
        `<tr><td>${esc(c.cv)}</td><td>${c.before.toFixed(3)}</td>` +
          `<td>${c.after.toFixed(3)}</td></tr>`,
      );
    }
    parts.push("</table>");
  }
  parts.push(
    `<p class="adopt-row"><button id="adopt" ${pendingEdits ? "" : "disabled "}` +
      'title="Make this scenario the new exploration baseline">Adopt as baseline</button></p>',
  );
  parts.push("</div>");
  return parts.join("\n");
}
