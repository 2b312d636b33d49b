/**
 * k x k heatmap of the selected contribution matrix (W, sign-corrected W,
 * normalized, or penalties). Rows are the free MVs, columns the CVs they
 * hold at limits; column headers carry the shadow prices, assigned pairs
 * are outlined, and each cell's tooltip shows the value and its share of
 * the column's shadow price. All numbers are server-computed.
 */

import type { ExplanationDocument, MatrixView } from "../types.js";
import { esc, fmt } from "./util.js";

const VIEW_TITLES: Record<MatrixView, string> = {
  w: "W: shadow-price contributions ($/CV unit)",
  w_corr: "W corrected: negative = aligned with the objective",
  pi: "Pi: normalized contributions (column best = -1)",
  p: "P: assignment penalties (blocked routes = infinity)",
};

function matrixOf(doc: ExplanationDocument, view: MatrixView): (number | null)[][] {
  if (view === "w") return doc.matrices.w;
  if (view === "w_corr") return doc.matrices.w_corr;
  if (view === "pi") return doc.matrices.pi ?? [];
  return doc.penalty.p;
}

/** Diverging color: negative = helping (blue), positive = opposing (red). */
export function cellColor(value: number | null, maxAbs: number): string {
  if (value === null || !Number.isFinite(value)) return "var(--blocked)";
  const t = maxAbs > 0 ? Math.min(1, Math.abs(value) / maxAbs) : 0;
  const alpha = (0.08 + 0.72 * t).toFixed(3);
  return value < 0 ? `rgba(37, 99, 235, ${alpha})` : `rgba(220, 38, 38, ${alpha})`;
}

export function renderHeatmap(doc: ExplanationDocument, view: MatrixView): string {
  const active = doc.active_set;
  if (active.k === 0) {
    return '<div class="placeholder">No active set: every degree of freedom is clamped or idle, nothing to attribute.</div>';
  }
  const matrix = matrixOf(doc, view);
  const mvIds = active.mv_u.map((i) => doc.mv_ids[i]);
  const cvIds = active.cv_c.map((j) => doc.cv_ids[j]);
  const assigned = new Set(doc.assignment.pairs.map((p) => `${p.row}:${p.col}`));
  const finite = matrix.flat().filter((v): v is number => v !== null && Number.isFinite(v));
  const maxAbs = finite.length ? Math.max(...finite.map(Math.abs)) : 0;

  const parts: string[] = [];
  parts.push(`<div class="matrix-title">${esc(VIEW_TITLES[view])}</div>`);
  parts.push('<table class="heatmap">');
  const headers = cvIds
    .map((cv, j) => {
      const lam = active.lambda_active[j];
      const side = doc.solution.cv_status[active.cv_c[j]] === "AtUpper" ? "HI" : "LO";
      return `<th>${esc(cv)}-${side}<br><span class="lambda" title="shadow price">&lambda; = ${fmt(lam, 2)}</span></th>`;
    })
    .join("");
  parts.push(`<thead><tr><th></th>${headers}</tr></thead><tbody>`);
  for (let i = 0; i < active.k; i++) {
    const cells: string[] = [`<th class="mv">${esc(mvIds[i])}</th>`];
    for (let j = 0; j < active.k; j++) {
      const value = matrix[i]?.[j] ?? null;
      const lam = active.lambda_active[j];
      const w = doc.matrices.w[i][j];
      const share = lam !== 0 ? ` (${((100 * w) / lam).toFixed(1)}% of &lambda;)` : "";
      const title = `w = ${fmt(w, 4)}${share}`;
      const classes = ["cell"];
      if (assigned.has(`${i}:${j}`)) classes.push("cell-assigned");
      if (value !== null && value === -1.0 && view !== "w") classes.push("cell-best");
      const text = value === null ? "&#8734;" : fmt(value, view === "w" ? 2 : 3);
      cells.push(
        `<td class="${classes.join(" ")}" style="background:${cellColor(value, maxAbs)}" ` +
          `title="${title}" data-row="${i}" data-col="${j}">${text}</td>`,
      );
    }
    parts.push(`<tr>${cells.join("")}</tr>`);
  }
  parts.push("</tbody></table>");
  if (doc.assignment.forbidden_used) {
    parts.push('<p class="notice warn">The assignment was forced through a blocked route: some CV has no free MV with a usable gain path.</p>');
  }
  if (active.cond_warning) {
    parts.push('<p class="notice warn">Active gain matrix is ill-conditioned; attribution numbers are unreliable.</p>');
  }
  return parts.join("\n");
}
