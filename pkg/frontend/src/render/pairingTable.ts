/**
 * Ranked pairing table: one row per MV with the top-occupancy labels and a
 * rare-label tail, live dots from the overlay, and a footer of CVs the
 * optimizer has had to give up. Label cells carry data attributes so the
 * app can open the matching contribution column on click.
 */

import type { HistorySummary, LabelStatJson } from "../types.js";
import { dot, esc } from "./util.js";

function labelCell(mv: string, stat: LabelStatJson, summary: HistorySummary): string {
  const overlay = summary.overlay;
  let marker = "";
  if (overlay && overlay.mv[mv] && overlay.mv[mv].label === stat.label) {
    marker = dot(overlay.mv[mv].color, `live: ${overlay.mv[mv].label}`);
  }
  const cvAttr = stat.label.includes("-")
    ? ` data-cv="${esc(stat.label.split("-")[0])}"`
    : "";
  return (
    `<td class="pair-cell" data-mv="${esc(mv)}"${cvAttr}>` +
    `${marker}<span class="label">${esc(stat.label)}</span> ` +
    `<span class="pct">(${esc(stat.pct_text)}%)</span></td>`
  );
}

export function renderPairingTable(summary: HistorySummary): string {
  const columns = summary.columns;
  const showTail = summary.rows.some((row) => row.tail.length > 0);
  const heads = ["MV"];
  for (let i = 1; i <= columns; i++) heads.push(`S<sub>${i}</sub>`);
  if (showTail) heads.push("S<sub>&#8734;</sub>");

  const parts: string[] = [];
  parts.push('<table class="pairing-table">');
  parts.push("<thead><tr>" + heads.map((h) => `<th>${h}</th>`).join("") + "</tr></thead>");
  parts.push("<tbody>");
  for (const row of summary.rows) {
    const cells: string[] = [`<th class="mv">${esc(row.mv)}</th>`];
    for (let i = 0; i < columns; i++) {
      if (i < row.top.length) {
        cells.push(labelCell(row.mv, row.top[i], summary));
      } else {
        cells.push('<td class="empty"></td>');
      }
    }
    if (showTail) {
      const tail = row.top.length > columns ? [] : row.tail;
      const inner = tail.map((s) => labelCell(row.mv, s, summary)).join("");
      cells.push(`<td class="tail"><table><tr>${inner || "<td></td>"}</tr></table></td>`);
    }
    parts.push(`<tr data-mv="${esc(row.mv)}">${cells.join("")}</tr>`);
  }
  parts.push("</tbody>");

  const liveRed = new Map(
    (summary.overlay?.infeasible ?? []).map((x) => [x.cv, x.side] as const),
  );
  if (summary.infeasible.length > 0 || liveRed.size > 0) {
    const bits: string[] = [];
    for (const stat of summary.infeasible) {
      const marker = liveRed.has(stat.cv)
        ? dot("RED", `infeasible now (${liveRed.get(stat.cv)})`)
        : "";
      bits.push(`${marker}<span class="label">${esc(stat.cv)}</span> ` +
                `<span class="pct">(${esc(stat.pct_text)}%)</span>`);
    }
    for (const [cv, side] of liveRed) {
      if (!summary.infeasible.some((s) => s.cv === cv)) {
        bits.push(`${dot("RED", `infeasible now (${side})`)}<span class="label">${esc(cv)}</span> <span class="pct">(live)</span>`);
      }
    }
    const span = columns + (showTail ? 1 : 0);
    parts.push(
      `<tfoot><tr><th>Infeasible</th><td colspan="${span}">${bits.join(", ")}</td></tr></tfoot>`,
    );
  }
  parts.push("</table>");
  if (summary.intent_configured === false || summary.overlay?.intent_configured === false) {
    parts.push('<p class="notice">No design intent configured: live dots carry no ideal / non-ideal judgement.</p>');
  }
  return parts.join("\n");
}
