import type { DotColor } from "../types.js";

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Colored status dot; neutral (no intent judgement) gets a hollow dot. */
export function dot(color: DotColor, title: string): string {
  if (color === null) {
    return `<span class="dot dot-none" title="${esc(title)}"></span>`;
  }
  return `<span class="dot dot-${color.toLowerCase()}" title="${esc(title)}"></span>`;
}

export function fmt(value: number, digits = 4): string {
  if (!Number.isFinite(value)) return value > 0 ? "&#8734;" : "-&#8734;";
  const fixed = value.toFixed(digits);
  return fixed === "-0.0000" ? "0.0000" : fixed;
}
