import { describe, expect, it } from "vitest";

import { renderPairingTable } from "../src/render/pairingTable.js";
import type { HistorySummary } from "../src/types.js";
import summaryFixture from "./fixtures/summary_sec32.json";

const summary = summaryFixture as unknown as HistorySummary;

function rowOf(html: string, mv: string): string {
  const match = html.match(new RegExp(`<tr data-mv="${mv}">.*?</tr>`, "s"));
  expect(match, `row for ${mv}`).not.toBeNull();
  return match![0];
}

describe("pairing table", () => {
  it("renders the diagonal pairs with their bound sides", () => {
    const html = renderPairingTable(summary);
    expect(rowOf(html, "MV1")).toContain("CV1-HI");
    expect(rowOf(html, "MV2")).toContain("CV2-LO");
  });

  it("places the live overlay dots on the matching cells", () => {
    const html = renderPairingTable(summary);
    expect(rowOf(html, "MV1")).toContain("dot-green");
    expect(rowOf(html, "MV2")).toContain("dot-green");
  });

  it("renders percentages exactly as the server formatted them", () => {
    const html = renderPairingTable(summary);
    for (const row of summary.rows) {
      for (const stat of row.top) {
        expect(html).toContain(`(${stat.pct_text}%)`);
      }
    }
  });

  it("hides the tail column when every tail is empty", () => {
    const html = renderPairingTable(summary);
    expect(summary.rows.every((r) => r.tail.length === 0)).toBe(true);
    expect(html).not.toContain("S<sub>&#8734;</sub>");
  });

  it("shows the tail column when any row has rare labels", () => {
    const withTail: HistorySummary = JSON.parse(JSON.stringify(summary));
    withTail.rows[0].tail = [
      { label: "CV9-HI", count: 1, pct: 0.001, pct_text: "0.001" },
    ];
    const html = renderPairingTable(withTail);
    expect(html).toContain("S<sub>&#8734;</sub>");
    expect(html).toContain("CV9-HI");
    expect(html).toContain("(0.001%)");
  });

  it("marks infeasible CVs in a red-dotted footer", () => {
    const withRed: HistorySummary = JSON.parse(JSON.stringify(summary));
    withRed.infeasible = [
      { cv: "CV3", count: 1, pct: 33.3, pct_text: "33.3", sides: ["LO"], partners: [] },
    ];
    withRed.overlay!.infeasible = [{ cv: "CV3", side: "LO", color: "RED" }];
    const html = renderPairingTable(withRed);
    const footer = html.match(/<tfoot>.*<\/tfoot>/s)![0];
    expect(footer).toContain("Infeasible");
    expect(footer).toContain("CV3");
    expect(footer).toContain("dot-red");
  });

  it("announces when no intent is configured", () => {
    const noIntent: HistorySummary = JSON.parse(JSON.stringify(summary));
    noIntent.intent_configured = false;
    noIntent.overlay!.intent_configured = false;
    noIntent.overlay!.mv["MV1"].color = null;
    const html = renderPairingTable(noIntent);
    expect(html).toContain("No design intent configured");
    expect(html).toContain("dot-none");
  });
});
