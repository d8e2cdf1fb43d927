import { describe, expect, it } from "vitest";

import { renderChart } from "../src/chart.js";
import { fixture } from "./helpers.js";
import type { EvaluateResponse } from "../src/types.js";

const report = fixture<EvaluateResponse>("evaluate.json");

function bars(container: HTMLElement): SVGRectElement[] {
  return Array.from(container.querySelectorAll("rect.chart-bar"));
}

describe("violation chart", () => {
  it("renders one bar per decision with counts from the histogram", () => {
    const box = document.createElement("div");
    renderChart(box, report.histogram);
    const rects = bars(box);
    expect(rects.length).toBe(report.histogram.length);
    const counts = rects.map((r) => Number(r.dataset.count));
    expect(counts).toEqual(report.histogram);
  });

  it("scales bar heights proportionally to counts", () => {
    const box = document.createElement("div");
    renderChart(box, [10, 5, 0]);
    const rects = bars(box);
    const heights = rects.map((r) => Number(r.getAttribute("height")));
    expect(heights[0]).toBeGreaterThan(heights[1]);
    expect(heights[1]).toBeGreaterThan(heights[2]);
    expect(heights[2]).toBe(0);
  });

  it("shows an empty-state message for an all-zero report", () => {
    const box = document.createElement("div");
    renderChart(box, [0, 0, 0]);
    expect(box.querySelector(".chart-empty")?.textContent).toMatch(
      /No violations/,
    );
    // bars are still clickable for exploring clean decision points
    expect(bars(box).length).toBe(3);
  });

  it("selects a decision on click", () => {
    const box = document.createElement("div");
    let selected: number | null = null;
    renderChart(box, report.histogram, {
      onSelect: (d) => {
        selected = d;
      },
    });
    bars(box)[1].dispatchEvent(new MouseEvent("click", { bubbles: true }));
    expect(selected).toBe(1);
  });

  it("marks the selected decision", () => {
    const box = document.createElement("div");
    renderChart(box, report.histogram, {}, 0);
    expect(bars(box)[0].classList.contains("selected")).toBe(true);
  });
});
