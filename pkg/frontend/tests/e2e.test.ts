/** End-to-end flow over recorded API payloads: author the health-inflation
 * rule, apply it, check the chart renders the API histogram verbatim, then
 * select a decision point and check the highlighted cards equal the
 * backend's match set. */

import { beforeEach, describe, expect, it } from "vitest";

import { mountApp, App } from "../src/app.js";
import { WorkbenchClient } from "../src/api.js";
import { fixture, flush, installFetchMock, meta } from "./helpers.js";
import type { TreeSlicePayload } from "../src/types.js";

let app: App;
let calls: { url: string; body?: unknown }[];

beforeEach(async () => {
  ({ calls } = installFetchMock());
  document.body.innerHTML = "";
  app = await mountApp(document.body, new WorkbenchClient());
  await flush();
});

describe("workbench end to end", () => {
  it("boots with episodes from the API", () => {
    const options = Array.from(document.querySelectorAll(".episode-select option"));
    expect(options.length).toBeGreaterThan(0);
    expect((options[0] as HTMLOptionElement).value).toBe(meta.episodeId);
  });

  it("disables apply until validation is clean, then fires the chart request", async () => {
    app.builder.setClass(meta.ruleClass);
    app.builder.setText("outputState.friendlyHealthMiddle > 0");
    await app.builder.validateNow();
    expect(app.builder.applyEnabled()).toBe(false);
    expect(
      document.querySelector(".diagnostic")?.textContent,
    ).toMatch(/line 1/);

    app.builder.setText(meta.ruleText);
    const diagnostics = await app.builder.validateNow();
    expect(diagnostics).toEqual([]);
    expect(app.builder.applyEnabled()).toBe(true);

    app.builder.clickApply();
    await flush();
    expect(calls.some((c) => c.url.endsWith("/v1/evaluate"))).toBe(true);
  });

  it("renders bar heights equal to the API histogram", async () => {
    app.builder.setClass(meta.ruleClass);
    app.builder.setText(meta.ruleText);
    await app.builder.validateNow();
    app.builder.clickApply();
    await flush();

    const bars = Array.from(document.querySelectorAll("rect.chart-bar"));
    expect(bars.map((b) => Number((b as SVGRectElement).dataset.count))).toEqual(
      meta.histogram,
    );
    // numbers come from the API payload, never computed client-side
    expect(app.currentReport?.totalMatches).toBe(
      meta.histogram.reduce((a, b) => a + b, 0),
    );
  });

  it("selecting a decision point highlights exactly the backend match set", async () => {
    app.builder.setClass(meta.ruleClass);
    app.builder.setText(meta.ruleText);
    await app.builder.validateNow();
    app.builder.clickApply();
    await flush();

    const hit = document.querySelector(
      `rect[data-decision-hit="${meta.matchDecision}"]`,
    )!;
    hit.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await flush();

    const expected = fixture<{ slice: TreeSlicePayload }>(
      `slice_${meta.matchDecision}.json`,
    ).slice.highlighted;
    const highlighted = Array.from(
      document.querySelectorAll(".node-card.highlighted"),
    ).map((el) => Number((el as HTMLElement).dataset.stateRowId));
    expect(highlighted.sort((a, b) => a - b)).toEqual(expected);
    // no client-side re-check failures among the highlights
    expect(document.querySelectorAll(".recheck-bad").length).toBe(0);
  });

  it("expands and collapses node cards", async () => {
    app.builder.setClass(meta.ruleClass);
    app.builder.setText(meta.ruleText);
    await app.builder.validateNow();
    app.builder.clickApply();
    await flush();
    document
      .querySelector(`rect[data-decision-hit="${meta.matchDecision}"]`)!
      .dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await flush();

    // backend-expanded path nodes start expanded; collapse-all resets them
    expect(document.querySelectorAll(".node-card.expanded").length)
      .toBeGreaterThan(0);
    (document.querySelector(".collapse-all") as HTMLButtonElement).click();
    expect(document.querySelectorAll(".node-card.expanded").length).toBe(0);

    const card = document.querySelector(".node-card")! as HTMLElement;
    (card.querySelector(".toggle") as HTMLButtonElement).click();
    const reloaded = document.querySelector(
      `.node-card[data-state-row-id="${card.dataset.stateRowId}"]`,
    )!;
    expect(reloaded.classList.contains("expanded")).toBe(true);
  });

  it("records applied rules in the notebook with their counts", async () => {
    app.builder.setClass(meta.ruleClass);
    app.builder.setText(meta.ruleText);
    await app.builder.validateNow();
    app.builder.clickApply();
    await flush();
    const entry = document.querySelector(".notebook-entry")!;
    expect(entry.textContent).toContain(meta.ruleText);
    expect(entry.textContent).toContain(
      String(meta.histogram.reduce((a, b) => a + b, 0)),
    );
  });
});
