/** Workbench application shell.
 *
 * Three sections mirror the analyst workflow: author a query rule, read
 * the violation histogram over decision points, then drill into one
 * decision's search tree with matching nodes highlighted. All numbers come
 * from API payloads; stale async responses are discarded by sequence
 * number so a slow evaluation can never overwrite a newer one.
 */

import { WorkbenchClient, ApiError } from "./api.js";
import { renderChart } from "./chart.js";
import { RuleBuilder } from "./ruleBuilder.js";
import { renderTree } from "./tree.js";
import type {
  Diagnostic,
  EvaluateResponse,
  NotebookEntry,
  RuleDraft,
  SchemaCatalog,
  TreeSlicePayload,
} from "./types.js";

export class App {
  readonly root: HTMLElement;
  client: WorkbenchClient;
  catalog!: SchemaCatalog;
  builder!: RuleBuilder;

  episodeSelect!: HTMLSelectElement;
  chartBox!: HTMLElement;
  treeBox!: HTMLElement;
  notebookBox!: HTMLElement;
  statusBox!: HTMLElement;

  currentRuleId: string | null = null;
  currentRuleText = "";
  currentRuleClass = "";
  currentReport: EvaluateResponse | null = null;
  currentSlice: TreeSlicePayload | null = null;
  selectedDecision: number | null = null;
  expansion = new Set<number>();
  notebook: NotebookEntry[] = [];
  private evaluateSeq = 0;
  private sliceSeq = 0;

  constructor(client: WorkbenchClient) {
    this.client = client;
    this.root = document.createElement("div");
    this.root.className = "workbench";
  }

  async start(): Promise<void> {
    const { catalog } = await this.client.schema();
    this.catalog = catalog;
    const { episodes } = await this.client.episodes();

    this.root.innerHTML = `
      <header>
        <h2>Search-tree behavior workbench</h2>
        <label>episode
          <select class="episode-select"></select>
        </label>
        <span class="status"></span>
      </header>
      <div class="panel rule-panel"></div>
      <section class="panel chart-panel">
        <h3>Violations over decision points</h3>
        <div class="chart-box"></div>
      </section>
      <section class="panel tree-panel">
        <h3>Search tree
          <button class="collapse-all">collapse all</button>
        </h3>
        <div class="tree-box"><p class="tree-empty">Apply a rule and select
        a decision point.</p></div>
      </section>
      <aside class="panel notebook-panel">
        <h3>Rule notebook</h3>
        <ul class="notebook"></ul>
      </aside>
    `;
    this.episodeSelect = this.root.querySelector(".episode-select")!;
    this.chartBox = this.root.querySelector(".chart-box")!;
    this.treeBox = this.root.querySelector(".tree-box")!;
    this.notebookBox = this.root.querySelector(".notebook")!;
    this.statusBox = this.root.querySelector(".status")!;

    for (const ep of episodes) {
      const opt = document.createElement("option");
      opt.value = ep.episodeId;
      opt.textContent =
        `${ep.episodeId} (${ep.decisionPoints} decisions, ` +
        `${ep.isWin ? "win" : "loss"})`;
      this.episodeSelect.appendChild(opt);
    }
    this.episodeSelect.addEventListener("change", () => {
      if (this.currentRuleId) void this.evaluateCurrent();
    });

    this.builder = new RuleBuilder({
      catalog,
      validate: async (ruleClass, text) => this.validateRule(ruleClass, text),
      onApply: (draft) => void this.applyRule(draft),
    });
    this.root.querySelector(".rule-panel")!.appendChild(this.builder.root);

    this.root
      .querySelector(".collapse-all")!
      .addEventListener("click", () => this.collapseAll());
  }

  episodeId(): string {
    return this.episodeSelect.value;
  }

  private async validateRule(
    ruleClass: string,
    text: string,
  ): Promise<Diagnostic[]> {
    try {
      const resp = await this.client.validateRule(ruleClass, text);
      return resp.diagnostics;
    } catch (error) {
      if (error instanceof ApiError && error.status === 400) {
        const body = error.body as { diagnostics?: Diagnostic[] };
        return body.diagnostics ?? [];
      }
      throw error;
    }
  }

  async applyRule(draft: RuleDraft): Promise<void> {
    const registered = await this.client.registerRule(
      draft.ruleClass,
      draft.text,
      draft.name || undefined,
      draft.severity,
    );
    if (registered.ruleId === null) return;
    this.currentRuleId = registered.ruleId;
    this.currentRuleText = draft.text;
    this.currentRuleClass = draft.ruleClass;
    this.notebook.push({
      ruleId: registered.ruleId,
      name: draft.name || registered.ruleId,
      ruleClass: draft.ruleClass,
      severity: draft.severity,
      text: draft.text,
      description: "",
      totalMatches: null,
    });
    await this.evaluateCurrent();
  }

  async evaluateCurrent(): Promise<void> {
    if (!this.currentRuleId) return;
    const seq = ++this.evaluateSeq;
    this.statusBox.textContent = "evaluating…";
    let report: EvaluateResponse;
    try {
      report = await this.client.evaluate(this.currentRuleId, this.episodeId());
    } catch (error) {
      if (seq !== this.evaluateSeq) return;
      this.statusBox.textContent =
        error instanceof ApiError && error.status === 409
          ? "counterfactual tables are not materialized for this episode"
          : `evaluation failed: ${String(error)}`;
      return;
    }
    if (seq !== this.evaluateSeq) return; // stale response discarded
    this.currentReport = report;
    this.selectedDecision = null;
    this.currentSlice = null;
    this.statusBox.textContent =
      `${report.totalMatches} match(es), ` +
      `${report.evaluationErrors} evaluation error(s), ` +
      `${report.totalRowsScanned} rows scanned`;
    const entry = this.notebook.find((n) => n.ruleId === report.ruleId);
    if (entry) entry.totalMatches = report.totalMatches;
    this.renderNotebook();
    this.renderChart();
    this.treeBox.innerHTML =
      `<p class="tree-empty">Select a decision point.</p>`;
  }

  renderChart(): void {
    if (!this.currentReport) return;
    renderChart(
      this.chartBox,
      this.currentReport.histogram,
      { onSelect: (decision) => void this.selectDecision(decision) },
      this.selectedDecision,
    );
  }

  async selectDecision(decisionIdx: number): Promise<void> {
    if (!this.currentRuleId) return;
    const seq = ++this.sliceSeq;
    const { slice } = await this.client.slice(
      this.episodeId(),
      decisionIdx,
      this.currentRuleId,
    );
    if (seq !== this.sliceSeq) return;
    this.selectedDecision = decisionIdx;
    this.currentSlice = slice;
    // initial expansion mirrors the backend's expanded path nodes
    this.expansion = new Set(
      slice.nodes.filter((n) => n.expanded).map((n) => n.stateRowId),
    );
    this.renderChart();
    this.renderTree();
  }

  renderTree(): void {
    if (!this.currentSlice) return;
    renderTree(this.treeBox, this.currentSlice, {
      ruleText: this.currentRuleText,
      ruleClass: this.currentRuleClass,
      aliases: this.catalog.aliases,
      expansion: this.expansion,
      onToggle: (stateRowId) => {
        if (this.expansion.has(stateRowId)) this.expansion.delete(stateRowId);
        else this.expansion.add(stateRowId);
        this.renderTree();
      },
    });
  }

  collapseAll(): void {
    this.expansion.clear();
    this.renderTree();
  }

  renderNotebook(): void {
    this.notebookBox.textContent = "";
    for (const entry of this.notebook) {
      const li = document.createElement("li");
      li.className = "notebook-entry";
      const counts =
        entry.totalMatches === null ? "" : ` — ${entry.totalMatches} match(es)`;
      li.innerHTML =
        `<strong>${entry.name}</strong> ` +
        `<em>${entry.ruleClass}/${entry.severity}</em>${counts}` +
        `<code>${entry.text}</code>`;
      this.notebookBox.appendChild(li);
    }
  }
}

export async function mountApp(
  container: HTMLElement,
  client: WorkbenchClient = new WorkbenchClient(),
): Promise<App> {
  const app = new App(client);
  await app.start();
  container.appendChild(app.root);
  return app;
}
