/** Rule authoring panel: class dropdown, expression editor with
 * catalog-driven autocomplete, live validation diagnostics, and an apply
 * button that stays disabled until the diagnostics are empty. */

import { suggest, tokenAtCaret } from "./autocomplete.js";
import type { Diagnostic, RuleDraft, SchemaCatalog } from "./types.js";

export interface RuleBuilderOptions {
  catalog: SchemaCatalog;
  validate: (ruleClass: string, text: string) => Promise<Diagnostic[]>;
  onApply: (draft: RuleDraft) => void;
}

export class RuleBuilder {
  readonly root: HTMLElement;
  private classSelect: HTMLSelectElement;
  private editor: HTMLTextAreaElement;
  private nameInput: HTMLInputElement;
  private severitySelect: HTMLSelectElement;
  private diagnosticsBox: HTMLElement;
  private suggestionsBox: HTMLElement;
  private applyButton: HTMLButtonElement;
  private validateSeq = 0;
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  diagnostics: Diagnostic[] = [];
  private validated = false;

  constructor(private options: RuleBuilderOptions) {
    this.root = document.createElement("section");
    this.root.className = "rule-builder";
    this.root.innerHTML = `
      <h3>Query rule</h3>
      <div class="rule-controls">
        <select class="rule-class"></select>
        <input class="rule-name" placeholder="rule name (optional)" />
        <select class="rule-severity">
          <option value="sound">sound</option>
          <option value="suspicion">suspicion</option>
          <option value="unsound">unsound</option>
        </select>
      </div>
      <div class="editor-wrap">
        <textarea class="rule-editor" rows="3" spellcheck="false"
          placeholder="inputState.friendlyHealthTop < outputState.friendlyHealthTop"></textarea>
        <ul class="suggestions" hidden></ul>
      </div>
      <div class="diagnostics"></div>
      <button class="apply" disabled>Apply</button>
    `;
    this.classSelect = this.root.querySelector(".rule-class")!;
    this.editor = this.root.querySelector(".rule-editor")!;
    this.nameInput = this.root.querySelector(".rule-name")!;
    this.severitySelect = this.root.querySelector(".rule-severity")!;
    this.diagnosticsBox = this.root.querySelector(".diagnostics")!;
    this.suggestionsBox = this.root.querySelector(".suggestions")!;
    this.applyButton = this.root.querySelector(".apply")!;

    for (const ruleClass of options.catalog.ruleClasses) {
      const opt = document.createElement("option");
      opt.value = ruleClass;
      opt.textContent = ruleClass;
      this.classSelect.appendChild(opt);
    }

    this.editor.addEventListener("input", () => {
      this.refreshSuggestions();
      this.scheduleValidation();
    });
    this.classSelect.addEventListener("change", () => {
      this.refreshSuggestions();
      this.scheduleValidation();
    });
    this.applyButton.addEventListener("click", () => {
      if (this.applyButton.disabled) return;
      this.options.onApply(this.draft());
    });
  }

  draft(): RuleDraft {
    return {
      ruleClass: this.classSelect.value,
      text: this.editor.value,
      name: this.nameInput.value.trim(),
      severity: this.severitySelect.value,
    };
  }

  setText(text: string): void {
    this.editor.value = text;
  }

  setClass(ruleClass: string): void {
    this.classSelect.value = ruleClass;
  }

  /** Debounced server validation; apply stays disabled until clean. */
  private scheduleValidation(delay = 250): void {
    this.validated = false;
    this.applyButton.disabled = true;
    if (this.debounceTimer !== null) clearTimeout(this.debounceTimer);
    this.debounceTimer = setTimeout(() => void this.validateNow(), delay);
  }

  async validateNow(): Promise<Diagnostic[]> {
    const seq = ++this.validateSeq;
    const draft = this.draft();
    if (draft.text.trim() === "") {
      this.diagnostics = [];
      this.renderDiagnostics();
      this.applyButton.disabled = true;
      return [];
    }
    const diagnostics = await this.options.validate(draft.ruleClass, draft.text);
    if (seq !== this.validateSeq) return diagnostics; // a newer edit superseded us
    this.diagnostics = diagnostics;
    this.validated = true;
    this.renderDiagnostics();
    this.applyButton.disabled = diagnostics.length > 0;
    return diagnostics;
  }

  private renderDiagnostics(): void {
    this.diagnosticsBox.textContent = "";
    for (const diag of this.diagnostics) {
      const line = document.createElement("p");
      line.className = `diagnostic diagnostic-${diag.kind}`;
      line.textContent =
        `${diag.kind} at line ${diag.line}, column ${diag.col}: ${diag.message}`;
      this.diagnosticsBox.appendChild(line);
    }
  }

  refreshSuggestions(): void {
    const caret = this.editor.selectionStart ?? this.editor.value.length;
    const items = suggest(
      this.options.catalog,
      this.classSelect.value,
      this.editor.value,
      caret,
    );
    this.suggestionsBox.textContent = "";
    this.suggestionsBox.hidden = items.length === 0;
    for (const item of items) {
      const li = document.createElement("li");
      li.textContent = item.label;
      li.addEventListener("mousedown", (event) => {
        event.preventDefault();
        this.acceptSuggestion(item.insert);
      });
      this.suggestionsBox.appendChild(li);
    }
  }

  acceptSuggestion(insert: string): void {
    const caret = this.editor.selectionStart ?? this.editor.value.length;
    const token = tokenAtCaret(this.editor.value, caret);
    const start = token ? token.start : caret;
    this.editor.value =
      this.editor.value.slice(0, start) + insert + this.editor.value.slice(caret);
    const pos = start + insert.length;
    this.editor.setSelectionRange(pos, pos);
    this.refreshSuggestions();
    this.scheduleValidation(0);
  }

  suggestionLabels(): string[] {
    return Array.from(this.suggestionsBox.querySelectorAll("li")).map(
      (li) => li.textContent ?? "",
    );
  }

  applyEnabled(): boolean {
    return !this.applyButton.disabled;
  }

  clickApply(): void {
    this.applyButton.click();
  }
}
