/** Search-tree explorer: a layered left-to-right rendering of one decision
 * point's tree slice. Each state node has a compact card (base health plus
 * the four win percentages) and an expandable full-attribute view; the
 * action pair on the edge into a node shows the friendly purchase in blue
 * and the enemy purchase in orange; rule-matching nodes are highlighted in
 * yellow. Highlighted cards also carry a client-side re-check badge that
 * re-evaluates the applied rule against the node's own attributes. */

import { evaluateRule, type EvalContext } from "./evaluator.js";
import type { SliceNode, TreeSlicePayload } from "./types.js";

export interface TreeOptions {
  ruleText?: string;
  ruleClass?: string;
  aliases?: Record<string, number> | Record<string, string>;
  expansion: Set<number>;
  onToggle?: (stateRowId: number) => void;
}

const UNIT_NAMES = ["marine", "baneling", "immortal"];
const WINPROB_NAMES = [
  "probabilityOfWinInTopLane",
  "probabilityOfWinInBottomLane",
  "probabilityOfEnemyWinInTopLane",
  "probabilityOfEnemyWinInBottomLane",
];

function describePurchase(counts: number[], lane: number): string {
  const parts = counts
    .map((n, i) => (n > 0 ? `${n} ${UNIT_NAMES[i]}` : null))
    .filter((p): p is string => p !== null);
  if (parts.length === 0) return "buy nothing";
  return `${parts.join(", ")} (${lane === 0 ? "top" : "bottom"})`;
}

export function actionChips(node: SliceNode): HTMLElement | null {
  if (!node.action) return null;
  const wrap = document.createElement("div");
  wrap.className = "action-pair";
  const friendly = document.createElement("span");
  friendly.className = "chip chip-friendly";
  friendly.textContent =
    "F: " +
    describePurchase(
      [
        node.action.numOfMarineBldgsPurchasedByFriendly,
        node.action.numOfBanelingBldgsPurchasedByFriendly,
        node.action.numOfImmortalBldgsPurchasedByFriendly,
      ],
      node.action.laneOfFriendly,
    );
  const enemy = document.createElement("span");
  enemy.className = "chip chip-enemy";
  enemy.textContent =
    "E: " +
    describePurchase(
      [
        node.action.numOfMarineBldgsPurchasedByEnemy,
        node.action.numOfBanelingBldgsPurchasedByEnemy,
        node.action.numOfImmortalBldgsPurchasedByEnemy,
      ],
      node.action.laneOfEnemy,
    );
  wrap.append(friendly, enemy);
  return wrap;
}

export function recheckContext(
  node: SliceNode,
  parent: SliceNode | undefined,
): EvalContext | null {
  if (!node.attributes) return null;
  const ctx: EvalContext = {
    outputState: node.attributes,
    winProb: Object.fromEntries(
      WINPROB_NAMES.map((name, i) => [name, node.winProbabilities[i]]),
    ),
  };
  if (parent?.attributes) ctx.inputState = parent.attributes;
  if (node.action) ctx.action = node.action;
  return ctx;
}

function percentText(p: number): string {
  return `${(p * 100).toFixed(1)}%`;
}

function compactBody(node: SliceNode): HTMLElement {
  const body = document.createElement("div");
  body.className = "card-compact";
  const health = document.createElement("div");
  health.className = "health-row";
  const [ft, fb, et, eb] = node.health;
  health.textContent = `HP F:${ft}/${fb} E:${et}/${eb}`;
  const probs = document.createElement("div");
  probs.className = "winprob-row";
  probs.textContent = node.winProbabilities.map(percentText).join(" ");
  body.append(health, probs);
  return body;
}

function expandedBody(node: SliceNode): HTMLElement {
  const body = document.createElement("div");
  body.className = "card-expanded";
  const probs = document.createElement("div");
  probs.className = "winprob-row prominent";
  probs.textContent =
    "win probabilities: " + node.winProbabilities.map(percentText).join(" / ");
  body.appendChild(probs);
  const table = document.createElement("table");
  table.className = "attr-table";
  const attrs = node.attributes ?? {};
  for (const [name, value] of Object.entries(attrs)) {
    if (value === 0 && name.includes("Grid")) continue; // keep the panel readable
    const row = table.insertRow();
    row.insertCell().textContent = name;
    row.insertCell().textContent =
      typeof value === "number" && !Number.isInteger(value)
        ? value.toFixed(4)
        : String(value);
  }
  body.appendChild(table);
  return body;
}

export function renderTree(
  container: HTMLElement,
  slice: TreeSlicePayload,
  options: TreeOptions,
): void {
  container.textContent = "";
  const byRow = new Map(slice.nodes.map((n) => [n.stateRowId, n]));
  const columns = document.createElement("div");
  columns.className = "tree-columns";

  for (let depth = 0; depth <= 2; depth += 1) {
    const nodes = slice.nodes.filter((n) => n.depth === depth);
    if (nodes.length === 0) continue;
    const column = document.createElement("div");
    column.className = "tree-column";
    const heading = document.createElement("h4");
    heading.textContent =
      depth === 0 ? "root state" : depth === 1 ? "predicted states" : "leaves";
    column.appendChild(heading);

    for (const node of nodes) {
      const card = document.createElement("div");
      const expanded = options.expansion.has(node.stateRowId);
      card.className =
        "node-card" +
        (node.highlighted ? " highlighted" : "") +
        (expanded ? " expanded" : "");
      card.dataset.stateRowId = String(node.stateRowId);
      card.dataset.depth = String(node.depth);

      const header = document.createElement("div");
      header.className = "card-header";
      header.textContent = `#${node.stateRowId} (node ${node.nodeId}) ` +
        `value ${node.backedUpValue.toFixed(3)}`;
      const toggle = document.createElement("button");
      toggle.className = "toggle";
      toggle.textContent = expanded ? "collapse" : "expand";
      toggle.addEventListener("click", () =>
        options.onToggle?.(node.stateRowId),
      );
      header.appendChild(toggle);
      card.appendChild(header);

      const chips = actionChips(node);
      if (chips) card.appendChild(chips);

      card.appendChild(expanded ? expandedBody(node) : compactBody(node));

      if (node.highlighted && options.ruleText) {
        const badge = document.createElement("span");
        badge.className = "recheck";
        const ctx = recheckContext(node, byRow.get(node.parentStateRowId ?? -1));
        if (ctx === null) {
          badge.textContent = "match";
        } else {
          try {
            const holds = evaluateRule(
              options.ruleText,
              ctx,
              (options.aliases ?? {}) as Record<string, string>,
            );
            badge.textContent = holds ? "match ✓" : "match ✗";
            badge.classList.add(holds ? "recheck-ok" : "recheck-bad");
          } catch {
            badge.textContent = "match"; // rule references data not in the slice
          }
        }
        card.appendChild(badge);
      }
      column.appendChild(card);
    }
    columns.appendChild(column);
  }

  const summary = document.createElement("p");
  summary.className = "tree-summary";
  summary.textContent =
    `${slice.nodes.length} of ${slice.totalNodes} nodes shown ` +
    `(${slice.prunedNodes} pruned), ${slice.highlighted.length} highlighted`;
  container.append(summary, columns);
}
