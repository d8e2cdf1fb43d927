/** Payload shapes of the workbench HTTP API (all carry schemaVersion). */

export interface SchemaCatalog {
  schemaVersion: number;
  ruleClasses: string[];
  classNamespaces: Record<string, string[]>;
  namespaces: Record<string, string[]>;
  aliases: Record<string, string>;
}

export interface EpisodeSummary {
  episodeId: string;
  isWin: boolean;
  waveCount: number;
  decisionPoints: number;
  configHash: string;
}

export interface Diagnostic {
  kind: string;
  message: string;
  line: number;
  col: number;
}

export interface RuleResponse {
  ruleId: string | null;
  pretty?: string;
  diagnostics: Diagnostic[];
}

export interface EvaluateResponse {
  ruleId: string;
  episodeId: string;
  severity: string;
  totalMatches: number;
  evaluationErrors: number;
  totalRowsScanned: number;
  histogram: number[];
  perDecisionCounts: Record<string, number>;
  matches: MatchIds[];
}

export interface MatchIds {
  outputStateId: number;
  inputStateId: number | null;
  actionId: number | null;
  counterfactualId: number | null;
}

export interface SliceNode {
  stateRowId: number;
  nodeId: number;
  depth: number;
  parentStateRowId: number | null;
  actionRowId: number | null;
  highlighted: boolean;
  expanded: boolean;
  health: number[];
  winProbabilities: number[];
  backedUpValue: number;
  attributes: Record<string, number> | null;
  action: Record<string, number> | null;
}

export interface TreeSlicePayload {
  episodeId: string;
  decisionIdx: number;
  rootStateRowId: number;
  nodes: SliceNode[];
  highlighted: number[];
  totalNodes: number;
  prunedNodes: number;
  chosenAction: number[] | null;
}

export interface RuleDraft {
  ruleClass: string;
  text: string;
  name: string;
  severity: string;
}

/** An applied rule in the notebook panel. */
export interface NotebookEntry {
  ruleId: string;
  name: string;
  ruleClass: string;
  severity: string;
  text: string;
  description: string;
  totalMatches: number | null;
}
