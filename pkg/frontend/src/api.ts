/** Typed client over the workbench HTTP API. The UI never computes counts
 * itself; every number rendered comes from these payloads. */

import type {
  EpisodeSummary,
  EvaluateResponse,
  RuleResponse,
  SchemaCatalog,
  TreeSlicePayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    public status: number,
    public body: unknown,
  ) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  const body = await resp.json();
  if (!resp.ok) {
    throw new ApiError(`${init?.method ?? "GET"} ${path} -> ${resp.status}`,
      resp.status, body);
  }
  return body as T;
}

export class WorkbenchClient {
  constructor(private base: string = "") {}

  schema(): Promise<{ catalog: SchemaCatalog }> {
    return request(`${this.base}/v1/schema`);
  }

  episodes(): Promise<{ episodes: EpisodeSummary[] }> {
    return request(`${this.base}/v1/episodes`);
  }

  validateRule(ruleClass: string, text: string): Promise<RuleResponse> {
    return request(`${this.base}/v1/rules`, {
      method: "POST",
      body: JSON.stringify({ class: ruleClass, text, validateOnly: true }),
    });
  }

  registerRule(
    ruleClass: string,
    text: string,
    name?: string,
    severity?: string,
  ): Promise<RuleResponse> {
    return request(`${this.base}/v1/rules`, {
      method: "POST",
      body: JSON.stringify({ class: ruleClass, text, name, severity }),
    });
  }

  evaluate(
    ruleId: string,
    episodeId: string,
    pageSize = 500,
  ): Promise<EvaluateResponse> {
    return request(`${this.base}/v1/evaluate`, {
      method: "POST",
      body: JSON.stringify({ ruleId, episodeId, pageSize }),
    });
  }

  slice(
    episodeId: string,
    decisionIdx: number,
    ruleId: string,
  ): Promise<{ slice: TreeSlicePayload }> {
    return request(
      `${this.base}/v1/episodes/${episodeId}/decisions/${decisionIdx}` +
        `/slice?ruleId=${encodeURIComponent(ruleId)}`,
    );
  }
}
