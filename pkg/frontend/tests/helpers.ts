/** Shared test helpers: fixture loading and a fetch mock that replays the
 * recorded API payloads, so the client tests run against the exact bodies
 * the real backend produced. */

import { readFileSync } from "node:fs";
import { join } from "node:path";

const FIXTURES = join(__dirname, "fixtures");

export function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf-8")) as T;
}

export interface Meta {
  episodeId: string;
  ruleId: string;
  ruleText: string;
  ruleClass: string;
  matchDecision: number;
  zeroDecision: number | null;
  histogram: number[];
}

export const meta = fixture<Meta>("meta.json");

function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** Installs a fetch mock that serves the recorded fixtures. Returns the
 * request log for assertions. */
export function installFetchMock(): { calls: { url: string; body?: unknown }[] } {
  const calls: { url: string; body?: unknown }[] = [];
  globalThis.fetch = (async (
    input: RequestInfo | URL,
    init?: RequestInit,
  ): Promise<Response> => {
    const url = String(input);
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ url, body });

    if (url.endsWith("/v1/schema")) return jsonResponse(fixture("schema.json"));
    if (url.endsWith("/v1/episodes")) {
      return jsonResponse(fixture("episodes.json"));
    }
    if (url.endsWith("/v1/rules") && init?.method === "POST") {
      const payload = body as { text: string; validateOnly?: boolean };
      if (payload.text === meta.ruleText) {
        return jsonResponse(
          payload.validateOnly
            ? fixture("rule_validate_ok.json")
            : fixture("rule_register.json"),
        );
      }
      return jsonResponse(fixture("rule_validate_invalid.json"), 400);
    }
    if (url.endsWith("/v1/evaluate")) {
      return jsonResponse(fixture("evaluate.json"));
    }
    const slice = url.match(/decisions\/(\d+)\/slice/);
    if (slice) {
      return jsonResponse(fixture(`slice_${slice[1]}.json`));
    }
    throw new Error(`unmocked request: ${url}`);
  }) as typeof fetch;
  return { calls };
}

/** Flush pending promises (happy-dom has no automatic microtask drain). */
export async function flush(times = 6): Promise<void> {
  for (let i = 0; i < times; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}
