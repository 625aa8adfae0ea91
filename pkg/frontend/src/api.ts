/** Search API client with stale-response suppression.
 *
 * At most one search matters at a time: every request gets a sequence
 * number and a response is delivered only when it still is the latest,
 * so a slow earlier search can never overwrite a newer one.
 */

import type { ApiError, QueryDraft, RunRecordJson, SearchResponse } from "./types.js";

export class SearchApiError extends Error {
  readonly status: number;
  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

export function buildSearchBody(draft: QueryDraft): Record<string, unknown> {
  const body: Record<string, unknown> = {
    error_message: draft.message,
    score_config: {
      enabled_components: [...draft.selectedComponents].sort(),
      component_weights: draft.weights,
    },
  };
  if (draft.traceText.trim()) {
    body.stack_trace = draft.traceText;
  }
  if (draft.contextText.trim()) {
    body.code_context = draft.contextText;
  }
  return body;
}

export class SearchClient {
  private readonly baseUrl: string;
  private sequence = 0;

  constructor(baseUrl = "") {
    this.baseUrl = baseUrl.replace(/\/$/, "");
  }

  /** POST the draft; resolves null when a newer search superseded this one. */
  async search(draft: QueryDraft): Promise<SearchResponse | null> {
    const mySeq = ++this.sequence;
    const response = await fetch(`${this.baseUrl}/api/v1/search`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(buildSearchBody(draft)),
    });
    if (mySeq !== this.sequence) {
      return null; // superseded while in flight
    }
    if (!response.ok) {
      const detail = await errorDetail(response);
      throw new SearchApiError(response.status, detail);
    }
    const payload = (await response.json()) as SearchResponse;
    return mySeq === this.sequence ? payload : null;
  }

  async getRun(runId: string): Promise<RunRecordJson> {
    const response = await fetch(`${this.baseUrl}/api/v1/runs/${runId}`);
    if (!response.ok) {
      throw new SearchApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as RunRecordJson;
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const payload = (await response.json()) as ApiError;
    return payload.detail || payload.error || `HTTP ${response.status}`;
  } catch {
    return `HTTP ${response.status}`;
  }
}
