/** Draft <-> URL hash serialization, so any view is shareable as a link. */

import { ALL_COMPONENTS, type ComponentId, type QueryDraft, defaultDraft } from "./types.js";

export function draftToHash(draft: QueryDraft): string {
  const params = new URLSearchParams();
  if (draft.message) params.set("m", draft.message);
  if (draft.traceText) params.set("t", draft.traceText);
  if (draft.contextText) params.set("c", draft.contextText);
  params.set("s", draft.selectedComponents.join(","));
  const weights = ALL_COMPONENTS.map((id) => `${id}:${draft.weights[id]}`).join(",");
  params.set("w", weights);
  return params.toString();
}

export function draftFromHash(hash: string): QueryDraft {
  const draft = defaultDraft();
  const params = new URLSearchParams(hash.replace(/^#/, ""));
  draft.message = params.get("m") ?? "";
  draft.traceText = params.get("t") ?? "";
  draft.contextText = params.get("c") ?? "";

  const selected = params.get("s");
  if (selected !== null) {
    const ids = selected
      .split(",")
      .filter((id): id is ComponentId => (ALL_COMPONENTS as string[]).includes(id));
    if (ids.length > 0) {
      draft.selectedComponents = ids;
    }
  }
  const weights = params.get("w");
  if (weights) {
    for (const pair of weights.split(",")) {
      const [id, raw] = pair.split(":");
      const value = Number(raw);
      if ((ALL_COMPONENTS as string[]).includes(id ?? "") && Number.isFinite(value) && value >= 0) {
        draft.weights[id as ComponentId] = value;
      }
    }
  }
  return draft;
}

export function syncHash(draft: QueryDraft): void {
  const encoded = draftToHash(draft);
  history.replaceState(null, "", `#${encoded}`);
}
