/** DOM rendering for the ranked list and the preview pane.
 *
 * The list renders the API response verbatim: the server is the ranking
 * authority and nothing is reordered or filtered client-side.
 */

import type { ComponentId, RankedItemJson, ScoreVector, SearchResponse } from "./types.js";

const BREAKDOWN_FIELDS: (keyof ScoreVector)[] = [
  "s_sew", "s_cnt", "s_st", "s_cc", "s_so", "s_tt",
  "s_pr", "s_str", "s_pop", "s_cxt", "s_ser",
];

const COMPOSITE_OF: Record<ComponentId, keyof ScoreVector> = {
  cnt: "s_cnt",
  cxt: "s_cxt",
  pop: "s_pop",
  ser: "s_ser",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function externalUrl(canonical: string): string {
  return canonical.includes("://") ? canonical : `https://${canonical}`;
}

/** One stacked bar: each enabled component's weighted share of the final score. */
function stackedFusionBar(item: RankedItemJson, enabled: string[],
                          weights: Record<string, number>): HTMLElement {
  const bar = el("div", "fusion-bar");
  bar.dataset.role = "fusion-bar";
  const total = Math.max(item.scores.s_final, 1e-9);
  for (const component of enabled) {
    const key = COMPOSITE_OF[component as ComponentId];
    if (!key) continue;
    const contribution = (weights[component] ?? 1) * item.scores[key];
    const segment = el("span", `fusion-segment fusion-${component}`);
    segment.dataset.component = component;
    segment.style.width = `${(100 * contribution) / total}%`;
    segment.title = `${component}: ${contribution.toFixed(3)}`;
    bar.appendChild(segment);
  }
  return bar;
}

function breakdownGrid(scores: ScoreVector): HTMLElement {
  const grid = el("div", "breakdown");
  grid.dataset.role = "score-breakdown";
  for (const field of BREAKDOWN_FIELDS) {
    const row = el("div", "breakdown-row");
    row.appendChild(el("span", "breakdown-label", field.replace("s_", "")));
    const track = el("span", "breakdown-track");
    const fill = el("span", "breakdown-fill");
    fill.dataset.metric = field;
    fill.style.width = `${Math.round(scores[field] * 100)}%`;
    track.appendChild(fill);
    row.appendChild(track);
    row.appendChild(el("span", "breakdown-value", scores[field].toFixed(3)));
    grid.appendChild(row);
  }
  return grid;
}

export function renderResults(
  container: HTMLElement,
  response: Pick<SearchResponse, "items" | "config_echo">,
  onPreview: (item: RankedItemJson, trigger: HTMLElement) => void,
): void {
  container.innerHTML = "";
  container.dataset.count = String(response.items.length);
  if (response.items.length === 0) {
    container.appendChild(el("p", "empty-note", "No results for this query."));
    return;
  }

  for (const item of response.items) {
    const li = el("li", "result");
    li.dataset.rank = String(item.rank);
    li.dataset.url = item.entry.canonical_url;
    li.tabIndex = -1;

    const head = el("div", "result-head");
    head.appendChild(el("span", "rank-badge", `#${item.rank}`));

    const link = el("a", "result-title", item.entry.title || item.entry.canonical_url);
    link.href = externalUrl(item.entry.canonical_url);
    link.target = "_blank";
    link.rel = "noopener noreferrer";
    head.appendChild(link);

    head.appendChild(el("span", "final-score", item.scores.s_final.toFixed(4)));
    li.appendChild(head);

    li.appendChild(el("div", "result-url", item.entry.canonical_url));

    const badges = el("div", "badges");
    for (const provider of Object.keys(item.entry.per_provider_positions).sort()) {
      const badge = el("span", "provider-badge",
        `${provider} №${item.entry.per_provider_positions[provider]}`);
      badge.dataset.provider = provider;
      badges.appendChild(badge);
    }
    if (item.entry.content.stack_traces.length > 0) {
      const indicator = el("span", "trace-indicator",
        item.scores.s_st > 0 ? "trace match" : "has trace");
      indicator.dataset.role = "trace-indicator";
      indicator.classList.toggle("trace-match", item.scores.s_st > 0);
      badges.appendChild(indicator);
    }
    li.appendChild(badges);

    li.appendChild(stackedFusionBar(
      item,
      response.config_echo.enabled_components,
      response.config_echo.component_weights,
    ));
    li.appendChild(breakdownGrid(item.scores));

    const previewButton = el("button", "preview-button", "Preview");
    previewButton.type = "button";
    previewButton.addEventListener("click", () => onPreview(item, li));
    li.appendChild(previewButton);

    container.appendChild(li);
  }
}

export function renderPreview(pane: HTMLElement, item: RankedItemJson): void {
  pane.innerHTML = "";
  pane.dataset.url = item.entry.canonical_url;

  const close = el("button", "preview-close", "Close");
  close.type = "button";
  close.dataset.role = "preview-close";
  pane.appendChild(close);

  pane.appendChild(el("h2", "preview-title", item.entry.title || item.entry.canonical_url));

  const out = el("a", "preview-link", "open live page");
  out.href = externalUrl(item.entry.canonical_url);
  out.target = "_blank";
  out.rel = "noopener noreferrer";
  pane.appendChild(out);

  const content = item.entry.content;
  const hasContent =
    content.body_text.trim().length > 0 ||
    content.code_blocks.length > 0 ||
    content.stack_traces.length > 0;

  if (!hasContent) {
    const placeholder = el("p", "preview-placeholder",
      "No stored content for this result; use the live link above.");
    placeholder.dataset.role = "preview-placeholder";
    pane.appendChild(placeholder);
    return;
  }

  for (const trace of content.stack_traces) {
    const block = el("pre", "preview-trace", trace.raw);
    block.dataset.role = "stored-trace";
    pane.appendChild(block);
  }
  const traceTexts = new Set(content.stack_traces.map((t) => t.raw));
  for (const code of content.code_blocks) {
    if (traceTexts.has(code)) continue; // already shown highlighted
    pane.appendChild(el("pre", "preview-code", code));
  }
  if (content.body_text.trim()) {
    const excerpt = content.body_text.split("\n").slice(0, 12).join("\n");
    pane.appendChild(el("p", "preview-body", excerpt));
  }
}
