/** Application wiring: form, validation, submission, preview lifecycle. */

import { SearchApiError, SearchClient } from "./api.js";
import { draftFromHash, syncHash } from "./state.js";
import { renderPreview, renderResults } from "./render.js";
import {
  ALL_COMPONENTS,
  type ComponentId,
  type QueryDraft,
  type RankedItemJson,
} from "./types.js";

interface AppElements {
  form: HTMLFormElement;
  message: HTMLTextAreaElement;
  trace: HTMLTextAreaElement;
  context: HTMLTextAreaElement;
  formError: HTMLElement;
  status: HTMLElement;
  results: HTMLElement;
  preview: HTMLElement;
}

function grab(root: Document | HTMLElement): AppElements {
  const get = <T extends HTMLElement>(id: string): T => {
    const node = root.querySelector<T>(`#${id}`);
    if (!node) throw new Error(`missing #${id}`);
    return node;
  };
  return {
    form: get<HTMLFormElement>("query-form"),
    message: get<HTMLTextAreaElement>("message"),
    trace: get<HTMLTextAreaElement>("trace"),
    context: get<HTMLTextAreaElement>("context"),
    formError: get("form-error"),
    status: get("status"),
    results: get("results"),
    preview: get("preview"),
  };
}

export class App {
  private readonly elements: AppElements;
  private readonly client: SearchClient;
  private previewReturn: { trigger: HTMLElement; scrollY: number } | null = null;

  constructor(root: Document | HTMLElement, client?: SearchClient) {
    this.elements = grab(root);
    const apiBase =
      new URLSearchParams(window.location.search).get("api") ?? "";
    this.client = client ?? new SearchClient(apiBase);
    this.restoreDraft();
    this.elements.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
  }

  private componentInput(id: ComponentId): HTMLInputElement {
    return this.elements.form.querySelector<HTMLInputElement>(
      `input[name="component"][value="${id}"]`,
    )!;
  }

  private weightInput(id: ComponentId): HTMLInputElement {
    return this.elements.form.querySelector<HTMLInputElement>(
      `input[name="weight-${id}"]`,
    )!;
  }

  readDraft(): QueryDraft {
    const selected = ALL_COMPONENTS.filter((id) => this.componentInput(id).checked);
    const weights = {} as Record<ComponentId, number>;
    for (const id of ALL_COMPONENTS) {
      const value = Number(this.weightInput(id).value);
      weights[id] = Number.isFinite(value) && value >= 0 ? value : 1;
    }
    return {
      message: this.elements.message.value,
      traceText: this.elements.trace.value,
      contextText: this.elements.context.value,
      selectedComponents: selected,
      weights,
    };
  }

  applyDraft(draft: QueryDraft): void {
    this.elements.message.value = draft.message;
    this.elements.trace.value = draft.traceText;
    this.elements.context.value = draft.contextText;
    for (const id of ALL_COMPONENTS) {
      this.componentInput(id).checked = draft.selectedComponents.includes(id);
      this.weightInput(id).value = String(draft.weights[id]);
    }
  }

  private restoreDraft(): void {
    if (window.location.hash.length > 1) {
      this.applyDraft(draftFromHash(window.location.hash));
    }
  }

  private showError(text: string): void {
    this.elements.formError.textContent = text;
    this.elements.formError.hidden = false;
  }

  private clearError(): void {
    this.elements.formError.textContent = "";
    this.elements.formError.hidden = true;
  }

  /** Validate and run the search; returns false when blocked client-side. */
  async submit(): Promise<boolean> {
    const draft = this.readDraft();
    if (!draft.message.trim()) {
      this.showError("An error message is required.");
      return false;
    }
    if (draft.selectedComponents.length === 0) {
      this.showError("Select at least one score component.");
      return false;
    }
    this.clearError();
    syncHash(draft);
    this.elements.status.textContent = "searching…";
    try {
      const response = await this.client.search(draft);
      if (response === null) {
        return true; // superseded by a newer submission
      }
      const providers = Object.entries(response.provider_status)
        .map(([id, state]) => `${id}:${state}`)
        .sort()
        .join("  ");
      const warnings = response.warnings.length
        ? ` — ${response.warnings.join("; ")}`
        : "";
      this.renderStatus(
        `${response.items.length} results  (${providers})${warnings}`,
        response.run_id,
      );
      renderResults(this.elements.results, response, (item, trigger) =>
        this.openPreview(item, trigger),
      );
      this.closePreview(false);
      return true;
    } catch (error) {
      const detail =
        error instanceof SearchApiError
          ? `${error.status}: ${error.message}`
          : String(error);
      this.elements.status.textContent = "";
      this.showError(`Search failed — ${detail}`);
      return false;
    }
  }

  private renderStatus(text: string, runId?: string): void {
    const status = this.elements.status;
    status.innerHTML = "";
    status.appendChild(document.createTextNode(text));
    if (!runId) return;
    const load = document.createElement("button");
    load.type = "button";
    load.className = "run-link";
    load.dataset.role = "load-run";
    load.dataset.runId = runId;
    load.textContent = `reload stored run ${runId.slice(0, 12)}…`;
    load.addEventListener("click", () => {
      void this.loadRun(runId);
    });
    status.appendChild(load);
  }

  /** Re-render the list from the persisted run record (server authority). */
  async loadRun(runId: string): Promise<void> {
    try {
      const record = await this.client.getRun(runId);
      renderResults(this.elements.results, record.results, (item, trigger) =>
        this.openPreview(item, trigger),
      );
      this.renderStatus(`stored run ${runId.slice(0, 12)}… (${record.results.items.length} results)`);
    } catch (error) {
      const detail =
        error instanceof SearchApiError
          ? `${error.status}: ${error.message}`
          : String(error);
      this.showError(`Could not load run — ${detail}`);
    }
  }

  openPreview(item: RankedItemJson, trigger: HTMLElement): void {
    this.previewReturn = { trigger, scrollY: window.scrollY };
    renderPreview(this.elements.preview, item);
    this.elements.preview.hidden = false;
    this.elements.preview
      .querySelector<HTMLButtonElement>('[data-role="preview-close"]')
      ?.addEventListener("click", () => this.closePreview(true));
  }

  closePreview(restoreFocus: boolean): void {
    this.elements.preview.hidden = true;
    this.elements.preview.innerHTML = "";
    if (restoreFocus && this.previewReturn) {
      const { trigger, scrollY } = this.previewReturn;
      trigger.focus();
      window.scrollTo(0, scrollY);
    }
    this.previewReturn = null;
  }
}

export function boot(): App {
  return new App(document);
}

// The page opts in via <body data-autoboot="true">; tests construct App themselves.
if (typeof document !== "undefined") {
  const autoboot = () => {
    if (document.body?.dataset.autoboot === "true") {
      boot();
    }
  };
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", autoboot);
  } else {
    autoboot();
  }
}
