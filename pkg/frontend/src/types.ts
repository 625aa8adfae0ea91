/** Wire types mirroring the search API's canonical JSON. */

export type ComponentId = "cnt" | "cxt" | "pop" | "ser";

export const ALL_COMPONENTS: ComponentId[] = ["cnt", "cxt", "pop", "ser"];

export interface ScoreVector {
  s_sew: number;
  s_cnt: number;
  s_st: number;
  s_cc: number;
  s_so: number;
  s_tt: number;
  s_pr: number;
  s_str: number;
  s_pop: number;
  s_cxt: number;
  s_ser: number;
  s_final: number;
}

export interface StackTraceJson {
  raw: string;
  segments: unknown[];
}

export interface PageContentJson {
  body_text: string;
  code_blocks: string[];
  outlinks: string[];
  stack_traces: StackTraceJson[];
}

export interface ResultEntryJson {
  canonical_url: string;
  content: PageContentJson;
  original_urls: string[];
  per_provider_positions: Record<string, number>;
  so_votes: number | null;
  title: string;
  traffic_rank: number | null;
}

export interface RankedItemJson {
  entry: ResultEntryJson;
  rank: number;
  scores: ScoreVector;
}

export interface ScoreConfigJson {
  component_weights: Record<string, number>;
  enabled_components: string[];
  engine_weights: Record<string, number> | null;
  min_final_score: number;
  pagerank_damping: number;
  pagerank_tolerance: number;
}

export interface SearchResponse {
  config_echo: ScoreConfigJson;
  items: RankedItemJson[];
  provider_status: Record<string, string>;
  query: {
    code_context: string | null;
    message: string;
    parsed_trace: StackTraceJson | null;
    raw_stack_trace: string | null;
  };
  run_id: string;
  warnings: string[];
}

export interface ApiError {
  error: string;
  detail: string;
}

/** Stored run as served by GET /api/v1/runs/<run_id>. */
export interface RunRecordJson {
  created_at: number;
  results: Omit<SearchResponse, "run_id" | "warnings">;
  run_id: string;
}

/** Everything needed to reproduce a view; serializable into the URL. */
export interface QueryDraft {
  message: string;
  traceText: string;
  contextText: string;
  selectedComponents: ComponentId[];
  weights: Record<ComponentId, number>;
}

export function defaultDraft(): QueryDraft {
  return {
    message: "",
    traceText: "",
    contextText: "",
    selectedComponents: ["cnt", "cxt", "ser"],
    weights: { cnt: 1, cxt: 1, pop: 1, ser: 1 },
  };
}
