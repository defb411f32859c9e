/**
 * Shapes of the documents the runs API serves. Field names mirror the CSV
 * schemas on the other side, so nothing here renames anything.
 */

export type CorrelationMode = 'subject' | 'object' | 'event_type';
export type ModelName = 'jitmf' | 'baseline';
export type Granularity = 'fine' | 'coarse';

export interface EventDoc {
  id: number;
  time: number;
  event_type: string;
  subject: string;
  object: string;
  source: string;
  granularity: Granularity;
  raw_ref: string;
  synthetic: boolean;
}

export interface RunSummary {
  run_id: string;
  scenario_id: string;
  app_model: string;
  attack_kind: string;
  seed: number | null;
  clock_end_ms: number;
  processed: boolean;
}

export interface SeedEvent {
  subject: string;
  keywords: string[];
  event_type: string;
}

export interface EventsResponse {
  run_id: string;
  clock_end_ms: number;
  count: number;
  events: EventDoc[];
}

export interface CorrelateResponse {
  run_id: string;
  mode: CorrelationMode;
  seed: SeedEvent;
  count: number;
  events: EventDoc[];
}

export interface DeviationDoc {
  mean_s: number;
  stdev_s: number;
  max_s: number;
  count: number;
}

export interface MatchPairDoc {
  truth_ts_ms: number;
  truth_object: string;
  generated_time: number;
  generated_event_type: string;
  deviation_s: number;
}

export interface ComparisonDoc {
  criteria: string;
  generated: number;
  truth: number;
  matched: number;
  precision: number | null;
  recall: number | null;
  jaccard: number;
  kendall_raw: number;
  kendall_norm: number;
  deviation: DeviationDoc;
  pairs: MatchPairDoc[];
}

export interface CompareResponse {
  run_id: string;
  mode: string;
  criteria: string;
  sources: Record<string, ComparisonDoc>;
}

/** Error body every non-2xx API response carries. */
export interface ApiErrorDoc {
  error: { code: string; message: string };
}
