/**
 * Clients for the runs API. `HttpClient` talks to a live server;
 * `FixtureClient` replays the recorded demo dataset so the UI works offline.
 * Both are read-only by construction: the only POST is `correlate`, which
 * mutates nothing server-side.
 */

import {
  CompareResponse,
  CorrelateResponse,
  CorrelationMode,
  EventDoc,
  EventsResponse,
  ModelName,
  RunSummary,
  SeedEvent,
} from './types.js';

export interface EventFilter {
  model?: ModelName;
  subject?: string;
  keywords?: string[];
  event_type?: string;
  source?: string;
  granularity?: string;
  since?: number;
  until?: number;
  limit?: number;
}

export interface CompareOptions {
  sources?: 'jitmf' | 'baseline' | 'both';
  mode?: CorrelationMode;
  criteria?: string;
}

export interface Backend {
  listRuns(): Promise<RunSummary[]>;
  getEvents(runId: string, filter?: EventFilter): Promise<EventsResponse>;
  correlate(
    runId: string,
    seed: SeedEvent,
    mode: CorrelationMode,
    model: ModelName,
  ): Promise<CorrelateResponse>;
  compare(runId: string, options?: CompareOptions): Promise<CompareResponse>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

function eventsQuery(filter: EventFilter): string {
  const params = new URLSearchParams();
  if (filter.model) params.set('model', filter.model);
  if (filter.subject) params.set('subject', filter.subject);
  for (const kw of filter.keywords ?? []) params.append('keyword', kw);
  if (filter.event_type) params.set('event_type', filter.event_type);
  if (filter.source) params.set('source', filter.source);
  if (filter.granularity) params.set('granularity', filter.granularity);
  if (filter.since !== undefined) params.set('since', String(filter.since));
  if (filter.until !== undefined) params.set('until', String(filter.until));
  if (filter.limit !== undefined) params.set('limit', String(filter.limit));
  const text = params.toString();
  return text ? `?${text}` : '';
}

export class HttpClient implements Backend {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const err = body?.error ?? { code: 'error', message: `HTTP ${response.status}` };
      throw new ApiError(response.status, err.code, err.message);
    }
    return body as T;
  }

  async listRuns(): Promise<RunSummary[]> {
    const doc = await this.request<{ runs: RunSummary[] }>('/runs');
    return doc.runs;
  }

  getEvents(runId: string, filter: EventFilter = {}): Promise<EventsResponse> {
    return this.request(`/runs/${encodeURIComponent(runId)}/events${eventsQuery(filter)}`);
  }

  correlate(
    runId: string,
    seed: SeedEvent,
    mode: CorrelationMode,
    model: ModelName,
  ): Promise<CorrelateResponse> {
    return this.request(`/runs/${encodeURIComponent(runId)}/correlate`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ seed, mode, model }),
    });
  }

  compare(runId: string, options: CompareOptions = {}): Promise<CompareResponse> {
    const params = new URLSearchParams();
    if (options.sources) params.set('sources', options.sources);
    if (options.mode) params.set('mode', options.mode);
    if (options.criteria) params.set('criteria', options.criteria);
    const query = params.toString();
    return this.request(`/runs/${encodeURIComponent(runId)}/compare${query ? `?${query}` : ''}`);
  }
}

// ---------------------------------------------------------------------------
// offline fixture

/** Shape of fixtures/demo.json, as written by the recording script. */
export interface DemoFixture {
  run_id: string;
  runs: { runs: RunSummary[] };
  run_detail: Record<string, unknown>;
  events_jitmf: EventsResponse;
  events_baseline: EventsResponse;
  correlates: Array<{
    request: { model: ModelName; mode: CorrelationMode; seed: SeedEvent };
    response: CorrelateResponse;
  }>;
  compare: CompareResponse;
  cli_queries: Array<{ mode: CorrelationMode; seed: SeedEvent; tsv: string }>;
}

function sameSeed(a: SeedEvent, b: SeedEvent): boolean {
  return (
    a.subject === b.subject &&
    a.event_type === b.event_type &&
    a.keywords.length === b.keywords.length &&
    a.keywords.every((kw, i) => kw === b.keywords[i])
  );
}

function matchesFilter(event: EventDoc, filter: EventFilter): boolean {
  if (filter.subject && event.subject !== filter.subject) return false;
  if (filter.event_type && event.event_type !== filter.event_type) return false;
  if (filter.source && event.source !== filter.source) return false;
  if (filter.granularity && event.granularity !== filter.granularity) return false;
  if (filter.since !== undefined && event.time < filter.since) return false;
  if (filter.until !== undefined && event.time > filter.until) return false;
  for (const kw of filter.keywords ?? []) {
    if (!event.object.includes(kw)) return false;
  }
  return true;
}

/**
 * Serves the recorded demo run. Event filtering is reimplemented locally
 * over the full recorded event list; correlation only answers the recorded
 * (seed, mode, model) requests, anything else is an explicit error rather
 * than a silently wrong answer.
 */
export class FixtureClient implements Backend {
  constructor(private readonly fixture: DemoFixture) {}

  listRuns(): Promise<RunSummary[]> {
    return Promise.resolve(this.fixture.runs.runs);
  }

  getEvents(runId: string, filter: EventFilter = {}): Promise<EventsResponse> {
    if (runId !== this.fixture.run_id) {
      return Promise.reject(new ApiError(404, 'not_found', `no run named '${runId}'`));
    }
    const base =
      (filter.model ?? 'jitmf') === 'jitmf'
        ? this.fixture.events_jitmf
        : this.fixture.events_baseline;
    let events = base.events.filter((e) => matchesFilter(e, filter));
    if (filter.limit !== undefined) events = events.slice(0, filter.limit);
    return Promise.resolve({
      run_id: base.run_id,
      clock_end_ms: base.clock_end_ms,
      count: events.length,
      events,
    });
  }

  correlate(
    runId: string,
    seed: SeedEvent,
    mode: CorrelationMode,
    model: ModelName,
  ): Promise<CorrelateResponse> {
    if (runId !== this.fixture.run_id) {
      return Promise.reject(new ApiError(404, 'not_found', `no run named '${runId}'`));
    }
    const hit = this.fixture.correlates.find(
      (c) => c.request.mode === mode && c.request.model === model && sameSeed(c.request.seed, seed),
    );
    if (!hit) {
      return Promise.reject(
        new ApiError(
          400,
          'bad_request',
          `demo fixture has no recorded correlation for mode=${mode} seed=${JSON.stringify(seed)}`,
        ),
      );
    }
    return Promise.resolve(hit.response);
  }

  compare(runId: string, options: CompareOptions = {}): Promise<CompareResponse> {
    if (runId !== this.fixture.run_id) {
      return Promise.reject(new ApiError(404, 'not_found', `no run named '${runId}'`));
    }
    if (options.criteria && options.criteria !== this.fixture.compare.criteria) {
      return Promise.reject(
        new ApiError(400, 'bad_request', 'demo fixture only records the default criteria'),
      );
    }
    return Promise.resolve(this.fixture.compare);
  }
}
