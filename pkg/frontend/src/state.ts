/**
 * View state and its transitions. Everything here is pure: each transition
 * takes a state and returns a new one, so the pivot history can hold full
 * snapshots and `back` restores the prior query, result, and time window
 * exactly, not approximately.
 */

import {
  CompareResponse,
  CorrelateResponse,
  CorrelationMode,
  EventDoc,
  ModelName,
  SeedEvent,
} from './types.js';

/** Visible time window in seconds. */
export interface ViewWindow {
  t0: number;
  t1: number;
}

export interface QueryState {
  runId: string;
  model: ModelName;
  mode: CorrelationMode;
  seed: SeedEvent;
}

export interface ResultState {
  events: EventDoc[];
  count: number;
}

/** What pivoting saves and back restores. */
export interface Snapshot {
  query: QueryState;
  result: ResultState | null;
  view: ViewWindow;
}

export type PivotFacet = 'subject' | 'object';

export interface ViewState {
  query: QueryState;
  result: ResultState | null;
  view: ViewWindow;
  history: Snapshot[];
  comparison: CompareResponse | null;
  highlightJitmfOnly: boolean;
  error: string | null;
}

export const EMPTY_SEED: SeedEvent = { subject: '', keywords: [], event_type: '' };

const MIN_SPAN_S = 0.05;

function clone<T>(value: T): T {
  return JSON.parse(JSON.stringify(value)) as T;
}

export function initialState(runId: string, clockEndMs = 0): ViewState {
  return {
    query: { runId, model: 'jitmf', mode: 'subject', seed: { ...EMPTY_SEED } },
    result: null,
    view: { t0: 0, t1: Math.max(clockEndMs / 1000, MIN_SPAN_S) },
    history: [],
    comparison: null,
    highlightJitmfOnly: false,
    error: null,
  };
}

export function snapshot(state: ViewState): Snapshot {
  return clone({ query: state.query, result: state.result, view: state.view });
}

// -- query edits -------------------------------------------------------------

export function setRun(_state: ViewState, runId: string, clockEndMs = 0): ViewState {
  // switching runs invalidates everything derived from the old one
  return { ...initialState(runId, clockEndMs) };
}

export function setModel(state: ViewState, model: ModelName): ViewState {
  return { ...state, query: { ...state.query, model } };
}

export function setMode(state: ViewState, mode: CorrelationMode): ViewState {
  return { ...state, query: { ...state.query, mode } };
}

export function editSeed(state: ViewState, patch: Partial<SeedEvent>): ViewState {
  return { ...state, query: { ...state.query, seed: { ...state.query.seed, ...patch } } };
}

// -- results -----------------------------------------------------------------

/** Time window that fits all events with a little padding on each side. */
export function fitWindow(events: EventDoc[], fallbackEndS: number): ViewWindow {
  if (events.length === 0) {
    return { t0: 0, t1: Math.max(fallbackEndS, MIN_SPAN_S) };
  }
  const times = events.map((e) => e.time);
  const lo = Math.min(...times);
  const hi = Math.max(...times);
  const pad = Math.max((hi - lo) * 0.05, MIN_SPAN_S);
  return { t0: lo - pad, t1: hi + pad };
}

export function applyResult(state: ViewState, response: CorrelateResponse): ViewState {
  const result: ResultState = { events: response.events, count: response.count };
  return {
    ...state,
    result,
    view: fitWindow(response.events, state.view.t1),
    error: null,
  };
}

export function applyError(state: ViewState, message: string): ViewState {
  return { ...state, error: message };
}

export function applyComparison(state: ViewState, response: CompareResponse): ViewState {
  return { ...state, comparison: response, error: null };
}

export function toggleHighlight(state: ViewState): ViewState {
  return { ...state, highlightJitmfOnly: !state.highlightJitmfOnly };
}

// -- pivoting ----------------------------------------------------------------

/** Seed pre-filled from a clicked event's subject or object. */
export function seedFromEvent(event: EventDoc, facet: PivotFacet): SeedEvent {
  if (facet === 'subject') {
    return { subject: event.subject, keywords: [], event_type: '' };
  }
  return { subject: '', keywords: [event.object], event_type: '' };
}

/**
 * Push the current state onto the history stack and pre-fill the seed form
 * from the clicked event. The result is cleared: the pivoted query has not
 * run yet, and keeping the old timeline would misattribute it to the new
 * seed.
 */
export function pivot(state: ViewState, event: EventDoc, facet: PivotFacet): ViewState {
  const seed = seedFromEvent(event, facet);
  const mode: CorrelationMode = facet === 'subject' ? 'subject' : 'object';
  return {
    ...state,
    history: [...state.history, snapshot(state)],
    query: { ...state.query, mode, seed },
    result: null,
    error: null,
  };
}

export function canGoBack(state: ViewState): boolean {
  return state.history.length > 0;
}

/** Pop the history stack, restoring the saved query, result, and window. */
export function back(state: ViewState): ViewState {
  if (state.history.length === 0) return state;
  const prior = state.history[state.history.length - 1];
  const restored = clone(prior);
  return {
    ...state,
    query: restored.query,
    result: restored.result,
    view: restored.view,
    history: state.history.slice(0, -1),
    error: null,
  };
}

// -- time window -------------------------------------------------------------

/**
 * Zoom by `factor` (< 1 zooms in) keeping the time under `centerT` fixed,
 * the wheel-at-cursor behaviour.
 */
export function zoomAt(view: ViewWindow, factor: number, centerT: number): ViewWindow {
  const span = Math.max((view.t1 - view.t0) * factor, MIN_SPAN_S);
  const ratio = (centerT - view.t0) / (view.t1 - view.t0);
  const t0 = centerT - span * ratio;
  return { t0, t1: t0 + span };
}

export function pan(view: ViewWindow, deltaT: number): ViewWindow {
  return { t0: view.t0 + deltaT, t1: view.t1 + deltaT };
}

export function setView(state: ViewState, view: ViewWindow): ViewState {
  return { ...state, view };
}
