/**
 * Wiring: one mutable state cell, a dispatch that re-renders, and the DOM
 * event handlers that translate clicks into pure state transitions plus
 * read-only API calls.
 *
 * Backend selection: `?demo` loads the recorded fixture (works offline,
 * e.g. when the page is opened from disk); otherwise the API is assumed at
 * the same origin, overridable with `?api=http://host:port`.
 */

import { ApiError, Backend, FixtureClient, HttpClient } from './api.js';
import { jitmfOnlyKeys } from './compare.js';
import {
  applyComparison,
  applyError,
  applyResult,
  back,
  editSeed,
  fitWindow,
  initialState,
  pan,
  pivot,
  setMode,
  setModel,
  setRun,
  setView,
  toggleHighlight,
  ViewState,
  zoomAt,
} from './state.js';
import { xToTime } from './timeline.js';
import {
  renderComparePanel,
  renderEventList,
  renderRunOptions,
  renderSeedForm,
  renderStatus,
  renderTimeline,
} from './render.js';
import { CorrelationMode, EventDoc, ModelName, RunSummary } from './types.js';

const LANE_LABEL_WIDTH = 86;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}

async function makeBackend(): Promise<Backend> {
  const params = new URLSearchParams(location.search);
  if (params.has('demo')) {
    const response = await fetch('./fixtures/demo.json');
    if (!response.ok) throw new Error('demo fixture not found; run scripts/make_demo_fixture.py');
    return new FixtureClient(await response.json());
  }
  return new HttpClient(params.get('api') ?? '');
}

async function boot(): Promise<void> {
  const backend = await makeBackend();
  const runs: RunSummary[] = await backend.listRuns();
  const firstProcessed = runs.find((r) => r.processed) ?? runs[0];
  if (!firstProcessed) {
    el('error').textContent = 'no runs found under the server root';
    el<HTMLElement>('error').hidden = false;
    return;
  }

  let state: ViewState = initialState(firstProcessed.run_id, firstProcessed.clock_end_ms);
  // full event lists per model, fetched once per run for the highlight set
  const highlightCache = new Map<string, Set<string>>();

  function highlightFor(runId: string): Set<string> {
    return highlightCache.get(runId) ?? new Set();
  }

  function render(): void {
    renderRunOptions(el<HTMLSelectElement>('run'), runs, state.query.runId);
    renderSeedForm(state);
    renderStatus(state);
    const highlight = highlightFor(state.query.runId);
    renderTimeline(state, highlight);
    renderEventList(state, highlight, onPivot);
    renderComparePanel(state, highlight.size);
  }

  function dispatch(next: ViewState): void {
    state = next;
    render();
  }

  async function ensureHighlight(runId: string): Promise<void> {
    if (highlightCache.has(runId)) return;
    const [jitmf, baseline] = await Promise.all([
      backend.getEvents(runId, { model: 'jitmf' }),
      backend.getEvents(runId, { model: 'baseline' }),
    ]);
    highlightCache.set(runId, jitmfOnlyKeys(jitmf.events, baseline.events));
  }

  function onPivot(event: EventDoc, facet: 'subject' | 'object'): void {
    dispatch(pivot(state, event, facet));
    void submit();
  }

  async function submit(): Promise<void> {
    try {
      const { runId, seed, mode, model } = state.query;
      const response = await backend.correlate(runId, seed, mode, model);
      dispatch(applyResult(state, response));
    } catch (err) {
      dispatch(applyError(state, describe(err)));
    }
  }

  // -- form handlers ---------------------------------------------------------

  el<HTMLSelectElement>('run').addEventListener('change', (e) => {
    const runId = (e.target as HTMLSelectElement).value;
    const summary = runs.find((r) => r.run_id === runId);
    dispatch(setRun(state, runId, summary?.clock_end_ms ?? 0));
  });
  el<HTMLSelectElement>('mode').addEventListener('change', (e) => {
    dispatch(setMode(state, (e.target as HTMLSelectElement).value as CorrelationMode));
  });
  el<HTMLSelectElement>('model').addEventListener('change', (e) => {
    dispatch(setModel(state, (e.target as HTMLSelectElement).value as ModelName));
  });
  el<HTMLInputElement>('seed-subject').addEventListener('input', (e) => {
    state = editSeed(state, { subject: (e.target as HTMLInputElement).value });
  });
  el<HTMLInputElement>('seed-keywords').addEventListener('input', (e) => {
    const raw = (e.target as HTMLInputElement).value;
    const keywords = raw
      .split(',')
      .map((s) => s.trim())
      .filter((s) => s.length > 0);
    state = editSeed(state, { keywords });
  });
  el<HTMLInputElement>('seed-event-type').addEventListener('input', (e) => {
    state = editSeed(state, { event_type: (e.target as HTMLInputElement).value });
  });
  el<HTMLFormElement>('seed-form').addEventListener('submit', (e) => {
    e.preventDefault();
    void submit();
  });
  el<HTMLButtonElement>('back').addEventListener('click', () => dispatch(back(state)));

  // -- timeline zoom and pan ---------------------------------------------------

  const svg = el<HTMLElement>('timeline') as unknown as SVGSVGElement;
  svg.addEventListener('wheel', (e) => {
    e.preventDefault();
    const width = Math.max(svg.clientWidth - LANE_LABEL_WIDTH, 1);
    const rect = svg.getBoundingClientRect();
    const centerT = xToTime(state.view, width, e.clientX - rect.left - LANE_LABEL_WIDTH);
    dispatch(setView(state, zoomAt(state.view, e.deltaY < 0 ? 0.8 : 1.25, centerT)));
  });
  let dragFromX: number | null = null;
  svg.addEventListener('pointerdown', (e) => {
    dragFromX = e.clientX;
    svg.setPointerCapture(e.pointerId);
  });
  svg.addEventListener('pointermove', (e) => {
    if (dragFromX === null) return;
    const width = Math.max(svg.clientWidth - LANE_LABEL_WIDTH, 1);
    const spanPerPx = (state.view.t1 - state.view.t0) / width;
    dispatch(setView(state, pan(state.view, (dragFromX - e.clientX) * spanPerPx)));
    dragFromX = e.clientX;
  });
  svg.addEventListener('pointerup', () => {
    dragFromX = null;
  });
  el<HTMLButtonElement>('fit').addEventListener('click', () => {
    dispatch(setView(state, fitWindow(state.result?.events ?? [], state.view.t1)));
  });

  // -- comparison panel ----------------------------------------------------------

  el<HTMLButtonElement>('load-compare').addEventListener('click', async () => {
    try {
      await ensureHighlight(state.query.runId);
      const response = await backend.compare(state.query.runId);
      dispatch(applyComparison(state, response));
    } catch (err) {
      dispatch(applyError(state, describe(err)));
    }
  });
  el<HTMLInputElement>('highlight-only').addEventListener('change', async () => {
    try {
      await ensureHighlight(state.query.runId);
      dispatch(toggleHighlight(state));
    } catch (err) {
      dispatch(applyError(state, describe(err)));
    }
  });

  render();
}

boot().catch((err) => {
  const banner = document.getElementById('error');
  if (banner) {
    banner.textContent = describe(err);
    (banner as HTMLElement).hidden = false;
  }
});
