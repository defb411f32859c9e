/**
 * DOM rendering. Everything visual is rebuilt from the current ViewState on
 * each dispatch; the pure layers (state, timeline, compare) decide what to
 * draw and this module only draws it.
 */

import { CompareRow, COMPARE_COLUMNS, compareRows } from './compare.js';
import { canGoBack, ViewState } from './state.js';
import {
  contentKey,
  formatTime,
  layout,
  sourceColor,
  ticks,
  timeToX,
} from './timeline.js';
import { EventDoc, RunSummary } from './types.js';

export type PivotHandler = (event: EventDoc, facet: 'subject' | 'object') => void;

const AXIS_HEIGHT = 24;
const LANE_HEIGHT = 26;
const LANE_LABEL_WIDTH = 86;

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function renderRunOptions(
  select: HTMLSelectElement,
  runs: RunSummary[],
  selected: string,
): void {
  select.innerHTML = runs
    .map((run) => {
      const flag = run.processed ? '' : ' (unprocessed)';
      const chosen = run.run_id === selected ? ' selected' : '';
      return `<option value="${escapeHtml(run.run_id)}"${chosen}>${escapeHtml(run.run_id)}${flag}</option>`;
    })
    .join('');
}

export function renderSeedForm(state: ViewState): void {
  (document.getElementById('seed-subject') as HTMLInputElement).value = state.query.seed.subject;
  (document.getElementById('seed-keywords') as HTMLInputElement).value =
    state.query.seed.keywords.join(', ');
  (document.getElementById('seed-event-type') as HTMLInputElement).value =
    state.query.seed.event_type;
  (document.getElementById('mode') as HTMLSelectElement).value = state.query.mode;
  (document.getElementById('model') as HTMLSelectElement).value = state.query.model;
  const backButton = document.getElementById('back') as HTMLButtonElement;
  backButton.disabled = !canGoBack(state);
  backButton.textContent = canGoBack(state) ? `back (${state.history.length})` : 'back';
}

export function renderStatus(state: ViewState): void {
  const banner = document.getElementById('error') as HTMLElement;
  banner.textContent = state.error ?? '';
  banner.hidden = !state.error;
}

export function renderTimeline(state: ViewState, highlight: Set<string>): void {
  const svg = document.getElementById('timeline') as unknown as SVGSVGElement;
  const width = Math.max(svg.clientWidth || 800, 300) - LANE_LABEL_WIDTH;
  const events = state.result?.events ?? [];
  const placed = layout(events, state.view, width);
  const laneCount = Math.max(5, ...placed.map((p) => p.lane + 1));
  const height = AXIS_HEIGHT + laneCount * LANE_HEIGHT + 8;
  svg.setAttribute('height', String(height));

  const parts: string[] = [];
  // axis
  for (const tick of ticks(state.view, Math.floor(width / 90))) {
    const x = LANE_LABEL_WIDTH + timeToX(state.view, width, tick.t);
    parts.push(
      `<line class="tick" x1="${x}" y1="${AXIS_HEIGHT - 6}" x2="${x}" y2="${height}"></line>`,
      `<text class="tick-label" x="${x}" y="${AXIS_HEIGHT - 10}" text-anchor="middle">${escapeHtml(tick.label)}</text>`,
    );
  }
  // lane labels and separators
  const laneNames = new Map<number, string>();
  for (const p of placed) laneNames.set(p.lane, p.event.source);
  for (let lane = 0; lane < laneCount; lane++) {
    const y = AXIS_HEIGHT + lane * LANE_HEIGHT;
    const name = laneNames.get(lane) ?? '';
    parts.push(`<line class="lane" x1="${LANE_LABEL_WIDTH}" y1="${y}" x2="${LANE_LABEL_WIDTH + width}" y2="${y}"></line>`);
    if (name) {
      parts.push(
        `<text class="lane-label" x="4" y="${y + LANE_HEIGHT / 2 + 4}" fill="${sourceColor(name)}">${escapeHtml(name)}</text>`,
      );
    }
  }
  // events: solid dot for fine granularity, hollow for coarse, ring when
  // the entry exists only in the jitmf timeline
  for (const p of placed) {
    const cx = LANE_LABEL_WIDTH + p.x;
    const cy = AXIS_HEIGHT + p.lane * LANE_HEIGHT + LANE_HEIGHT / 2;
    const color = sourceColor(p.event.source);
    const fill = p.event.granularity === 'fine' ? color : 'none';
    const only = state.highlightJitmfOnly && highlight.has(contentKey(p.event));
    const cls = only ? 'event only' : 'event';
    const title = `${formatTime(p.event.time)} ${p.event.event_type} ${p.event.subject} ${p.event.object}`;
    parts.push(
      `<circle class="${cls}" cx="${cx}" cy="${cy}" r="${only ? 7 : 5}" fill="${fill}" stroke="${color}"><title>${escapeHtml(title)}</title></circle>`,
    );
    if (p.event.synthetic) {
      parts.push(`<circle class="synthetic" cx="${cx}" cy="${cy}" r="10" stroke="${color}"></circle>`);
    }
  }
  svg.innerHTML = parts.join('');
}

export function renderEventList(
  state: ViewState,
  highlight: Set<string>,
  onPivot: PivotHandler,
): void {
  const container = document.getElementById('events') as HTMLElement;
  const counter = document.getElementById('event-count') as HTMLElement;
  if (!state.result) {
    container.innerHTML = '<p class="placeholder">Submit a seed event to correlate.</p>';
    counter.textContent = '';
    return;
  }
  counter.textContent = `${state.result.count} event${state.result.count === 1 ? '' : 's'}`;
  if (state.result.count === 0) {
    container.innerHTML = '<p class="no-events">No events matched this seed.</p>';
    return;
  }
  const rows = state.result.events
    .map((event, index) => {
      const only = state.highlightJitmfOnly && highlight.has(contentKey(event));
      const badge = `<span class="badge ${event.granularity}">${event.granularity}</span>`;
      const synthetic = event.synthetic ? '<span class="badge synthetic-badge">derived</span>' : '';
      const chip = `<span class="chip" style="background:${sourceColor(event.source)}">${escapeHtml(event.source)}</span>`;
      return `<tr class="${only ? 'only-row' : ''}" data-index="${index}">
        <td class="num">${event.time.toFixed(3)}</td>
        <td>${chip}</td>
        <td>${escapeHtml(event.event_type)}${synthetic}</td>
        <td>${escapeHtml(event.subject)}</td>
        <td class="object">${escapeHtml(event.object)}</td>
        <td>${badge}</td>
        <td class="pivots">
          <button data-pivot="subject" data-index="${index}" ${event.subject ? '' : 'disabled'}>subject</button>
          <button data-pivot="object" data-index="${index}" ${event.object ? '' : 'disabled'}>object</button>
        </td>
      </tr>`;
    })
    .join('');
  container.innerHTML = `<table class="event-table">
    <thead><tr><th>time (s)</th><th>source</th><th>type</th><th>subject</th><th>object</th><th></th><th>pivot</th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
  container.querySelectorAll<HTMLButtonElement>('button[data-pivot]').forEach((button) => {
    button.addEventListener('click', () => {
      const index = Number(button.dataset.index);
      const facet = button.dataset.pivot as 'subject' | 'object';
      const events = state.result?.events ?? [];
      if (events[index]) onPivot(events[index], facet);
    });
  });
}

function compareCell(row: CompareRow, column: keyof CompareRow): string {
  return escapeHtml(String(row[column]));
}

export function renderComparePanel(state: ViewState, highlightCount: number): void {
  const container = document.getElementById('compare') as HTMLElement;
  if (!state.comparison) {
    container.innerHTML = '<p class="placeholder">Load the comparison to score this run.</p>';
    return;
  }
  const rows = compareRows(state.comparison);
  const header = COMPARE_COLUMNS.map((c) => `<th>${c}</th>`).join('');
  const body = rows
    .map(
      (row) =>
        `<tr class="${row.source === 'jitmf' ? 'jitmf-row' : ''}">${COMPARE_COLUMNS.map(
          (column) => `<td>${compareCell(row, column)}</td>`,
        ).join('')}</tr>`,
    )
    .join('');
  const note = state.highlightJitmfOnly
    ? `<p class="note">${highlightCount} timeline entries exist only with dumps enabled.</p>`
    : '';
  container.innerHTML = `<div class="table-scroll"><table class="compare-table">
    <thead><tr>${header}</tr></thead><tbody>${body}</tbody>
  </table></div>${note}`;
}
