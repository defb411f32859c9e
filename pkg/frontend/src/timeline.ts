/**
 * Pure layout math for the zoomable time axis: scales, tick generation, and
 * the per-event placement the renderer draws. No DOM in here.
 */

import { EventDoc } from './types.js';
import { ViewWindow } from './state.js';

/** Stable source order, matching the merge order of the timeline CSV. */
export const SOURCE_ORDER = ['jitmf', 'message_db', 'wal', 'logcat', 'filestat'] as const;

export const SOURCE_COLORS: Record<string, string> = {
  jitmf: '#7c3aed',
  message_db: '#2563eb',
  wal: '#dc2626',
  logcat: '#059669',
  filestat: '#d97706',
};

export const FALLBACK_COLOR = '#6b7280';

export function sourceColor(source: string): string {
  return SOURCE_COLORS[source] ?? FALLBACK_COLOR;
}

export function timeToX(view: ViewWindow, width: number, t: number): number {
  return ((t - view.t0) / (view.t1 - view.t0)) * width;
}

export function xToTime(view: ViewWindow, width: number, x: number): number {
  return view.t0 + (x / width) * (view.t1 - view.t0);
}

export interface Tick {
  t: number;
  label: string;
}

/** mm:ss for a minute or more, otherwise seconds with the unit spelled. */
export function formatTime(t: number): string {
  if (Math.abs(t) >= 60) {
    const sign = t < 0 ? '-' : '';
    const abs = Math.abs(t);
    const minutes = Math.floor(abs / 60);
    const seconds = abs - minutes * 60;
    return `${sign}${minutes}:${seconds.toFixed(0).padStart(2, '0')}`;
  }
  const rounded = Math.round(t * 10) / 10;
  return `${Number.isInteger(rounded) ? rounded.toFixed(0) : rounded.toFixed(1)}s`;
}

/** A 1/2/5-step tick size that yields at most `maxTicks` ticks. */
export function tickStep(spanS: number, maxTicks: number): number {
  const raw = spanS / Math.max(maxTicks, 1);
  const power = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const mult of [1, 2, 5, 10]) {
    if (power * mult >= raw) return power * mult;
  }
  return power * 10;
}

export function ticks(view: ViewWindow, maxTicks = 10): Tick[] {
  const step = tickStep(view.t1 - view.t0, maxTicks);
  const first = Math.ceil(view.t0 / step) * step;
  const out: Tick[] = [];
  for (let t = first; t <= view.t1 + 1e-9; t += step) {
    const snapped = Math.round(t / step) * step;
    out.push({ t: snapped, label: formatTime(snapped) });
  }
  return out;
}

export interface PlacedEvent {
  event: EventDoc;
  x: number;
  lane: number;
}

/**
 * Place the events that fall inside the window. Lanes group by source in
 * the stable order, with unknown sources after the known ones.
 */
export function layout(events: EventDoc[], view: ViewWindow, width: number): PlacedEvent[] {
  const laneOf = new Map<string, number>(SOURCE_ORDER.map((s, i) => [s, i]));
  let nextLane = SOURCE_ORDER.length;
  const placed: PlacedEvent[] = [];
  for (const event of events) {
    if (event.time < view.t0 || event.time > view.t1) continue;
    let lane = laneOf.get(event.source);
    if (lane === undefined) {
      lane = nextLane++;
      laneOf.set(event.source, lane);
    }
    placed.push({ event, x: timeToX(view, width, event.time), lane });
  }
  return placed;
}

/**
 * The identity a CLI query line prints for an event: time to microsecond
 * text, source, type, subject, object. Two events with equal keys are the
 * same evidence.
 */
export function tupleKey(event: EventDoc): string {
  return [event.time.toFixed(6), event.source, event.event_type, event.subject, event.object].join(
    '\t',
  );
}

/** Identity without the source, for present-in-jitmf-only comparisons. */
export function contentKey(event: EventDoc): string {
  return [event.time.toFixed(6), event.event_type, event.subject, event.object].join('\t');
}
