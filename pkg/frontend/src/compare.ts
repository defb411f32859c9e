/**
 * Comparison-panel data: table rows mirroring the report CSV, and the set
 * of events only the dump-backed timeline contains.
 */

import { CompareResponse, EventDoc } from './types.js';
import { contentKey } from './timeline.js';

/** '-' for an undefined ratio, six decimals otherwise, like the CSV. */
export function formatRatio(value: number | null): string {
  return value === null ? '-' : value.toFixed(6);
}

export interface CompareRow {
  source: string;
  criteria: string;
  generated: number;
  truth: number;
  matched: number;
  precision: string;
  recall: string;
  jaccard: string;
  kendall_raw: number;
  kendall_norm: string;
  dev_mean_s: string;
  dev_max_s: string;
}

export const COMPARE_COLUMNS: Array<keyof CompareRow> = [
  'source',
  'criteria',
  'generated',
  'truth',
  'matched',
  'precision',
  'recall',
  'jaccard',
  'kendall_raw',
  'kendall_norm',
  'dev_mean_s',
  'dev_max_s',
];

export function compareRows(response: CompareResponse): CompareRow[] {
  const order = ['jitmf', 'baseline'];
  const labels = Object.keys(response.sources).sort(
    (a, b) => (order.indexOf(a) + 1 || 99) - (order.indexOf(b) + 1 || 99),
  );
  return labels.map((label) => {
    const comp = response.sources[label];
    return {
      source: label,
      criteria: comp.criteria,
      generated: comp.generated,
      truth: comp.truth,
      matched: comp.matched,
      precision: formatRatio(comp.precision),
      recall: formatRatio(comp.recall),
      jaccard: comp.jaccard.toFixed(6),
      kendall_raw: comp.kendall_raw,
      kendall_norm: comp.kendall_norm.toFixed(6),
      dev_mean_s: comp.deviation.mean_s.toFixed(6),
      dev_max_s: comp.deviation.max_s.toFixed(6),
    };
  });
}

/**
 * Content keys present in the jitmf timeline but absent from the baseline:
 * the evidence a conventional acquisition of this run would never show.
 */
export function jitmfOnlyKeys(jitmfEvents: EventDoc[], baselineEvents: EventDoc[]): Set<string> {
  const baseline = new Set(baselineEvents.map(contentKey));
  const only = new Set<string>();
  for (const event of jitmfEvents) {
    const key = contentKey(event);
    if (!baseline.has(key)) only.add(key);
  }
  return only;
}
