/**
 * Explorer-vs-CLI parity. The fixture records, for the same run, both the
 * correlate responses the UI consumes and the tab-separated output of the
 * equivalent `query` invocations. An event line is identified by its first
 * five fields (time to microsecond text, source, type, subject, object);
 * the UI must surface exactly that set for every correlation mode, and
 * pivoting away and back must restore the previous screen bit for bit.
 */

import { describe, expect, it } from 'vitest';
import { FixtureClient } from '../src/api.js';
import {
  applyResult,
  back,
  editSeed,
  initialState,
  pivot,
  setMode,
  snapshot,
} from '../src/state.js';
import { tupleKey } from '../src/timeline.js';
import { loadFixture } from './fixture.js';

const fixture = loadFixture();
const client = new FixtureClient(fixture);

function cliKeys(tsv: string): Set<string> {
  return new Set(
    tsv
      .trimEnd()
      .split('\n')
      .map((line) => line.split('\t').slice(0, 5).join('\t')),
  );
}

describe('correlation parity with the CLI', () => {
  it('covers every correlation mode', () => {
    const modes = new Set(fixture.cli_queries.map((q) => q.mode));
    expect(modes).toEqual(new Set(['subject', 'object', 'event_type']));
  });

  for (const query of fixture.cli_queries) {
    it(`mode=${query.mode} seed=${JSON.stringify(query.seed)}`, async () => {
      // drive the same path the seed form takes: edit, submit, apply
      let state = initialState(fixture.run_id, fixture.events_jitmf.clock_end_ms);
      state = setMode(state, query.mode);
      state = editSeed(state, query.seed);
      const doc = await client.correlate(
        fixture.run_id,
        state.query.seed,
        state.query.mode,
        state.query.model,
      );
      state = applyResult(state, doc);

      const shown = new Set(state.result!.events.map(tupleKey));
      const expected = cliKeys(query.tsv);
      expect(shown).toEqual(expected);
      expect(state.result!.count).toBe(expected.size);
    });
  }
});

describe('pivot and back', () => {
  it('restores the pre-pivot query, result, and window exactly', async () => {
    let state = initialState(fixture.run_id, fixture.events_jitmf.clock_end_ms);
    state = editSeed(state, { subject: 'Alice' });
    state = applyResult(
      state,
      await client.correlate(fixture.run_id, state.query.seed, 'subject', 'jitmf'),
    );
    const before = snapshot(state);

    const target = state.result!.events[0];
    expect(target.object).toBe('Sending_Attack_1');
    state = pivot(state, target, 'object');
    expect(state.result).toBeNull();
    expect(state.query.seed).toEqual({
      subject: '',
      keywords: ['Sending_Attack_1'],
      event_type: '',
    });

    state = applyResult(
      state,
      await client.correlate(fixture.run_id, state.query.seed, state.query.mode, 'jitmf'),
    );
    expect(state.result!.count).toBe(1);

    state = back(state);
    expect({ query: state.query, result: state.result, view: state.view }).toEqual(before);
    expect(state.history).toHaveLength(0);
  });
});
