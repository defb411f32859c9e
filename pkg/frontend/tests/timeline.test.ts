import { describe, expect, it } from 'vitest';
import {
  SOURCE_COLORS,
  SOURCE_ORDER,
  contentKey,
  formatTime,
  layout,
  sourceColor,
  ticks,
  tickStep,
  timeToX,
  tupleKey,
  xToTime,
} from '../src/timeline.js';
import { EventDoc } from '../src/types.js';

const VIEW = { t0: 10, t1: 20 };

function ev(time: number, source: string): EventDoc {
  return {
    id: 1,
    time,
    event_type: 'message_sent',
    subject: 'Alice',
    object: 'x',
    source,
    granularity: 'fine',
    raw_ref: '',
    synthetic: false,
  };
}

describe('scales', () => {
  it('maps time to pixels and back', () => {
    expect(timeToX(VIEW, 800, 15)).toBeCloseTo(400);
    expect(xToTime(VIEW, 800, 400)).toBeCloseTo(15);
    expect(xToTime(VIEW, 800, timeToX(VIEW, 800, 13.37))).toBeCloseTo(13.37);
  });
});

describe('formatTime', () => {
  it('spells seconds below a minute', () => {
    expect(formatTime(0)).toBe('0s');
    expect(formatTime(5)).toBe('5s');
    expect(formatTime(2.5)).toBe('2.5s');
  });

  it('uses mm:ss from a minute up', () => {
    expect(formatTime(60)).toBe('1:00');
    expect(formatTime(75)).toBe('1:15');
    expect(formatTime(120.4)).toBe('2:00');
  });
});

describe('ticks', () => {
  it('picks a 1/2/5 step', () => {
    expect(tickStep(100, 10)).toBe(10);
    expect(tickStep(30, 10)).toBe(5);
    expect(tickStep(7, 10)).toBe(1);
  });

  it('stays inside the window and respects the budget', () => {
    const got = ticks({ t0: 0, t1: 100 }, 10);
    expect(got.map((t) => t.t)).toEqual([0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100]);
    for (const tick of got) {
      expect(tick.t).toBeGreaterThanOrEqual(0);
      expect(tick.t).toBeLessThanOrEqual(100);
    }
    expect(ticks({ t0: 3, t1: 9 }, 10).map((t) => t.label)).toEqual([
      '3s',
      '4s',
      '5s',
      '6s',
      '7s',
      '8s',
      '9s',
    ]);
  });
});

describe('layout', () => {
  it('drops events outside the window and lanes by source order', () => {
    const events = [
      ev(9, 'jitmf'),
      ev(12, 'logcat'),
      ev(15, 'jitmf'),
      ev(18, 'message_db'),
      ev(21, 'wal'),
    ];
    const placed = layout(events, VIEW, 1000);
    expect(placed.map((p) => p.event.time)).toEqual([12, 15, 18]);
    expect(placed.map((p) => p.lane)).toEqual([3, 0, 1]);
    expect(placed[1].x).toBeCloseTo(500);
  });

  it('appends unknown sources after the known lanes', () => {
    const placed = layout([ev(15, 'mystery')], VIEW, 1000);
    expect(placed[0].lane).toBe(SOURCE_ORDER.length);
    expect(sourceColor('mystery')).toBe('#6b7280');
  });

  it('has a colour for every known source', () => {
    for (const source of SOURCE_ORDER) {
      expect(SOURCE_COLORS[source]).toMatch(/^#[0-9a-f]{6}$/);
    }
  });
});

describe('event identity keys', () => {
  const event: EventDoc = {
    id: 14,
    time: 44.561,
    event_type: 'message_sent',
    subject: 'Alice',
    object: 'Sending_Attack_1',
    source: 'jitmf',
    granularity: 'fine',
    raw_ref: 'dump-8.json:0',
    synthetic: false,
  };

  it('tupleKey matches the CLI line prefix', () => {
    expect(tupleKey(event)).toBe('44.561000\tjitmf\tmessage_sent\tAlice\tSending_Attack_1');
  });

  it('contentKey drops the source', () => {
    expect(contentKey(event)).toBe('44.561000\tmessage_sent\tAlice\tSending_Attack_1');
  });
});
