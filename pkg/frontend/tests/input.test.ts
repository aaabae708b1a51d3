import { describe, expect, it } from 'vitest';

import { PersonSteering, clampToArena, wrapAngle } from '../src/input';
import { MessageFactory } from '../src/protocol';

describe('clampToArena', () => {
  it('passes interior points through', () => {
    expect(clampToArena(1.2)).toBe(1.2);
  });

  it('clamps to the boundary', () => {
    expect(clampToArena(99)).toBe(3.5);
    expect(clampToArena(-99)).toBe(-3.5);
  });
});

describe('wrapAngle', () => {
  it('wraps into (-pi, pi]', () => {
    expect(wrapAngle(3 * Math.PI)).toBeCloseTo(Math.PI, 12);
    expect(wrapAngle(-Math.PI)).toBeCloseTo(Math.PI, 12);
    expect(wrapAngle(0.3)).toBe(0.3);
  });
});

describe('PersonSteering', () => {
  it('stays silent without input', () => {
    const s = new PersonSteering(new MessageFactory());
    expect(s.poll(0, 0)).toBeNull();
    expect(s.poll(1000, 1)).toBeNull();
  });

  it('coalesces drags to one message per interval, latest wins', () => {
    const s = new PersonSteering(new MessageFactory());
    s.drag(0.1, 0.1);
    s.drag(0.2, 0.2);
    s.drag(0.3, 0.3);
    const first = s.poll(100, 0.5);
    expect(first?.x).toBeCloseTo(0.3);
    // nothing pending, and too soon anyway
    expect(s.poll(101, 0.5)).toBeNull();
    s.drag(0.4, 0.4);
    // still inside the send interval: held back
    expect(s.poll(110, 0.6)).toBeNull();
    const second = s.poll(140, 0.7);
    expect(second?.x).toBeCloseTo(0.4);
  });

  it('clamps dragged positions to the arena', () => {
    const s = new PersonSteering(new MessageFactory());
    s.drag(50, -50);
    const msg = s.poll(0, 0);
    expect(msg?.x).toBe(3.5);
    expect(msg?.y).toBe(-3.5);
  });

  it('rotation emits a pose at the person position with the new heading', () => {
    const s = new PersonSteering(new MessageFactory());
    s.syncHeading(1.0);
    s.rotate(0.5, 0.2, -0.1);
    const msg = s.poll(0, 0);
    expect(msg?.heading).toBeCloseTo(1.5);
    expect(msg?.x).toBeCloseTo(0.2);
  });

  it('syncHeading only applies while idle', () => {
    const s = new PersonSteering(new MessageFactory());
    s.syncHeading(1.0);
    s.rotate(0.2, 0, 0);
    s.syncHeading(-2.0); // ignored: a rotation is pending
    const msg = s.poll(0, 0);
    expect(msg?.heading).toBeCloseTo(1.2);
  });
});
