// Person steering: pointer drags set position, wheel or A/D keys set heading.
// Outbound person_pose traffic is coalesced to the bridge tick rate with
// latest-sample-wins semantics, and positions are clamped to the arena.

import { MessageFactory, type PersonPoseMsg } from './protocol';

export const ARENA_HALF_EXTENT = 3.5;
export const SEND_INTERVAL_MS = 1000 / 30;

export function clampToArena(v: number, half: number = ARENA_HALF_EXTENT): number {
  return Math.min(Math.max(v, -half), half);
}

export interface PendingPose {
  x: number;
  y: number;
  heading: number;
}

export class PersonSteering {
  private pending: PendingPose | null = null;
  private lastSent = -Infinity;
  private heading = 0;

  constructor(
    private readonly factory: MessageFactory,
    private readonly half: number = ARENA_HALF_EXTENT,
  ) {}

  /** Adopt the bridge's person heading until the user rotates it. */
  syncHeading(heading: number): void {
    if (this.pending === null) this.heading = heading;
  }

  drag(x: number, y: number): void {
    this.pending = {
      x: clampToArena(x, this.half),
      y: clampToArena(y, this.half),
      heading: this.heading,
    };
  }

  rotate(delta: number, atX: number, atY: number): void {
    this.heading = wrapAngle(this.heading + delta);
    this.pending = {
      x: clampToArena(atX, this.half),
      y: clampToArena(atY, this.half),
      heading: this.heading,
    };
  }

  /**
   * Emit at most one coalesced message per send interval; silence while the
   * user provides no input.
   */
  poll(nowMs: number, simTime: number): PersonPoseMsg | null {
    if (this.pending === null) return null;
    if (nowMs - this.lastSent < SEND_INTERVAL_MS) return null;
    const p = this.pending;
    this.pending = null;
    this.lastSent = nowMs;
    return this.factory.personPose(p.x, p.y, p.heading, simTime);
  }
}

export function wrapAngle(a: number): number {
  if (a > -Math.PI && a <= Math.PI) return a;
  return Math.PI - ((Math.PI - a) % (2 * Math.PI) + 2 * Math.PI) % (2 * Math.PI);
}
