// Client-side store. Pure bookkeeping: the latest world state, a trajectory
// ribbon of recent drone positions, and the last confirmed status. The client
// never simulates anything; rendering reads only what the bridge sent.

import type { StatusMsg, WorldStateMsg } from './protocol';

export const RIBBON_SECONDS = 10;

export interface RibbonPoint {
  t: number;
  x: number;
  y: number;
}

export type Connection = 'connecting' | 'connected' | 'disconnected';

export class ClientStore {
  connection: Connection = 'connecting';
  world: WorldStateMsg | null = null;
  status: StatusMsg | null = null;
  lastError: string | null = null;
  ribbon: RibbonPoint[] = [];

  applyWorld(msg: WorldStateMsg): void {
    this.world = msg;
    this.ribbon.push({ t: msg.t, x: msg.drone.x, y: msg.drone.y });
    const cutoff = msg.t - RIBBON_SECONDS;
    while (this.ribbon.length > 0 && this.ribbon[0].t < cutoff) {
      this.ribbon.shift();
    }
    // a reset moves time backwards; drop the stale ribbon
    if (this.ribbon.length > 1 && this.ribbon[this.ribbon.length - 2].t > msg.t) {
      this.ribbon = [{ t: msg.t, x: msg.drone.x, y: msg.drone.y }];
    }
  }

  applyStatus(msg: StatusMsg): void {
    this.status = msg;
  }

  applyError(message: string): void {
    this.lastError = message;
  }

  setConnection(state: Connection): void {
    this.connection = state;
    if (state !== 'connected') {
      // no stale telemetry while disconnected
      this.world = null;
      this.status = null;
      this.ribbon = [];
    }
  }

  /** Selector state reflects the last confirmed status, never local intent. */
  confirmedController(): string | null {
    return this.status ? this.status.controller : null;
  }
}
