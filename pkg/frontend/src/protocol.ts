// Wire protocol of the simulation bridge: one JSON object per text frame,
// every message tagged and carrying a monotonically increasing sequence
// number. Field names are part of the contract with the backend.

export interface PersonPoseMsg {
  tag: 'person_pose';
  seq: number;
  x: number;
  y: number;
  heading: number;
  t: number;
}

export interface SelectControllerMsg {
  tag: 'select_controller';
  seq: number;
  kind: string;
}

export interface ResetMsg {
  tag: 'reset';
  seq: number;
  scenario: string;
}

export type OutboundMsg = PersonPoseMsg | SelectControllerMsg | ResetMsg;

export interface DroneState {
  x: number;
  y: number;
  z: number;
  heading: number;
  vx: number;
  vy: number;
  vz: number;
}

export interface PersonPose {
  x: number;
  y: number;
  z: number;
  heading: number;
}

export interface WorldStateMsg {
  tag: 'world_state';
  seq: number;
  t: number;
  drone: DroneState;
  person: PersonPose;
  u_commanded: [number, number, number, number];
  s_pose_true: [number, number, number, number];
  s_pose_estimated: [number, number, number, number] | null;
}

export interface StatusMsg {
  tag: 'status';
  seq: number;
  tick_rate: number;
  controller: string;
}

export interface ErrorMsg {
  tag: 'error';
  seq: number;
  message: string;
}

export type InboundMsg = WorldStateMsg | StatusMsg | ErrorMsg;

export const CONTROLLER_KINDS = ['groundtruth', 'a1', 'a2', 'a3'] as const;
export const SCENARIOS = ['still', 'approach_0', 'approach_45', 'approach_90', 'scripted'] as const;

const isNum = (v: unknown): v is number => typeof v === 'number' && Number.isFinite(v);

/** Parse one inbound frame; returns null for anything malformed or unknown. */
export function parseInbound(raw: string): InboundMsg | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== 'object' || msg === null) return null;
  const m = msg as Record<string, unknown>;
  if (!isNum(m.seq)) return null;
  switch (m.tag) {
    case 'world_state': {
      const drone = m.drone as Record<string, unknown> | undefined;
      const person = m.person as Record<string, unknown> | undefined;
      if (!drone || !person || !isNum(m.t)) return null;
      const droneOk = ['x', 'y', 'z', 'heading', 'vx', 'vy', 'vz'].every((k) => isNum(drone[k]));
      const personOk = ['x', 'y', 'z', 'heading'].every((k) => isNum(person[k]));
      const u = m.u_commanded;
      const s = m.s_pose_true;
      const est = m.s_pose_estimated;
      if (!droneOk || !personOk) return null;
      if (!Array.isArray(u) || u.length !== 4 || !u.every(isNum)) return null;
      if (!Array.isArray(s) || s.length !== 4 || !s.every(isNum)) return null;
      if (est !== null && (!Array.isArray(est) || est.length !== 4 || !est.every(isNum))) return null;
      return m as unknown as WorldStateMsg;
    }
    case 'status':
      if (!isNum(m.tick_rate) || typeof m.controller !== 'string') return null;
      return m as unknown as StatusMsg;
    case 'error':
      if (typeof m.message !== 'string') return null;
      return m as unknown as ErrorMsg;
    default:
      return null;
  }
}

/** Outbound message builder that owns the client-side sequence counter. */
export class MessageFactory {
  private seq = 0;

  next(): number {
    this.seq += 1;
    return this.seq;
  }

  personPose(x: number, y: number, heading: number, t: number): PersonPoseMsg {
    return { tag: 'person_pose', seq: this.next(), x, y, heading, t };
  }

  selectController(kind: string): SelectControllerMsg {
    return { tag: 'select_controller', seq: this.next(), kind };
  }

  reset(scenario: string): ResetMsg {
    return { tag: 'reset', seq: this.next(), scenario };
  }
}
