// Control panel: controller selector, scenario resets, telemetry readout.
// The selector shows only what the bridge has confirmed via status messages;
// optimistic local state would lie whenever a selection is rejected.

import { CONTROLLER_KINDS, SCENARIOS, type WorldStateMsg } from './protocol';
import type { ClientStore } from './state';

const CLAMP_LIMITS = [1.0, 1.0, 1.5, 2.0];
const U_NAMES = ['u_ax', 'u_ay', 'u_vz', 'u_wz'];

export interface PanelActions {
  selectController(kind: string): void;
  resetScenario(scenario: string): void;
}

export function clampFlags(u: readonly number[], limits: readonly number[] = CLAMP_LIMITS): boolean[] {
  return u.map((v, i) => Math.abs(v) >= limits[i] - 1e-9);
}

export function formatPose(s: readonly number[] | null): string {
  if (!s) return '—';
  return `(${s[0].toFixed(2)}, ${s[1].toFixed(2)}, ${s[2].toFixed(2)}, ${s[3].toFixed(2)})`;
}

export class ControlPanel {
  private readonly buttons = new Map<string, HTMLButtonElement>();
  private readonly telemetry: HTMLElement;
  private readonly banner: HTMLElement;

  constructor(root: HTMLElement, private readonly actions: PanelActions) {
    const controllers = document.createElement('div');
    controllers.className = 'row';
    for (const kind of CONTROLLER_KINDS) {
      const b = document.createElement('button');
      b.textContent = kind;
      b.onclick = () => this.actions.selectController(kind);
      this.buttons.set(kind, b);
      controllers.appendChild(b);
    }
    const scenarios = document.createElement('div');
    scenarios.className = 'row';
    for (const s of SCENARIOS) {
      const b = document.createElement('button');
      b.textContent = `reset ${s}`;
      b.onclick = () => this.actions.resetScenario(s);
      scenarios.appendChild(b);
    }
    this.banner = document.createElement('div');
    this.banner.className = 'banner';
    this.telemetry = document.createElement('pre');
    this.telemetry.className = 'telemetry';
    root.append(this.banner, controllers, scenarios, this.telemetry);
  }

  render(store: ClientStore): void {
    const confirmed = store.confirmedController();
    for (const [kind, button] of this.buttons) {
      button.classList.toggle('active', kind === confirmed);
    }
    if (store.connection !== 'connected') {
      this.banner.textContent = 'disconnected — reconnecting…';
      this.banner.classList.add('visible');
    } else if (store.lastError) {
      this.banner.textContent = `bridge: ${store.lastError}`;
      this.banner.classList.add('visible');
    } else {
      this.banner.classList.remove('visible');
    }
    this.telemetry.textContent = this.describe(store);
  }

  private describe(store: ClientStore): string {
    const w = store.world;
    if (!w) return 'no telemetry';
    const lines = [
      `t = ${w.t.toFixed(2)} s   tick rate = ${store.status?.tick_rate ?? '—'} Hz   controller = ${store.confirmedController() ?? '—'}`,
      this.uLine(w),
      `s_pose true      ${formatPose(w.s_pose_true)}`,
      `s_pose estimated ${formatPose(w.s_pose_estimated)}`,
      `drone z = ${w.drone.z.toFixed(2)} m`,
    ];
    return lines.join('\n');
  }

  private uLine(w: WorldStateMsg): string {
    const flags = clampFlags(w.u_commanded);
    const parts = w.u_commanded.map(
      (v, i) => `${U_NAMES[i]}=${v >= 0 ? '+' : ''}${v.toFixed(2)}${flags[i] ? '*' : ' '}`,
    );
    return `u  ${parts.join('  ')}   (* = at clamp)`;
  }
}
