// Top-down arena rendering. The pure coordinate helpers are exported for
// tests; drawing runs on whatever the latest world_state says, nothing more.

import type { WorldStateMsg } from './protocol';
import type { RibbonPoint } from './state';
import { ARENA_HALF_EXTENT } from './input';

export interface Viewport {
  width: number;
  height: number;
  margin: number;
}

/** World (meters, y up) to canvas (pixels, y down), arena centered. */
export function worldToCanvas(
  x: number,
  y: number,
  vp: Viewport,
  half: number = ARENA_HALF_EXTENT,
): [number, number] {
  const usable = Math.min(vp.width, vp.height) - 2 * vp.margin;
  const scale = usable / (2 * half);
  const cx = vp.width / 2 + x * scale;
  const cy = vp.height / 2 - y * scale;
  return [cx, cy];
}

export function canvasToWorld(
  cx: number,
  cy: number,
  vp: Viewport,
  half: number = ARENA_HALF_EXTENT,
): [number, number] {
  const usable = Math.min(vp.width, vp.height) - 2 * vp.margin;
  const scale = usable / (2 * half);
  return [(cx - vp.width / 2) / scale, -(cy - vp.height / 2) / scale];
}

/** The point the controller steers for: standoff ahead of the face. */
export function targetPoint(person: { x: number; y: number; heading: number }, delta = 1.5): [number, number] {
  return [person.x + delta * Math.cos(person.heading), person.y + delta * Math.sin(person.heading)];
}

const DRONE_COLOR = '#3da5ff';
const PERSON_COLOR = '#ff9f43';
const TARGET_COLOR = '#2ecc71';
const RIBBON_COLOR = 'rgba(61, 165, 255, 0.45)';
const FRUSTUM_COLOR = 'rgba(61, 165, 255, 0.12)';
const HFOV = 2.6;

export class ArenaView {
  private readonly ctx: CanvasRenderingContext2D;

  constructor(private readonly canvas: HTMLCanvasElement, private readonly margin = 24) {
    const ctx = canvas.getContext('2d');
    if (!ctx) throw new Error('canvas 2d context unavailable');
    this.ctx = ctx;
  }

  viewport(): Viewport {
    return { width: this.canvas.width, height: this.canvas.height, margin: this.margin };
  }

  render(world: WorldStateMsg | null, ribbon: RibbonPoint[], connected: boolean): void {
    const { ctx } = this;
    const vp = this.viewport();
    ctx.clearRect(0, 0, vp.width, vp.height);
    this.drawArena(vp);
    if (!world) {
      ctx.fillStyle = '#999';
      ctx.font = '16px system-ui, sans-serif';
      ctx.textAlign = 'center';
      ctx.fillText(connected ? 'waiting for telemetry…' : 'disconnected', vp.width / 2, vp.height / 2);
      return;
    }
    this.drawRibbon(ribbon, vp);
    this.drawTarget(world, vp);
    this.drawPerson(world, vp);
    this.drawDrone(world, vp);
    this.drawAltitudeGauge(world, vp);
  }

  private drawArena(vp: Viewport): void {
    const { ctx } = this;
    const [x0, y0] = worldToCanvas(-ARENA_HALF_EXTENT, ARENA_HALF_EXTENT, vp);
    const [x1, y1] = worldToCanvas(ARENA_HALF_EXTENT, -ARENA_HALF_EXTENT, vp);
    ctx.strokeStyle = '#444';
    ctx.lineWidth = 2;
    ctx.strokeRect(x0, y0, x1 - x0, y1 - y0);
  }

  private drawRibbon(ribbon: RibbonPoint[], vp: Viewport): void {
    if (ribbon.length < 2) return;
    const { ctx } = this;
    ctx.strokeStyle = RIBBON_COLOR;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ribbon.forEach((p, i) => {
      const [cx, cy] = worldToCanvas(p.x, p.y, vp);
      if (i === 0) ctx.moveTo(cx, cy);
      else ctx.lineTo(cx, cy);
    });
    ctx.stroke();
  }

  private drawTarget(world: WorldStateMsg, vp: Viewport): void {
    const [tx, ty] = targetPoint(world.person);
    const [cx, cy] = worldToCanvas(tx, ty, vp);
    const { ctx } = this;
    ctx.strokeStyle = TARGET_COLOR;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.arc(cx, cy, 6, 0, 2 * Math.PI);
    ctx.moveTo(cx - 9, cy);
    ctx.lineTo(cx + 9, cy);
    ctx.moveTo(cx, cy - 9);
    ctx.lineTo(cx, cy + 9);
    ctx.stroke();
  }

  private drawPerson(world: WorldStateMsg, vp: Viewport): void {
    const p = world.person;
    const [cx, cy] = worldToCanvas(p.x, p.y, vp);
    const { ctx } = this;
    ctx.fillStyle = PERSON_COLOR;
    ctx.beginPath();
    ctx.arc(cx, cy, 9, 0, 2 * Math.PI);
    ctx.fill();
    const [hx, hy] = worldToCanvas(p.x + 0.45 * Math.cos(p.heading), p.y + 0.45 * Math.sin(p.heading), vp);
    ctx.strokeStyle = PERSON_COLOR;
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(hx, hy);
    ctx.stroke();
  }

  private drawDrone(world: WorldStateMsg, vp: Viewport): void {
    const d = world.drone;
    const [cx, cy] = worldToCanvas(d.x, d.y, vp);
    const { ctx } = this;
    // camera frustum
    ctx.fillStyle = FRUSTUM_COLOR;
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    for (const side of [-1, 1]) {
      const a = d.heading + (side * HFOV) / 2;
      const [fx, fy] = worldToCanvas(d.x + 2.2 * Math.cos(a), d.y + 2.2 * Math.sin(a), vp);
      ctx.lineTo(fx, fy);
    }
    ctx.closePath();
    ctx.fill();
    // body with heading wedge
    ctx.fillStyle = DRONE_COLOR;
    ctx.save();
    ctx.translate(cx, cy);
    ctx.rotate(-d.heading);
    ctx.beginPath();
    ctx.moveTo(12, 0);
    ctx.lineTo(-8, 7);
    ctx.lineTo(-8, -7);
    ctx.closePath();
    ctx.fill();
    ctx.restore();
  }

  private drawAltitudeGauge(world: WorldStateMsg, vp: Viewport): void {
    const { ctx } = this;
    const x = vp.width - 18;
    const top = vp.margin;
    const bottom = vp.height - vp.margin;
    const zMax = 2.8;
    ctx.strokeStyle = '#555';
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(x, top);
    ctx.lineTo(x, bottom);
    ctx.stroke();
    const frac = Math.min(Math.max(world.drone.z / zMax, 0), 1);
    const y = bottom - frac * (bottom - top);
    ctx.fillStyle = DRONE_COLOR;
    ctx.beginPath();
    ctx.arc(x, y, 5, 0, 2 * Math.PI);
    ctx.fill();
    const pf = Math.min(Math.max(world.person.z / zMax, 0), 1);
    const py = bottom - pf * (bottom - top);
    ctx.fillStyle = PERSON_COLOR;
    ctx.fillRect(x - 6, py - 1.5, 12, 3);
  }
}
