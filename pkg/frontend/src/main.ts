// Entry point: wire the transport, store, input, renderer, and panel.

import { BridgeClient } from './client';
import { PersonSteering } from './input';
import { ControlPanel } from './panel';
import { ClientStore } from './state';
import { ArenaView, canvasToWorld } from './view';

const params = new URLSearchParams(location.search);
const url = params.get('bridge') ?? `ws://${location.hostname || '127.0.0.1'}:8765`;

const canvas = document.getElementById('arena') as HTMLCanvasElement;
const panelRoot = document.getElementById('panel') as HTMLElement;

const store = new ClientStore();
const view = new ArenaView(canvas);

const client = new BridgeClient(url, (u) => new WebSocket(u) as never, {
  onMessage(msg) {
    if (msg.tag === 'world_state') {
      store.applyWorld(msg);
      steering.syncHeading(msg.person.heading);
    } else if (msg.tag === 'status') {
      store.applyStatus(msg);
      store.lastError = null;
    } else {
      store.applyError(msg.message);
    }
  },
  onConnect() {
    store.setConnection('connected');
    client.send(client.factory.reset('still'));
  },
  onDisconnect() {
    store.setConnection('disconnected');
  },
});

const steering = new PersonSteering(client.factory);
const panel = new ControlPanel(panelRoot, {
  selectController: (kind) => client.send(client.factory.selectController(kind)),
  resetScenario: (scenario) => client.send(client.factory.reset(scenario)),
});

let dragging = false;
canvas.addEventListener('pointerdown', (ev) => {
  dragging = true;
  canvas.setPointerCapture(ev.pointerId);
  handleDrag(ev);
});
canvas.addEventListener('pointermove', (ev) => {
  if (dragging) handleDrag(ev);
});
canvas.addEventListener('pointerup', () => {
  dragging = false;
});

function handleDrag(ev: PointerEvent): void {
  const rect = canvas.getBoundingClientRect();
  const [wx, wy] = canvasToWorld(
    ((ev.clientX - rect.left) / rect.width) * canvas.width,
    ((ev.clientY - rect.top) / rect.height) * canvas.height,
    view.viewport(),
  );
  steering.drag(wx, wy);
}

canvas.addEventListener('wheel', (ev) => {
  ev.preventDefault();
  const w = store.world;
  if (!w) return;
  steering.rotate(ev.deltaY > 0 ? -0.15 : 0.15, w.person.x, w.person.y);
});

window.addEventListener('keydown', (ev) => {
  const w = store.world;
  if (!w) return;
  if (ev.key === 'a' || ev.key === 'ArrowLeft') steering.rotate(0.15, w.person.x, w.person.y);
  if (ev.key === 'd' || ev.key === 'ArrowRight') steering.rotate(-0.15, w.person.x, w.person.y);
});

function frame(nowMs: number): void {
  const msg = steering.poll(nowMs, store.world?.t ?? 0);
  if (msg) client.send(msg);
  view.render(store.world, store.ribbon, store.connection === 'connected');
  panel.render(store);
  requestAnimationFrame(frame);
}

client.connect();
requestAnimationFrame(frame);
