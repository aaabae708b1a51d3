// Bridge connection with reconnect backoff. The transport constructor is
// injectable so tests can run under node; the browser passes the global
// WebSocket.

import { MessageFactory, parseInbound, type InboundMsg, type OutboundMsg } from './protocol';

export interface Transport {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type TransportFactory = (url: string) => Transport;

export interface ClientCallbacks {
  onMessage(msg: InboundMsg): void;
  onConnect(): void;
  onDisconnect(): void;
}

const BACKOFF_MS = [500, 1000, 2000, 4000, 8000];

export class BridgeClient {
  readonly factory = new MessageFactory();
  private ws: Transport | null = null;
  private attempts = 0;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly makeTransport: TransportFactory,
    private readonly callbacks: ClientCallbacks,
  ) {}

  connect(): void {
    if (this.closed) return;
    const ws = this.makeTransport(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.attempts = 0;
      this.callbacks.onConnect();
    };
    ws.onmessage = (ev) => {
      const msg = parseInbound(String(ev.data));
      if (msg) this.callbacks.onMessage(msg);
    };
    ws.onerror = () => {
      // close handler drives the reconnect
    };
    ws.onclose = () => {
      this.ws = null;
      this.callbacks.onDisconnect();
      this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.closed) return;
    const delay = BACKOFF_MS[Math.min(this.attempts, BACKOFF_MS.length - 1)];
    this.attempts += 1;
    this.timer = setTimeout(() => this.connect(), delay);
  }

  send(msg: OutboundMsg): boolean {
    if (!this.ws) return false;
    try {
      this.ws.send(JSON.stringify(msg));
      return true;
    } catch {
      return false;
    }
  }

  close(): void {
    this.closed = true;
    if (this.timer) clearTimeout(this.timer);
    this.ws?.close();
  }
}
