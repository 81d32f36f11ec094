/** WebSocket client with automatic reconnect and exponential backoff. */

import type { ClientFrame } from "./protocol.js";
import { encodeClientFrame } from "./protocol.js";

export interface ClientHooks {
  onMessage: (text: string) => void;
  onConnection: (state: "connecting" | "open" | "closed") => void;
}

export class ReconnectingClient {
  private socket: WebSocket | null = null;
  private backoffMs = 500;
  private readonly maxBackoffMs = 10_000;
  private stopped = false;

  constructor(
    private readonly url: string,
    private readonly hooks: ClientHooks,
  ) {}

  start(): void {
    this.stopped = false;
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    this.socket?.close();
  }

  send(frame: ClientFrame): boolean {
    if (this.socket === null || this.socket.readyState !== WebSocket.OPEN) {
      return false;
    }
    this.socket.send(encodeClientFrame(frame));
    return true;
  }

  private connect(): void {
    this.hooks.onConnection("connecting");
    const socket = new WebSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.backoffMs = 500;
      this.hooks.onConnection("open");
    };
    socket.onmessage = (event) => this.hooks.onMessage(String(event.data));
    socket.onclose = () => {
      this.hooks.onConnection("closed");
      if (!this.stopped) {
        setTimeout(() => this.connect(), this.backoffMs);
        this.backoffMs = Math.min(this.backoffMs * 2, this.maxBackoffMs);
      }
    };
    socket.onerror = () => socket.close();
  }
}
