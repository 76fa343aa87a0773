// Reconnecting WebSocket wrapper. The UI holds no physics state, so a
// reconnect mid-trial simply resumes rendering from the next telemetry
// frame.

import { parseServerMessage, ServerMessage } from "./protocol.js";

const RECONNECT_DELAY_MS = 1000;

export interface SocketHandlers {
  onMessage: (message: ServerMessage) => void;
  onStatus: (status: "connecting" | "open" | "closed") => void;
}

export class SessionSocket {
  private ws: WebSocket | null = null;
  private closed = false;

  constructor(private url: string, private handlers: SocketHandlers) {}

  connect(): void {
    this.handlers.onStatus("connecting");
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => this.handlers.onStatus("open");
    this.ws.onmessage = (event) => {
      const message = parseServerMessage(String(event.data));
      if (message) this.handlers.onMessage(message);
    };
    this.ws.onclose = () => {
      this.handlers.onStatus("closed");
      this.ws = null;
      if (!this.closed) {
        setTimeout(() => this.connect(), RECONNECT_DELAY_MS);
      }
    };
  }

  send(payload: object): boolean {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(payload));
      return true;
    }
    return false;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
