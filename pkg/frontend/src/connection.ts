/** WebSocket wrapper with reconnect and typed dispatch. */
import { parseServerMessage, type ClientMessage, type ServerMessage } from "./protocol.js";

export interface ConnectionHandlers {
  onMessage(message: ServerMessage): void;
  onStatus(connected: boolean): void;
}

export class Connection {
  private socket: WebSocket | null = null;
  private closed = false;
  private retryMs = 500;

  constructor(
    private readonly url: string,
    private readonly handlers: ConnectionHandlers,
  ) {}

  open(): void {
    this.closed = false;
    this.dial();
  }

  private dial(): void {
    const socket = new WebSocket(this.url);
    this.socket = socket;
    socket.addEventListener("open", () => {
      this.retryMs = 500;
      this.handlers.onStatus(true);
    });
    socket.addEventListener("message", (event) => {
      const message = parseServerMessage(String(event.data));
      if (message) this.handlers.onMessage(message);
    });
    socket.addEventListener("close", () => {
      this.handlers.onStatus(false);
      this.socket = null;
      if (!this.closed) {
        setTimeout(() => this.dial(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, 8000);
      }
    });
    socket.addEventListener("error", () => socket.close());
  }

  send(message: ClientMessage): boolean {
    if (this.socket && this.socket.readyState === WebSocket.OPEN) {
      this.socket.send(JSON.stringify(message));
      return true;
    }
    return false;
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
