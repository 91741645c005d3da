/** WebSocket transport for the session protocol (one JSON message per frame). */

import { ClientMsg, ServerMsg, decode, encode } from "./protocol.js";

export interface SocketHandlers {
  onMessage(msg: ServerMsg): void;
  onOpen?(): void;
  onClose?(): void;
}

export class SpellerSocket {
  private ws: WebSocket;

  constructor(url: string, handlers: SocketHandlers) {
    this.ws = new WebSocket(url);
    this.ws.onmessage = (ev) => {
      try {
        handlers.onMessage(decode(String(ev.data)));
      } catch (err) {
        console.warn("dropping malformed server message", err);
      }
    };
    this.ws.onopen = () => handlers.onOpen?.();
    this.ws.onclose = () => handlers.onClose?.();
    this.ws.onerror = () => handlers.onClose?.();
  }

  send(msg: ClientMsg): void {
    if (this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(encode(msg));
    }
  }

  close(): void {
    this.ws.close();
  }
}
