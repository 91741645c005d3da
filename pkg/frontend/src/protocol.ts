/**
 * Session-service wire protocol: JSON messages, one object per WebSocket
 * frame or per newline on the raw TCP transport.
 */

export interface LayoutKey {
  index: number;
  role: string;
  char: string | null;
  slot: number | null;
  frequency: number;
  phase: number;
}

export interface LayoutMsg {
  type: "layout";
  layout: { keys: LayoutKey[] };
}

export interface ContextMsg {
  type: "context";
  turns: [string, string][];
  category: string;
}

export interface Suggestions {
  words: string[];
  sentences: string[];
}

export interface StateMsg {
  type: "state";
  buffer: string;
  suggestions: Suggestions;
  degraded: boolean;
  finalized: boolean;
  trial: number;
  intended_key: number | null;
  decoded_key: number | null;
}

export interface ErrorMsg {
  type: "error";
  message: string;
  intended_key?: number;
  decoded_key?: number;
}

export type ServerMsg = LayoutMsg | ContextMsg | StateMsg | ErrorMsg;

export type ClientMsg =
  | { type: "start"; item?: number; mode?: string; p?: number }
  | { type: "select"; key: number }
  | { type: "simulate_decode"; key: number }
  | { type: "set_mode"; mode: string }
  | { type: "quit" };

export function encode(msg: ClientMsg): string {
  return JSON.stringify(msg);
}

export function decode(raw: string): ServerMsg {
  const msg = JSON.parse(raw);
  if (typeof msg !== "object" || msg === null || typeof msg.type !== "string") {
    throw new Error(`not a protocol message: ${raw}`);
  }
  return msg as ServerMsg;
}

/** Reassembles newline-delimited JSON from arbitrary chunk boundaries. */
export class LineCodec {
  private pending = "";

  push(chunk: string): ServerMsg[] {
    this.pending += chunk;
    const out: ServerMsg[] = [];
    for (;;) {
      const nl = this.pending.indexOf("\n");
      if (nl < 0) break;
      const line = this.pending.slice(0, nl).trim();
      this.pending = this.pending.slice(nl + 1);
      if (line) out.push(decode(line));
    }
    return out;
  }
}
