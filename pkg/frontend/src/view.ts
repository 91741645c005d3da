/**
 * UI session state and the reducer that folds server messages into it.
 *
 * The view never derives text locally: the buffer and all seven candidate
 * slots are copied verbatim from the last state message, so whatever the
 * board shows is byte-identical to the server's session state.
 */

import type { LayoutKey, ServerMsg } from "./protocol.js";

export type Status =
  | "disconnected"
  | "idle"
  | "stimulating"
  | "finalized";

export interface UiSessionView {
  layout: LayoutKey[] | null;
  buffer: string;
  words: string[];
  sentences: string[];
  degraded: boolean;
  finalized: boolean;
  dialogue: [string, string][];
  category: string;
  status: Status;
  keystrokes: number;
  elapsedS: number;
  trial: number;
  lastIntended: number | null;
  lastDecoded: number | null;
  lastError: string | null;
}

export function initialView(): UiSessionView {
  return {
    layout: null,
    buffer: "",
    words: ["", "", "", "", ""],
    sentences: ["", ""],
    degraded: false,
    finalized: false,
    dialogue: [],
    category: "",
    status: "disconnected",
    keystrokes: 0,
    elapsedS: 0,
    trial: 0,
    lastIntended: null,
    lastDecoded: null,
    lastError: null,
  };
}

/** Transition taken when the user commits a selection (trial running). */
export function markSelecting(view: UiSessionView): UiSessionView {
  if (view.finalized) return view;
  return { ...view, status: "stimulating", lastError: null };
}

export function markConnected(view: UiSessionView): UiSessionView {
  return { ...view, status: "idle" };
}

export function markDisconnected(view: UiSessionView): UiSessionView {
  return { ...view, status: "disconnected" };
}

export function tick(view: UiSessionView, dtS: number): UiSessionView {
  if (view.status === "disconnected" || view.finalized) return view;
  return { ...view, elapsedS: view.elapsedS + dtS };
}

export function applyServer(view: UiSessionView, msg: ServerMsg): UiSessionView {
  switch (msg.type) {
    case "layout":
      return { ...view, layout: msg.layout.keys, status: "idle" };
    case "context":
      return { ...view, dialogue: msg.turns, category: msg.category };
    case "state": {
      const counted = msg.decoded_key !== null && msg.decoded_key !== undefined;
      return {
        ...view,
        buffer: msg.buffer,
        words: [...msg.suggestions.words],
        sentences: [...msg.suggestions.sentences],
        degraded: msg.degraded,
        finalized: msg.finalized,
        trial: msg.trial,
        keystrokes: view.keystrokes + (counted ? 1 : 0),
        lastIntended: msg.intended_key ?? null,
        lastDecoded: msg.decoded_key ?? null,
        status: msg.finalized ? "finalized" : "idle",
      };
    }
    case "error":
      return { ...view, lastError: msg.message, status: view.finalized ? "finalized" : "idle" };
    default:
      return view;
  }
}
