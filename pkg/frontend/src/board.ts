/**
 * DOM rendering of the speller: 40-key board, the three text lines (input,
 * word candidates, sentence candidates), dialogue-history pane, and status
 * strip. Selection is click or dwell; the optional flicker animation is
 * purely cosmetic and makes no frame-timing claims.
 */

import type { LayoutKey } from "./protocol.js";
import type { UiSessionView } from "./view.js";

export interface BoardOptions {
  dwellMs: number;
  dwellEnabled: boolean;
  flicker: boolean;
}

export interface BoardCallbacks {
  onSelect(key: number): void;
}

const ROLE_LABELS: Record<string, string> = {
  comma: ",",
  question: "?",
  apostrophe: "'",
  space: "space",
  undo: "undo",
  delete: "del",
  enter: "enter",
};

function keyLabel(k: LayoutKey): string {
  if (k.role === "letter") return k.char ?? "?";
  if (k.role === "word") return String(k.slot ?? 0);
  if (k.role === "sentence") return String(5 + (k.slot ?? 0));
  return ROLE_LABELS[k.role] ?? k.role;
}

export class Board {
  private root: HTMLElement;
  private callbacks: BoardCallbacks;
  private options: BoardOptions;
  private keyEls = new Map<number, HTMLButtonElement>();
  private dwellTimers = new Map<number, number>();
  private els: Record<string, HTMLElement> = {};
  private built = false;

  constructor(root: HTMLElement, callbacks: BoardCallbacks, options: BoardOptions) {
    this.root = root;
    this.callbacks = callbacks;
    this.options = options;
  }

  setOptions(options: Partial<BoardOptions>): void {
    Object.assign(this.options, options);
    for (const [index, el] of this.keyEls) {
      this.applyFlicker(el, index);
    }
  }

  private applyFlicker(el: HTMLButtonElement, index: number): void {
    const freq = Number(el.dataset.frequency ?? "10");
    if (this.options.flicker) {
      el.style.animation = `flicker ${(1000 / freq).toFixed(1)}ms steps(2) infinite`;
    } else {
      el.style.animation = "";
    }
    void index;
  }

  private build(layout: LayoutKey[]): void {
    this.root.innerHTML = `
      <div class="speller">
        <div class="left">
          <div class="board" id="board"></div>
          <div class="lines">
            <div class="line buffer" id="line-buffer"></div>
            <div class="line words" id="line-words"></div>
            <div class="line sentences" id="line-sentences"></div>
          </div>
          <div class="status" id="status"></div>
        </div>
        <div class="dialogue" id="dialogue"><h3>Dialogue</h3><div id="turns"></div></div>
      </div>`;
    const board = this.root.querySelector<HTMLElement>("#board")!;
    for (const key of layout) {
      const el = document.createElement("button");
      el.className = `key role-${key.role}`;
      el.dataset.index = String(key.index);
      el.dataset.frequency = String(key.frequency);
      el.textContent = keyLabel(key);
      el.title = `key ${key.index} · ${key.frequency.toFixed(1)} Hz`;
      this.attachSelection(el, key.index);
      this.applyFlicker(el, key.index);
      board.appendChild(el);
      this.keyEls.set(key.index, el);
    }
    for (const id of ["line-buffer", "line-words", "line-sentences", "status", "turns", "dialogue"]) {
      this.els[id] = this.root.querySelector<HTMLElement>(`#${id}`)!;
    }
    this.built = true;
  }

  private attachSelection(el: HTMLButtonElement, index: number): void {
    el.addEventListener("click", () => {
      if (!el.disabled) this.callbacks.onSelect(index);
    });
    el.addEventListener("pointerenter", () => {
      if (!this.options.dwellEnabled || el.disabled) return;
      el.classList.add("dwelling");
      el.style.setProperty("--dwell-ms", `${this.options.dwellMs}ms`);
      const timer = window.setTimeout(() => {
        el.classList.remove("dwelling");
        if (!el.disabled) this.callbacks.onSelect(index);
      }, this.options.dwellMs);
      this.dwellTimers.set(index, timer);
    });
    el.addEventListener("pointerleave", () => {
      el.classList.remove("dwelling");
      const timer = this.dwellTimers.get(index);
      if (timer !== undefined) window.clearTimeout(timer);
      this.dwellTimers.delete(index);
    });
  }

  update(view: UiSessionView): void {
    if (!view.layout) {
      this.root.innerHTML =
        `<div class="banner">${view.status === "disconnected"
          ? "Disconnected from the session service - reload to reconnect."
          : "Connecting..."}</div>`;
      this.built = false;
      this.keyEls.clear();
      return;
    }
    if (!this.built) this.build(view.layout);

    this.els["line-buffer"].textContent = view.buffer;
    const words = this.els["line-words"];
    const sentences = this.els["line-sentences"];
    words.innerHTML = "";
    view.words.forEach((w, i) => {
      const span = document.createElement("span");
      span.className = "slot" + (w ? "" : " empty");
      span.textContent = `${i}: ${w}`;
      words.appendChild(span);
    });
    sentences.innerHTML = "";
    view.sentences.forEach((s, i) => {
      const span = document.createElement("span");
      span.className = "slot" + (s ? "" : " empty");
      span.textContent = `${5 + i}: ${s}`;
      sentences.appendChild(span);
    });

    // candidate keys select only when their slot is filled
    for (const [index, el] of this.keyEls) {
      const layoutKey = view.layout[index - 1];
      let disabled = view.finalized;
      if (layoutKey.role === "word") {
        disabled = disabled || !view.words[layoutKey.slot ?? 0];
        el.title = view.words[layoutKey.slot ?? 0] || "empty slot";
      } else if (layoutKey.role === "sentence") {
        disabled = disabled || !view.sentences[layoutKey.slot ?? 0];
        el.title = view.sentences[layoutKey.slot ?? 0] || "empty slot";
      } else if (view.finalized && layoutKey.role === "undo") {
        disabled = true; // the service treats the session as complete
      }
      el.disabled = disabled;
    }

    const bits = [
      view.finalized ? "finalized" : view.status,
      `trial ${view.trial}`,
      `keystrokes ${view.keystrokes}`,
      `elapsed ${view.elapsedS.toFixed(0)}s`,
    ];
    if (view.degraded) bits.push("fallback suggestions");
    if (view.lastDecoded !== null && view.lastIntended !== null
        && view.lastDecoded !== view.lastIntended) {
      bits.push(`decode error: wanted ${view.lastIntended}, got ${view.lastDecoded}`);
    }
    if (view.lastError) bits.push(`error: ${view.lastError}`);
    this.els["status"].textContent = bits.join(" · ");
    this.els["status"].classList.toggle("degraded", view.degraded);
    this.els["status"].classList.toggle("finalized", view.finalized);

    const turns = this.els["turns"];
    turns.innerHTML = "";
    for (const [speaker, text] of view.dialogue) {
      const div = document.createElement("div");
      div.className = `turn ${speaker === "me" ? "mine" : "theirs"}`;
      div.textContent = text;
      turns.appendChild(div);
    }
    if (view.finalized) {
      const done = document.createElement("div");
      done.className = "turn mine final";
      done.textContent = view.buffer;
      turns.appendChild(done);
    }
  }
}
