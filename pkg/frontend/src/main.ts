import { Board } from "./board.js";
import { SpellerSocket } from "./client.js";
import {
  UiSessionView,
  applyServer,
  initialView,
  markConnected,
  markDisconnected,
  markSelecting,
  tick,
} from "./view.js";

const params = new URLSearchParams(location.search);
const wsUrl = params.get("ws") ?? `ws://${location.host}/ws`;

let view: UiSessionView = initialView();
let decodeMode: "direct" | "simulated" =
  params.get("decode") === "simulated" ? "simulated" : "direct";
let decodeP = Number(params.get("p") ?? "0.8");

const boardRoot = document.getElementById("app")!;
const board = new Board(
  boardRoot,
  {
    onSelect(key: number) {
      view = markSelecting(view);
      board.update(view);
      socket.send(decodeMode === "simulated"
        ? { type: "simulate_decode", key }
        : { type: "select", key });
    },
  },
  {
    dwellMs: Number(params.get("dwell") ?? "1500"),
    dwellEnabled: params.get("click") === null,
    flicker: params.get("flicker") !== null,
  },
);

const socket = new SpellerSocket(wsUrl, {
  onMessage(msg) {
    view = applyServer(view, msg);
    board.update(view);
  },
  onOpen() {
    view = markConnected(view);
    const item = params.get("item");
    socket.send({
      type: "start",
      ...(item !== null ? { item: Number(item) } : {}),
      ...(decodeMode === "simulated" ? { p: decodeP } : {}),
    });
  },
  onClose() {
    view = markDisconnected(view);
    board.update(view);
  },
});

window.setInterval(() => {
  view = tick(view, 1);
  board.update(view);
}, 1000);

const controls = document.getElementById("controls")!;
controls.innerHTML = `
  <label><input type="checkbox" id="sim"> simulated decoding (p=<span id="pval"></span>)</label>
  <label><input type="checkbox" id="dwell" checked> dwell select</label>
  <label><input type="checkbox" id="flicker"> flicker (cosmetic)</label>
  <button id="restart">new utterance</button>`;
(document.getElementById("pval") as HTMLElement).textContent = decodeP.toFixed(2);
const simBox = document.getElementById("sim") as HTMLInputElement;
simBox.checked = decodeMode === "simulated";
simBox.addEventListener("change", () => {
  decodeMode = simBox.checked ? "simulated" : "direct";
});
const dwellBox = document.getElementById("dwell") as HTMLInputElement;
dwellBox.addEventListener("change", () => board.setOptions({ dwellEnabled: dwellBox.checked }));
const flickerBox = document.getElementById("flicker") as HTMLInputElement;
flickerBox.addEventListener("change", () => board.setOptions({ flicker: flickerBox.checked }));
document.getElementById("restart")!.addEventListener("click", () => {
  view = { ...initialView(), layout: view.layout, status: "idle" };
  const item = params.get("item");
  socket.send({
    type: "start",
    ...(item !== null ? { item: Number(item) } : {}),
    ...(decodeMode === "simulated" ? { p: decodeP } : {}),
  });
});

board.update(view);
