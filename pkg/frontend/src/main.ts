/** Console bootstrap: wires the socket, reducer, canvases, and gestures. */

import { ReconnectingClient } from "./client.js";
import {
  clickToAbsoluteFeedback,
  controlFrame,
  dragToRelativeFeedback,
  pixelToAction,
  setMethodFrame,
} from "./gestures.js";
import { parseServerFrame } from "./protocol.js";
import { applyMessage, initialView, setConnection, setPaused } from "./session.js";
import { drawActionInset, drawEnvironment, drawStatus } from "./render.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const envCanvas = el<HTMLCanvasElement>("env");
const insetCanvas = el<HTMLCanvasElement>("inset");
const status = el<HTMLElement>("status");
const envCtx = envCanvas.getContext("2d")!;
const insetCtx = insetCanvas.getContext("2d")!;

let view = initialView();

function redraw(): void {
  drawEnvironment(envCtx, view);
  drawActionInset(insetCtx, view);
  drawStatus(status, view);
}

const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
const client = new ReconnectingClient(wsUrl, {
  onMessage: (text) => {
    view = applyMessage(view, parseServerFrame(text));
    redraw();
  },
  onConnection: (state) => {
    view = setConnection(view, state);
    redraw();
  },
});
client.start();

// drag on the environment canvas: relative correction
let dragStart: { x: number; y: number } | null = null;
envCanvas.addEventListener("pointerdown", (e) => {
  dragStart = { x: e.offsetX, y: e.offsetY };
});
function currentRef() {
  const latest = view.latest;
  return latest ? { episode: latest.episode, step: latest.step } : undefined;
}

envCanvas.addEventListener("pointerup", (e) => {
  if (!dragStart) return;
  const frame = dragToRelativeFeedback(
    {
      startX: dragStart.x,
      // canvas y points down; flip so drags match on-screen arrows
      startY: -dragStart.y,
      endX: e.offsetX,
      endY: -e.offsetY,
    },
    currentRef(),
  );
  dragStart = null;
  if (frame) client.send(frame);
});

// click on the action inset: absolute correction
insetCanvas.addEventListener("click", (e) => {
  const [ax, ay] = pixelToAction(e.offsetX, e.offsetY, insetCanvas.width, insetCanvas.height);
  client.send(clickToAbsoluteFeedback(ax, ay, currentRef()));
});

el<HTMLButtonElement>("pause").addEventListener("click", () => {
  view = setPaused(view, true);
  client.send(controlFrame("pause"));
  redraw();
});
el<HTMLButtonElement>("resume").addEventListener("click", () => {
  view = setPaused(view, false);
  client.send(controlFrame("resume"));
  redraw();
});
el<HTMLButtonElement>("reset").addEventListener("click", () => client.send(controlFrame("reset")));
el<HTMLButtonElement>("train").addEventListener("click", () =>
  client.send(controlFrame("train_now")),
);
el<HTMLButtonElement>("heatmap").addEventListener("click", () =>
  client.send(controlFrame("dump_landscape")),
);
el<HTMLSelectElement>("method").addEventListener("change", (e) => {
  const method = (e.target as HTMLSelectElement).value;
  if (method) client.send(setMethodFrame(method));
});
