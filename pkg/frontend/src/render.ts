/** Canvas drawing for the environment view and the action-space inset. */

import { heatmapCells } from "./heatmap.js";
import type { SessionView } from "./session.js";

function toPixel(v: number, size: number, flip: boolean): number {
  const t = (v + 1) / 2;
  return (flip ? 1 - t : t) * size;
}

export function drawEnvironment(ctx: CanvasRenderingContext2D, view: SessionView): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);
  const frame = view.latest;
  if (!frame) return;

  ctx.strokeStyle = "#39425a";
  ctx.strokeRect(1, 1, width - 2, height - 2);

  // trajectory trail
  ctx.strokeStyle = "rgba(120, 170, 255, 0.45)";
  ctx.beginPath();
  view.trail.forEach(([x, y], i) => {
    const px = toPixel(x, width, false);
    const py = toPixel(y, height, true);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();

  for (const goal of frame.render.goals ?? []) {
    ctx.fillStyle = "#45d17a";
    ctx.beginPath();
    ctx.arc(toPixel(goal[0], width, false), toPixel(goal[1], height, true), 7, 0, Math.PI * 2);
    ctx.fill();
  }
  const agent = frame.render.agent;
  if (agent) {
    ctx.fillStyle = "#f2b33d";
    ctx.beginPath();
    ctx.arc(toPixel(agent[0], width, false), toPixel(agent[1], height, true), 6, 0, Math.PI * 2);
    ctx.fill();
  }
}

export function drawActionInset(ctx: CanvasRenderingContext2D, view: SessionView): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#151a24";
  ctx.fillRect(0, 0, width, height);

  if (view.heatmap) {
    const res = view.heatmap.resolution;
    const cw = width / res;
    const ch = height / res;
    for (const cell of heatmapCells(view.heatmap)) {
      // grid rows index the first action axis (x); columns the second (y)
      const px = cell.row * cw;
      const py = height - (cell.col + 1) * ch;
      ctx.fillStyle = cell.isMinimum
        ? "#ffffff"
        : `rgba(255, ${Math.round(90 + 120 * cell.intensity)}, 60, ${0.15 + 0.55 * cell.intensity})`;
      ctx.fillRect(px, py, Math.ceil(cw), Math.ceil(ch));
    }
  }

  ctx.strokeStyle = "#39425a";
  ctx.strokeRect(1, 1, width - 2, height - 2);
  ctx.strokeStyle = "rgba(120, 130, 150, 0.4)";
  ctx.beginPath();
  ctx.moveTo(width / 2, 0);
  ctx.lineTo(width / 2, height);
  ctx.moveTo(0, height / 2);
  ctx.lineTo(width, height / 2);
  ctx.stroke();

  const action = view.latest?.robot_action;
  if (action) {
    ctx.fillStyle = "#e55b5b";
    ctx.beginPath();
    ctx.arc(toPixel(action[0], width, false), toPixel(action[1], height, true), 5, 0, Math.PI * 2);
    ctx.fill();
  }
}

export function drawStatus(el: HTMLElement, view: SessionView): void {
  const sr = view.metrics.at(-1);
  const bits = [
    `connection: ${view.connection}`,
    view.latest ? `episode ${view.latest.episode}, step ${view.latest.step}` : "waiting…",
    sr ? `success ${(sr.successRate * 100).toFixed(0)}% @ ep ${sr.episode}` : "no evals yet",
    view.paused ? "PAUSED" : "running",
  ];
  if (view.droppedFrames > 0) bits.push(`dropped ${view.droppedFrames}`);
  if (view.lastError) bits.push(`last error: ${view.lastError}`);
  el.textContent = bits.join(" · ");
  el.classList.toggle("banner-error", view.connection !== "open");
}
