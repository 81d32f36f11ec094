/**
 * Gesture-to-frame translation.
 *
 * A drag starting on the robot-action marker becomes a relative correction
 * whose direction is the drag vector normalized to unit length; a click on
 * the action-space inset becomes an absolute correction at the clicked
 * action.  The correction magnitude of relative feedback is applied
 * server-side; only the direction travels.
 */

import type { ClientFrame, FeedbackFrame } from "./protocol.js";

export interface DragGesture {
  startX: number;
  startY: number;
  endX: number;
  endY: number;
}

export interface FrameRef {
  episode: number;
  step: number;
}

/** Unit-normalized relative correction; null for zero-length drags. */
export function dragToRelativeFeedback(g: DragGesture, ref?: FrameRef): FeedbackFrame | null {
  const dx = g.endX - g.startX;
  const dy = g.endY - g.startY;
  const norm = Math.hypot(dx, dy);
  if (norm === 0) return null;
  return { type: "feedback", kind: "relative", vector: [dx / norm, dy / norm], ...ref };
}

/** Absolute correction at a clicked action-space point, clipped to the box. */
export function clickToAbsoluteFeedback(ax: number, ay: number, ref?: FrameRef): FeedbackFrame {
  const clip = (v: number) => Math.max(-1, Math.min(1, v));
  return { type: "feedback", kind: "absolute", vector: [clip(ax), clip(ay)], ...ref };
}

/** Canvas pixel coordinates to action-box coordinates for an inset canvas. */
export function pixelToAction(
  px: number,
  py: number,
  width: number,
  height: number,
): [number, number] {
  // canvas y grows downward; the action box y grows upward
  const ax = (px / width) * 2 - 1;
  const ay = 1 - (py / height) * 2;
  return [ax, ay];
}

export function controlFrame(
  cmd: "pause" | "resume" | "reset" | "train_now" | "dump_landscape",
): ClientFrame {
  return { type: "control", cmd };
}

export function setMethodFrame(method: string): ClientFrame {
  return { type: "control", cmd: "set_method", method };
}
