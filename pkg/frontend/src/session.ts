/**
 * Session state as a pure reducer over server frames.
 *
 * The view never extrapolates dynamics: it only reflects frames the server
 * sent, so replaying a recorded frame stream reproduces the exact same
 * sequence of views.
 */

import type { LandscapeFrame, ServerFrame, StateFrame } from "./protocol.js";

export type ConnectionState = "connecting" | "open" | "closed";

export interface MetricsPoint {
  episode: number;
  successRate: number;
}

export interface SessionView {
  connection: ConnectionState;
  latest: StateFrame | null;
  trail: number[][]; // recent agent positions of the current episode
  framesSeen: number;
  droppedFrames: number;
  lastError: string | null;
  metrics: MetricsPoint[];
  heatmap: LandscapeFrame | null;
  paused: boolean;
}

export function initialView(): SessionView {
  return {
    connection: "connecting",
    latest: null,
    trail: [],
    framesSeen: 0,
    droppedFrames: 0,
    lastError: null,
    metrics: [],
    heatmap: null,
    paused: false,
  };
}

const TRAIL_LIMIT = 200;

export function applyFrame(view: SessionView, frame: ServerFrame): SessionView {
  switch (frame.type) {
    case "state": {
      const newEpisode = view.latest !== null && frame.episode !== view.latest.episode;
      const agent = frame.render.agent ?? null;
      const trail = newEpisode ? [] : view.trail.slice(-TRAIL_LIMIT + 1);
      return {
        ...view,
        latest: frame,
        trail: agent ? [...trail, agent] : trail,
        framesSeen: view.framesSeen + 1,
      };
    }
    case "metrics":
      return {
        ...view,
        metrics: [...view.metrics, { episode: frame.episode, successRate: frame.success_rate }],
      };
    case "error":
      return { ...view, lastError: frame.msg };
    case "landscape":
      return { ...view, heatmap: frame };
  }
}

/** Feed one raw message through the reducer; malformed input is dropped. */
export function applyMessage(
  view: SessionView,
  parsed: ServerFrame | null,
): SessionView {
  if (parsed === null) {
    return { ...view, droppedFrames: view.droppedFrames + 1, lastError: "malformed frame" };
  }
  return applyFrame(view, parsed);
}

export function setConnection(view: SessionView, connection: ConnectionState): SessionView {
  return { ...view, connection };
}

export function setPaused(view: SessionView, paused: boolean): SessionView {
  return { ...view, paused };
}
