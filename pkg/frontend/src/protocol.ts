/** Wire frames exchanged with the teaching service over WebSocket. */

export interface RenderPayload {
  kind: string;
  box: [number, number];
  agent?: number[];
  goals?: number[][];
}

export interface StateFrame {
  type: "state";
  episode: number;
  step: number;
  state: number[];
  robot_action: number[];
  render: RenderPayload;
}

export interface MetricsFrame {
  type: "metrics";
  episode: number;
  success_rate: number;
}

export interface ErrorFrame {
  type: "error";
  msg: string;
}

export interface LandscapeFrame {
  type: "landscape";
  resolution: number;
  low: number;
  high: number;
  energies: number[][];
}

export type ServerFrame = StateFrame | MetricsFrame | ErrorFrame | LandscapeFrame;

export interface FeedbackFrame {
  type: "feedback";
  kind: "absolute" | "relative";
  vector: number[];
  /** The step being corrected; delayed gestures still attach correctly. */
  episode?: number;
  step?: number;
}

export interface ControlFrame {
  type: "control";
  cmd: "pause" | "resume" | "reset" | "train_now" | "set_method" | "dump_landscape";
  method?: string;
}

export type ClientFrame = FeedbackFrame | ControlFrame;

function isNumberArray(x: unknown): x is number[] {
  return Array.isArray(x) && x.every((v) => typeof v === "number" && Number.isFinite(v));
}

/** Parse one server message; returns null for anything malformed. */
export function parseServerFrame(text: string): ServerFrame | null {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const frame = data as Record<string, unknown>;
  switch (frame.type) {
    case "state": {
      if (
        typeof frame.episode !== "number" ||
        typeof frame.step !== "number" ||
        !isNumberArray(frame.state) ||
        !isNumberArray(frame.robot_action) ||
        typeof frame.render !== "object" ||
        frame.render === null
      ) {
        return null;
      }
      return frame as unknown as StateFrame;
    }
    case "metrics": {
      if (typeof frame.episode !== "number" || typeof frame.success_rate !== "number") {
        return null;
      }
      return frame as unknown as MetricsFrame;
    }
    case "error": {
      if (typeof frame.msg !== "string") return null;
      return frame as unknown as ErrorFrame;
    }
    case "landscape": {
      if (
        typeof frame.resolution !== "number" ||
        !Array.isArray(frame.energies) ||
        !frame.energies.every(isNumberArray)
      ) {
        return null;
      }
      return frame as unknown as LandscapeFrame;
    }
    default:
      return null;
  }
}

export function encodeClientFrame(frame: ClientFrame): string {
  return JSON.stringify(frame);
}
