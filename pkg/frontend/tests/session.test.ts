import { describe, expect, it } from "vitest";

import { parseServerFrame } from "../src/protocol.js";
import { applyMessage, initialView } from "../src/session.js";

function stateFrameText(episode: number, step: number, agent = [0.1, 0.2]): string {
  return JSON.stringify({
    type: "state",
    episode,
    step,
    state: [...agent, 0.5, 0.5],
    robot_action: [0.3, -0.3],
    render: { kind: "PointReach2D", box: [-1, 1], agent, goals: [[0.5, 0.5]] },
  });
}

describe("session reducer", () => {
  it("renders ten frames in order", () => {
    let view = initialView();
    for (let step = 1; step <= 10; step++) {
      view = applyMessage(view, parseServerFrame(stateFrameText(1, step)));
      expect(view.latest?.step).toBe(step);
    }
    expect(view.framesSeen).toBe(10);
    expect(view.droppedFrames).toBe(0);
  });

  it("drops malformed frames and flags an error", () => {
    let view = initialView();
    view = applyMessage(view, parseServerFrame("not json at all"));
    expect(view.droppedFrames).toBe(1);
    expect(view.lastError).toBe("malformed frame");
    view = applyMessage(view, parseServerFrame(JSON.stringify({ type: "state", episode: "x" })));
    expect(view.droppedFrames).toBe(2);
    // the session keeps accepting good frames afterwards
    view = applyMessage(view, parseServerFrame(stateFrameText(1, 1)));
    expect(view.framesSeen).toBe(1);
  });

  it("clears the trail on a new episode", () => {
    let view = initialView();
    view = applyMessage(view, parseServerFrame(stateFrameText(1, 1, [0.0, 0.0])));
    view = applyMessage(view, parseServerFrame(stateFrameText(1, 2, [0.1, 0.0])));
    expect(view.trail.length).toBe(2);
    view = applyMessage(view, parseServerFrame(stateFrameText(2, 1, [0.5, 0.5])));
    expect(view.trail).toEqual([[0.5, 0.5]]);
  });

  it("accumulates metrics frames", () => {
    let view = initialView();
    view = applyMessage(
      view,
      parseServerFrame(JSON.stringify({ type: "metrics", episode: 5, success_rate: 0.4 })),
    );
    expect(view.metrics).toEqual([{ episode: 5, successRate: 0.4 }]);
  });

  it("is a pure function of the frame stream (replayable)", () => {
    const stream = [
      stateFrameText(1, 1),
      JSON.stringify({ type: "metrics", episode: 1, success_rate: 0.2 }),
      "garbage",
      stateFrameText(1, 2),
      JSON.stringify({ type: "error", msg: "boom" }),
    ];
    const run = () => {
      let view = initialView();
      const views = [];
      for (const text of stream) {
        view = applyMessage(view, parseServerFrame(text));
        views.push(view);
      }
      return views;
    };
    expect(run()).toEqual(run());
  });
});
