"""Live teaching service: WebSocket protocol around the interactive loop.

The session drives episodes at a fixed tick, broadcasting one state frame
per step.  Connected clients may inject corrections (absolute action
clicks or relative direction drags) and control commands; corrections are
attributed to the most recently broadcast step and trigger the same
update schedule as the scripted-teacher loop.  Training, feedback
ingestion, and the environment tick all run on the event loop, so
parameter updates never interleave with a concurrent inference read.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import logging
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from .agents import make_agent
from .buffer import ReplayBuffer
from .config import ENERGY_METHODS, ExperimentConfig
from .ebm import clip_to_box
from .envs import Environment, env_dims
from .errors import ConfigurationError
from .spaces import ABSOLUTE, RELATIVE, ObservedCorrection
from .training import energy_grid, evaluate

log = logging.getLogger(__name__)

CONTROL_COMMANDS = ("pause", "resume", "reset", "train_now", "set_method", "dump_landscape")


class TeachSession:
    """State machine of one teaching service instance."""

    def __init__(self, config: ExperimentConfig, tick_hz: float = 10.0):
        state_dim, action_dim = env_dims(config.env)
        if action_dim != 2:
            raise ConfigurationError("the teaching service needs a 2D action space")
        self.config = config
        self.tick_interval = 0.0 if tick_hz <= 0 else 1.0 / tick_hz
        seq = np.random.SeedSequence(config.seed)
        self.env_rng, self.batch_rng, self.eval_rng = (
            np.random.default_rng(s) for s in seq.spawn(3)
        )
        self.env = Environment(config.env, horizon=config.horizon)
        self.agent = make_agent(config)
        self.buffer = ReplayBuffer(config.buffer_capacity)
        self.clients: set = set()
        self.paused = False
        self.episode = 1
        self.step = 0
        self.state = self.env.reset(self.env_rng)
        self.last_snapshot = None  # (state, action, episode, step)
        # feedback is timestamped against the step it corrects; keep the
        # recent snapshots so delayed client gestures attach to their frame
        self._snapshots = {}
        self._snapshot_order = []
        self._snapshot_limit = 512
        self.eval_history = []  # (episode, success_rate)
        self._task = None

    # -- protocol frames ---------------------------------------------------

    def state_frame(self, action) -> dict:
        return {
            "type": "state",
            "episode": self.episode,
            "step": self.step,
            "state": self.state.tolist(),
            "robot_action": np.asarray(action).tolist(),
            "render": self._render_payload(),
        }

    def _render_payload(self) -> dict:
        kind = self.config.env
        s = self.state
        payload = {"kind": kind, "box": [-1.0, 1.0]}
        if kind == "PointReach2D":
            payload["agent"] = s[:2].tolist()
            payload["goals"] = [s[2:4].tolist()]
        elif kind == "TwoGoal2D":
            payload["agent"] = s[:2].tolist()
            payload["goals"] = [s[2:4].tolist(), s[4:6].tolist()]
        else:
            payload["agent"] = s[: min(2, s.size)].tolist()
            payload["goals"] = []
        return payload

    async def broadcast(self, frame: dict):
        dead = []
        text = json.dumps(frame)
        for ws in list(self.clients):
            try:
                await ws.send_text(text)
            except Exception:
                dead.append(ws)
        for ws in dead:
            self.clients.discard(ws)

    async def send_error(self, ws, msg: str):
        with contextlib.suppress(Exception):
            await ws.send_text(json.dumps({"type": "error", "msg": msg}))

    # -- feedback / control -------------------------------------------------

    def _correction_from_frame(self, frame: dict) -> ObservedCorrection:
        if self.last_snapshot is None:
            raise ValueError("no step to correct yet")
        snapshot = self.last_snapshot
        if "episode" in frame and "step" in frame:
            snapshot = self._snapshots.get((frame["episode"], frame["step"]), snapshot)
        state, action, _, _ = snapshot
        vector = np.asarray(frame.get("vector", ()), dtype=np.float64)
        if vector.shape != (2,) or not np.isfinite(vector).all():
            raise ValueError("feedback vector must be two finite numbers")
        kind = frame.get("kind")
        if kind == "absolute":
            a_h = clip_to_box(vector)
            corr_kind = ABSOLUTE
        elif kind == "relative":
            norm = float(np.linalg.norm(vector))
            if norm <= 0:
                raise ValueError("relative feedback needs a nonzero direction")
            a_h = clip_to_box(action + self.config.relative_magnitude * vector / norm)
            corr_kind = RELATIVE
        else:
            raise ValueError(f"unknown feedback kind {kind!r}")
        if np.array_equal(a_h, action):
            raise ValueError("feedback does not change the action")
        return ObservedCorrection(state, action, a_h, kind=corr_kind)

    async def handle_frame(self, ws, frame: dict):
        ftype = frame.get("type")
        if ftype == "feedback":
            try:
                corr = self._correction_from_frame(frame)
            except ValueError as exc:
                await self.send_error(ws, str(exc))
                return
            self.buffer.append(corr)
            self._update()
        elif ftype == "control":
            await self._handle_control(ws, frame)
        else:
            await self.send_error(ws, f"unknown frame type {ftype!r}")

    async def _handle_control(self, ws, frame: dict):
        cmd = frame.get("cmd")
        if cmd == "pause":
            self.paused = True
        elif cmd == "resume":
            self.paused = False
        elif cmd == "reset":
            self.state = self.env.reset(self.env_rng)
            self.step = 0
        elif cmd == "train_now":
            for _ in range(self.config.n_training):
                self._update()
        elif cmd == "set_method":
            method = frame.get("method")
            try:
                cfg = ExperimentConfig.from_dict({**self.config.to_dict(), "method": method})
            except (ConfigurationError, TypeError) as exc:
                await self.send_error(ws, f"cannot switch method: {exc}")
                return
            self.config = cfg
            self.agent = make_agent(cfg)
        elif cmd == "dump_landscape":
            await self._send_landscape(ws)
        else:
            await self.send_error(ws, f"unknown control command {cmd!r}")

    async def _send_landscape(self, ws, resolution: int = 41):
        if self.config.method not in ENERGY_METHODS:
            await self.send_error(ws, "landscapes exist only for energy-model methods")
            return
        self.agent._ensure_ready()
        axis, energies = energy_grid(self.agent.model_, self.state, resolution)
        await ws.send_text(
            json.dumps(
                {
                    "type": "landscape",
                    "resolution": resolution,
                    "low": float(axis[0]),
                    "high": float(axis[-1]),
                    "energies": energies.tolist(),
                }
            )
        )

    def _update(self):
        if len(self.buffer) == 0:
            return
        self.agent.update(self.buffer.sample(self.config.batch_size, self.batch_rng))

    # -- main loop -----------------------------------------------------------

    async def tick(self):
        if self.paused:
            return
        self.step += 1
        action = self.agent.act(self.state, self.env_rng)
        self.last_snapshot = (self.state.copy(), np.asarray(action), self.episode, self.step)
        key = (self.episode, self.step)
        self._snapshots[key] = self.last_snapshot
        self._snapshot_order.append(key)
        if len(self._snapshot_order) > self._snapshot_limit:
            self._snapshots.pop(self._snapshot_order.pop(0), None)
        await self.broadcast(self.state_frame(action))
        # give queued feedback a chance to attach to this step
        await asyncio.sleep(0)
        if self.step % self.config.update_every == 0:
            self._update()
        self.state, done, _ = self.env.step(action)
        if done:
            for _ in range(self.config.n_training):
                self._update()
            if self.episode % self.config.eval_every == 0:
                sr = evaluate(
                    self.agent, self.config.env, self.config.eval_rollouts,
                    self.eval_rng, self.config.horizon,
                )
                self.eval_history.append((self.episode, sr))
                await self.broadcast(
                    {"type": "metrics", "episode": self.episode, "success_rate": sr}
                )
            self.episode += 1
            self.step = 0
            self.state = self.env.reset(self.env_rng)

    async def run(self):
        while True:
            await self.tick()
            await asyncio.sleep(self.tick_interval)

    def start(self):
        self._task = asyncio.get_event_loop().create_task(self.run())

    async def stop(self):
        if self._task is not None:
            self._task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await self._task


def create_app(config: ExperimentConfig, tick_hz: float = 10.0) -> FastAPI:
    """Teaching service app; serves the console bundle when one is built."""
    session = TeachSession(config, tick_hz=tick_hz)

    @contextlib.asynccontextmanager
    async def lifespan(_app):
        session.start()
        try:
            yield
        finally:
            await session.stop()

    app = FastAPI(title="iilab teaching service", lifespan=lifespan)
    app.state.session = session

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        await websocket.accept()
        session.clients.add(websocket)
        try:
            while True:
                text = await websocket.receive_text()
                try:
                    frame = json.loads(text)
                    if not isinstance(frame, dict):
                        raise ValueError("frame must be a JSON object")
                except ValueError as exc:
                    await session.send_error(websocket, f"malformed frame: {exc}")
                    continue
                await session.handle_frame(websocket, frame)
        except WebSocketDisconnect:
            pass
        finally:
            session.clients.discard(websocket)

    console_dir = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if console_dir.is_dir():
        app.mount("/console", StaticFiles(directory=console_dir, html=True), name="console")

    @app.get("/")
    async def index():
        return HTMLResponse(
            "<h1>iilab teaching service</h1>"
            "<p>WebSocket endpoint at <code>/ws</code>; console at "
            "<code>/console/</code> when the frontend bundle is built.</p>"
        )

    return app


def run_teach_server(config: ExperimentConfig, port: int = 8000, tick_hz: float = 10.0):
    """Blocking entry point used by the command line."""
    import uvicorn

    uvicorn.run(create_app(config, tick_hz=tick_hz), host="127.0.0.1", port=port)
