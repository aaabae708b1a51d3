"""Live simulation bridge: a 30 Hz world per client over websockets.

All state evolution lives in LiveSession, a pure tick-driven state machine
with no clocks or sockets, so a scripted sequence of inbound messages
reproduces the exact same world_state stream whether it arrives over the
wire or is fed to the session directly. The network layer only paces ticks
and moves JSON text frames.

Protocol (one JSON object per frame, every message carries ``seq``):

inbound   person_pose{x, y, heading, t} | select_controller{kind} | reset{scenario}
outbound  world_state{t, drone, person, u_commanded, s_pose_true, s_pose_estimated}
          status{tick_rate, controller} | error{message}
"""
from __future__ import annotations

import asyncio
import json
import logging
import threading
from collections import deque
from dataclasses import replace

import numpy as np

from .camera import observe
from .config import WorkbenchConfig
from .core import Odometry, Pose3
from .pipeline import ApproachKind, TrainedApproach, predict_control
from .sim import SCENARIO_NAMES, make_scenario, relative_head_state, body_odometry, step

log = logging.getLogger(__name__)

INBOUND_TAGS = ("person_pose", "select_controller", "reset")


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


class LiveSession:
    """One client's isolated world, controller selection, and sequence state."""

    def __init__(
        self,
        approaches: dict[str, TrainedApproach],
        config: WorkbenchConfig | None = None,
        scenario: str = "still",
        seed: int = 0,
    ):
        if ApproachKind.GROUND_TRUTH.value not in approaches:
            raise ValueError("the ground-truth controller must always be available")
        self.approaches = approaches
        self.config = config or WorkbenchConfig()
        self.seed = seed
        self.controller = ApproachKind.GROUND_TRUTH.value
        self._seq_out = 0
        self._last_seq_in: int | None = None
        self._resets = 0
        self._external = False
        self._pending_pose: tuple[float, float, float] | None = None
        self._last_estimate: list[float] | None = None
        self.reset(scenario)

    # -- message handling -------------------------------------------------

    def _next_seq(self) -> int:
        self._seq_out += 1
        return self._seq_out

    def _error(self, message: str) -> dict:
        return {"tag": "error", "seq": self._next_seq(), "message": message}

    def status_message(self, tick_rate: float = 30.0) -> dict:
        return {
            "tag": "status",
            "seq": self._next_seq(),
            "tick_rate": tick_rate,
            "controller": self.controller,
        }

    def reset(self, scenario: str) -> None:
        if scenario not in SCENARIO_NAMES:
            raise ValueError(f"unknown scenario {scenario!r}")
        scen = make_scenario(scenario, seed=self.seed + self._resets, params=self.config.sim)
        self._resets += 1
        self.scenario = scen
        self.world = scen.world
        self._external = False
        self._pending_pose = None
        self._cam_rng = np.random.default_rng(
            np.random.SeedSequence((self.seed, self.config.camera.seed, self._resets))
        )

    def handle_raw(self, raw) -> list[dict]:
        try:
            msg = json.loads(raw)
        except (ValueError, TypeError):
            return [self._error("malformed message: not valid JSON")]
        if not isinstance(msg, dict):
            return [self._error("malformed message: expected an object")]
        return self.handle(msg)

    def handle(self, msg: dict) -> list[dict]:
        tag = msg.get("tag")
        seq = msg.get("seq")
        if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
            return [self._error("missing or invalid seq")]
        if self._last_seq_in is not None and seq <= self._last_seq_in:
            return [self._error(f"seq {seq} not greater than {self._last_seq_in}")]
        self._last_seq_in = seq

        if tag == "person_pose":
            if not all(_is_number(msg.get(k)) for k in ("x", "y", "heading", "t")):
                return [self._error("person_pose requires numeric x, y, heading, t")]
            half = self.config.sim.arena_half_extent
            x = min(max(float(msg["x"]), -half), half)
            y = min(max(float(msg["y"]), -half), half)
            self._pending_pose = (x, y, float(msg["heading"]))
            return []

        if tag == "select_controller":
            kind = msg.get("kind")
            if kind not in self.approaches:
                loaded = sorted(self.approaches)
                return [self._error(f"controller {kind!r} not loaded (available: {loaded})")]
            self.controller = kind
            return [self.status_message()]

        if tag == "reset":
            scenario = msg.get("scenario")
            try:
                self.reset(scenario)
            except (ValueError, TypeError) as exc:
                return [self._error(str(exc))]
            return [self.status_message()]

        return [self._error(f"unknown tag {tag!r}")]

    # -- simulation -------------------------------------------------------

    def _apply_external(self) -> None:
        if self._pending_pose is None:
            # held between messages: position persists, velocity decays
            if self._external and self.world.person.vel != (0.0, 0.0):
                self.world = replace(
                    self.world, person=replace(self.world.person, vel=(0.0, 0.0))
                )
            return
        x, y, heading = self._pending_pose
        self._pending_pose = None
        self._external = True
        person = self.world.person
        dt = self.config.sim.dt
        vel = ((x - person.pose.x) / dt, (y - person.pose.y) / dt)
        pose = Pose3(x, y, person.pose.z, heading)
        self.world = replace(
            self.world, person=replace(person, pose=pose, vel=vel, target_xy=None)
        )

    def tick(self) -> dict:
        """Advance one step and emit the world_state message."""
        self._apply_external()
        app = self.approaches[self.controller]
        im = observe(self.world, self.config.camera, self._cam_rng)
        odom = Odometry(*body_odometry(self.world.drone))
        true_s = relative_head_state(self.world)
        u = predict_control(app, im, odom, true_s)

        if app.kind in (ApproachKind.A1, ApproachKind.A3):
            self._last_estimate = [float(v) for v in np.atleast_2d(app.m1.predict(im.as_array()))[0]]
        else:
            self._last_estimate = None

        person_rng = None if self._external else self.scenario.person_rng
        self.world = step(self.world, u, self.config.sim, person_rng)

        d = self.world.drone
        p = self.world.person.pose
        s = relative_head_state(self.world)
        return {
            "tag": "world_state",
            "seq": self._next_seq(),
            "t": self.world.t,
            "drone": {
                "x": d.pose.x,
                "y": d.pose.y,
                "z": d.pose.z,
                "heading": d.pose.heading,
                "vx": d.vel[0],
                "vy": d.vel[1],
                "vz": d.vel[2],
            },
            "person": {"x": p.x, "y": p.y, "z": p.z, "heading": p.heading},
            "u_commanded": [u.u_ax, u.u_ay, u.u_vz, u.u_wz],
            "s_pose_true": [s.s_x, s.s_y, s.s_z, s.s_theta],
            "s_pose_estimated": self._last_estimate,
        }


def run_session_script(
    approaches: dict[str, TrainedApproach],
    script: dict[int, list[dict]],
    n_ticks: int,
    config: WorkbenchConfig | None = None,
    scenario: str = "still",
    seed: int = 0,
) -> tuple[list[dict], list[dict]]:
    """Drive a LiveSession offline: script maps tick index -> inbound messages.

    Returns (world_state messages, reply messages); the reference for
    wire-level equality tests.
    """
    session = LiveSession(approaches, config, scenario=scenario, seed=seed)
    states: list[dict] = []
    replies: list[dict] = []
    for k in range(n_ticks):
        for msg in script.get(k, []):
            replies.extend(session.handle(msg))
        states.append(session.tick())
    return states, replies


async def _client_loop(ws, factory, status_every: int = 30):
    session: LiveSession = factory()
    inbox: asyncio.Queue = asyncio.Queue()
    closed = asyncio.Event()

    async def reader():
        try:
            async for raw in ws:
                await inbox.put(raw)
        except Exception:
            pass
        finally:
            closed.set()

    reader_task = asyncio.create_task(reader())
    loop = asyncio.get_running_loop()
    dt = session.config.sim.dt
    recent: deque[float] = deque(maxlen=60)
    await ws.send(json.dumps(session.status_message()))
    # Sleep first, then drain and step: inbound messages sent right after a
    # world_state frame are guaranteed to apply to the next tick, so scripted
    # lockstep clients see deterministic message-to-tick assignment.
    next_t = loop.time() + dt
    ticks = 0
    try:
        while not closed.is_set():
            now = loop.time()
            delay = next_t - now
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_t = now  # fell behind; resync rather than burst
            next_t += dt
            while True:
                try:
                    raw = inbox.get_nowait()
                except asyncio.QueueEmpty:
                    break
                for reply in session.handle_raw(raw):
                    await ws.send(json.dumps(reply))
            await ws.send(json.dumps(session.tick()))
            recent.append(loop.time())
            ticks += 1
            if ticks % status_every == 0:
                span = recent[-1] - recent[0]
                rate = (len(recent) - 1) / span if span > 0 else 0.0
                await ws.send(json.dumps(session.status_message(round(rate, 2))))
    except Exception:
        log.debug("client loop ended", exc_info=True)
    finally:
        reader_task.cancel()


class BridgeServer:
    """Threaded websocket bridge, one isolated LiveSession per connection."""

    def __init__(
        self,
        approaches: dict[str, TrainedApproach],
        config: WorkbenchConfig | None = None,
        host: str = "127.0.0.1",
        port: int = 0,
        seed: int = 0,
    ):
        self.approaches = approaches
        self.config = config or WorkbenchConfig()
        self.host = host
        self.port = port
        self.seed = seed
        self._thread: threading.Thread | None = None
        self._loop: asyncio.AbstractEventLoop | None = None
        self._stop: asyncio.Future | None = None
        self._ready = threading.Event()

    def _factory(self) -> LiveSession:
        return LiveSession(self.approaches, self.config, seed=self.seed)

    async def _main(self):
        from websockets.asyncio.server import serve

        self._loop = asyncio.get_running_loop()
        self._stop = self._loop.create_future()

        async def handler(ws):
            await _client_loop(ws, self._factory)

        async with serve(handler, self.host, self.port) as server:
            self.port = server.sockets[0].getsockname()[1]
            self._ready.set()
            log.info("bridge listening on %s:%d", self.host, self.port)
            await self._stop

    def start(self) -> int:
        self._thread = threading.Thread(target=lambda: asyncio.run(self._main()), daemon=True)
        self._thread.start()
        if not self._ready.wait(timeout=10):
            raise RuntimeError("bridge server failed to start")
        return self.port

    def stop(self) -> None:
        if self._loop and self._stop and not self._stop.done():
            self._loop.call_soon_threadsafe(self._stop.set_result, None)
        if self._thread:
            self._thread.join(timeout=5)


def serve_bridge(
    approaches: dict[str, TrainedApproach],
    config: WorkbenchConfig | None = None,
    host: str = "127.0.0.1",
    port: int = 8765,
    seed: int = 0,
) -> None:
    """Run the bridge in the foreground until interrupted."""
    server = BridgeServer(approaches, config, host=host, port=port, seed=seed)
    server.start()
    try:
        while True:
            threading.Event().wait(3600)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
