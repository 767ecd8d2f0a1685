"""Real-time interactive session server.

Runs the simulation loop at wall-clock rate (absolute-deadline scheduling
against a monotonic clock; late ticks run back to back, never coalesce) and
drives the same four-task protocol as the headless harness with a human in
place of the scripted operator.

One asyncio session loop owns every piece of mutable session state. Client
websockets exchange JSON messages with the loop through ordered queues: a
shared inbox for client commands, one bounded outbox per client (oldest
frames are dropped for slow consumers). The first connected client is the
driver; later ones observe.

Wire schema (field names and enum spellings are normative):

* client -> server: ``{"type":"joystick","axis":<real>}``,
  ``{"type":"start_task","task":"training|no_feedback|reactive|predictive"}``,
  ``{"type":"stop_task"}``, ``{"type":"set_blindfold","on":<bool>}``
* server -> client: ``{"type":"state","t":<int>,"angle_deg":<real>,
  "bin":<int>,"load":<int>,"prediction":<real>,"tactor":<bool>,
  "fired_rule":"training|reactive|predictive|none","task":<string>,
  "blindfold":<bool>}``, ``{"type":"task_ended","metrics":{...}}``,
  ``{"type":"error","code":<string>}``, ``{"type":"warning","code":<string>}``
  plus ``{"type":"role","role":"driver|observer"}`` on connect.

Session logs are schema-identical to harness logs; ``compute_metrics`` runs
on them unchanged. The learner mutates only during a training task.
"""

from __future__ import annotations

import asyncio
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket
from starlette.websockets import WebSocketDisconnect

from .errors import ConfigError
from .features import DIRECTIONS, CodecConfig, encode
from .feedback import (FeedbackMode, FeedbackThresholds, FiredRule,
                       TactorLatch, decide)
from .gvf import GvfLearner, load_snapshot, save_snapshot
from .harness import derive_seeds
from .logio import TrialLog, TrialStepRecord, write_log
from .metrics import compute_metrics
from .sim import ArmSim, JoystickCommand, SimConfig

CLIENT_MESSAGE_TYPES = ("joystick", "start_task", "stop_task", "set_blindfold")


class ProtocolViolation(ValueError):
    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code


def parse_client_message(text: str) -> dict:
    """Validate one inbound frame and return it in canonical field order."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        raise ProtocolViolation("bad_json") from None
    if not isinstance(obj, dict):
        raise ProtocolViolation("bad_json")
    mtype = obj.get("type")
    if mtype == "joystick":
        axis = obj.get("axis")
        if not isinstance(axis, (int, float)) or isinstance(axis, bool):
            raise ProtocolViolation("bad_axis")
        return {"type": "joystick", "axis": float(axis)}
    if mtype == "start_task":
        task = obj.get("task")
        try:
            mode = FeedbackMode(task)
        except ValueError:
            raise ProtocolViolation("unknown_task") from None
        return {"type": "start_task", "task": mode.value}
    if mtype == "stop_task":
        return {"type": "stop_task"}
    if mtype == "set_blindfold":
        on = obj.get("on")
        if not isinstance(on, bool):
            raise ProtocolViolation("bad_blindfold_flag")
        return {"type": "set_blindfold", "on": on}
    raise ProtocolViolation("unknown_type")


def serialize_message(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"))


@dataclass
class SessionConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    codec: CodecConfig = field(default_factory=CodecConfig)
    thresholds: FeedbackThresholds = field(default_factory=FeedbackThresholds)
    learner_alpha: float = 0.1
    learner_gamma: float = 0.92
    out_dir: Path = Path("runs/session")
    snapshot_path: Path | None = None  # pre-trained weights to serve test tasks
    seed: int = 0

    def validate(self) -> None:
        self.sim.validate()
        self.codec.validate()
        self.thresholds.validate()
        if self.codec.range_deg != self.sim.range_deg:
            raise ConfigError("codec.range_deg must match sim.range_deg")


class _Client:
    _next_id = 0

    def __init__(self, outbox_size: int = 256):
        _Client._next_id += 1
        self.id = _Client._next_id
        self.role = "observer"
        self.outbox: asyncio.Queue[str] = asyncio.Queue(maxsize=outbox_size)

    def push(self, frame: str) -> None:
        # Drop the oldest frame rather than stall the session loop.
        while True:
            try:
                self.outbox.put_nowait(frame)
                return
            except asyncio.QueueFull:
                try:
                    self.outbox.get_nowait()
                except asyncio.QueueEmpty:
                    pass


class Session:
    """Authoritative state of one interactive session."""

    def __init__(self, config: SessionConfig):
        config.validate()
        self.config = config
        self.clients: dict[int, _Client] = {}
        self.driver_id: int | None = None
        self.inbox: asyncio.Queue[tuple[int, dict]] = asyncio.Queue()

        self.task: FeedbackMode | None = None
        self.blindfold = False
        self.axis = 0.0
        self.sim: ArmSim | None = None
        self.state = None
        self.learner: GvfLearner | None = None
        self.trained: GvfLearner | None = None
        self.latch: TactorLatch | None = None
        self.records: list[TrialStepRecord] = []
        self.task_seed = 0
        self.starts = 0
        self.tick_monotonic: list[float] = []  # per-tick timestamps, current task
        self._t0 = 0.0
        self._stop = asyncio.Event()

        if config.snapshot_path is not None:
            self.trained = load_snapshot(config.snapshot_path)
            self.trained.freeze()

    # -- client registry -------------------------------------------------

    def register(self, client: _Client) -> None:
        self.clients[client.id] = client
        if self.driver_id is None:
            self.driver_id = client.id
            client.role = "driver"
        client.push(serialize_message({"type": "role", "role": client.role}))

    def unregister(self, client: _Client) -> None:
        self.clients.pop(client.id, None)
        if self.driver_id == client.id:
            self.driver_id = None  # next connector can claim the stick

    def _broadcast(self, obj: dict) -> None:
        frame = serialize_message(obj)
        for client in self.clients.values():
            client.push(frame)

    def _send(self, client_id: int, obj: dict) -> None:
        client = self.clients.get(client_id)
        if client is not None:
            client.push(serialize_message(obj))

    # -- message handling (session loop only) ----------------------------

    def handle_message(self, client_id: int, msg: dict) -> None:
        mtype = msg["type"]
        if mtype == "joystick":
            axis = msg["axis"]
            if not -1.0 <= axis <= 1.0:
                self._send(client_id, {"type": "warning", "code": "axis_clamped"})
            if client_id == self.driver_id:
                self.axis = max(-1.0, min(1.0, axis))
            # Observer joysticks are accepted but have no effect.
            return
        if client_id != self.driver_id:
            self._send(client_id, {"type": "error", "code": "not_driver"})
            return
        if mtype == "start_task":
            self._start_task(client_id, FeedbackMode(msg["task"]))
        elif mtype == "stop_task":
            if self.task is None:
                self._send(client_id, {"type": "error", "code": "no_task"})
            else:
                self._finish_task()
        elif mtype == "set_blindfold":
            self.blindfold = msg["on"]

    def _start_task(self, client_id: int, task: FeedbackMode) -> None:
        if self.task is not None:
            self._send(client_id, {"type": "error", "code": "task_active"})
            return
        if task in (FeedbackMode.REACTIVE, FeedbackMode.PREDICTIVE) and self.trained is None:
            self._send(client_id, {"type": "error", "code": "no_snapshot"})
            return
        if task is FeedbackMode.TRAINING:
            self.learner = GvfLearner(self.config.codec.length,
                                      self.config.learner_alpha,
                                      self.config.learner_gamma)
        elif task is FeedbackMode.NO_FEEDBACK:
            zero = GvfLearner(self.config.codec.length, 0.0, self.config.learner_gamma)
            zero.freeze()
            self.learner = zero
        else:
            self.learner = self.trained

        self.starts += 1
        self.task_seed = int(np.random.SeedSequence(
            (self.config.seed, self.starts)).generate_state(1)[0])
        self.sim = ArmSim(SimConfig(**{
            **{f: getattr(self.config.sim, f) for f in SimConfig.__dataclass_fields__},
            "rng_seed": derive_seeds(self.task_seed)[0],
        }))
        self.state = self.sim.reset()
        self.latch = TactorLatch(self.config.thresholds.min_on_ms, self.config.sim.dt_ms)
        self.records = []
        self.tick_monotonic = []
        self.task = task
        self.blindfold = task is not FeedbackMode.TRAINING
        self._t0 = time.monotonic()

    def tick(self) -> None:
        """One 20 Hz step: sense, predict, decide, act, step, learn, stream."""
        assert self.task is not None and self.sim is not None and self.state is not None
        self.tick_monotonic.append(time.monotonic())
        cfg = self.config
        x_t = encode(self.state.angle_deg, self.state.velocity_deg_s, cfg.codec)
        prediction = self.learner.predict(x_t)
        decision = self.latch.apply(
            decide(self.task, self.state.load, prediction, cfg.thresholds))
        cmd = JoystickCommand(axis=self.axis)
        next_state = self.sim.step(self.state, cmd)
        if self.task is FeedbackMode.TRAINING:
            x_next = encode(next_state.angle_deg, next_state.velocity_deg_s, cfg.codec)
            self.learner.update(x_t, float(next_state.load), x_next)
        self.records.append(TrialStepRecord(
            t=self.state.t,
            angle_deg=self.state.angle_deg,
            velocity_deg_s=self.state.velocity_deg_s,
            bin=x_t.state_index // DIRECTIONS,
            load=self.state.load,
            prediction=prediction,
            tactor_on=decision.tactor_on,
            fired_rule=decision.fired_rule,
            joystick_axis=cmd.axis,
            in_contact=self.state.in_contact,
        ))
        self._broadcast({
            "type": "state",
            "t": self.state.t,
            "angle_deg": self.state.angle_deg,
            "bin": x_t.state_index // DIRECTIONS,
            "load": self.state.load,
            "prediction": prediction,
            "tactor": decision.tactor_on,
            "fired_rule": decision.fired_rule.value,
            "task": self.task.value,
            "blindfold": self.blindfold,
        })
        self.state = next_state

    def _finish_task(self) -> None:
        assert self.task is not None
        task = self.task
        self.task = None
        log = TrialLog(
            task=task.value,
            duration_ticks=len(self.records),
            dt_ms=self.config.sim.dt_ms,
            seed=self.task_seed,
            num_bins=self.config.codec.num_bins,
            records=tuple(self.records),
        )
        out = Path(self.config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_log(log, out / f"{task.value}-{self.starts}.log")
        metrics = compute_metrics(log)
        if task is FeedbackMode.TRAINING:
            self.learner.freeze()
            self.trained = self.learner
            save_snapshot(self.trained, out / "snapshot.json")
        self._broadcast({"type": "task_ended", "metrics": metrics.as_dict()})

    # -- main loop --------------------------------------------------------

    def stop(self) -> None:
        self._stop.set()

    async def run(self) -> None:
        """Single owner of session state; exits when :meth:`stop` is called."""
        stop_wait = asyncio.create_task(self._stop.wait())
        try:
            while not self._stop.is_set():
                if self.task is None:
                    inbox_get = asyncio.create_task(self.inbox.get())
                    done, _ = await asyncio.wait(
                        {inbox_get, stop_wait}, return_when=asyncio.FIRST_COMPLETED)
                    if inbox_get in done:
                        client_id, msg = inbox_get.result()
                        self.handle_message(client_id, msg)
                    else:
                        inbox_get.cancel()
                    continue
                # Active task: drain messages until the next tick deadline.
                deadline = self._t0 + (len(self.tick_monotonic) + 1) * self.config.sim.dt_s
                while True:
                    delay = deadline - time.monotonic()
                    if delay <= 0:
                        break
                    try:
                        client_id, msg = await asyncio.wait_for(self.inbox.get(), timeout=delay)
                    except asyncio.TimeoutError:
                        break
                    self.handle_message(client_id, msg)
                    if self.task is None:
                        break
                if self.task is not None:
                    self.tick()
        finally:
            stop_wait.cancel()


def create_app(config: SessionConfig, static_dir: Path | None = None) -> FastAPI:
    """FastAPI app hosting one session: /ws plus optional static client."""
    import contextlib

    session = Session(config)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        loop_task = asyncio.create_task(session.run())
        yield
        session.stop()
        with contextlib.suppress(asyncio.CancelledError):
            await loop_task

    app = FastAPI(lifespan=lifespan)
    app.state.session = session

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "task": session.task.value if session.task else "idle"}

    @app.websocket("/ws")
    async def ws_endpoint(sock: WebSocket):
        await sock.accept()
        client = _Client()
        session.register(client)

        async def writer():
            while True:
                frame = await client.outbox.get()
                await sock.send_text(frame)

        writer_task = asyncio.create_task(writer())
        try:
            while True:
                text = await sock.receive_text()
                try:
                    msg = parse_client_message(text)
                except ProtocolViolation as exc:
                    client.push(serialize_message({"type": "error", "code": exc.code}))
                    continue
                session.inbox.put_nowait((client.id, msg))
        except WebSocketDisconnect:
            pass
        finally:
            writer_task.cancel()
            session.unregister(client)

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="client")

    return app
