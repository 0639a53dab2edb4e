"""Live session service.

A :class:`LiveSession` owns the protocol cursor, the engine, and the log
for one human participant; it is plain synchronous logic driven by
``handle()`` (input messages) and ``tick()`` (simulated milliseconds), so
it can be exercised without any transport. The FastAPI layer adds the
``/ws`` endpoint, pacing, and snapshot broadcasting.

Pacing modes: ``wall`` runs a background task that advances the engine at
the device rate against the wall clock; ``client`` advances a fixed
number of steps per participant input message, which makes scripted
clients fully deterministic. Both share the exact engine path used by
the headless runner, so a live release at elongation e produces the same
record as a scripted one.
"""
from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .engine import APPROACH_START_MM, ShotContext, ShotPhase, ShotSim, finalize_shot
from .metrics import ShotRecord, aggregate_trial
from .protocol import DONE, FootPrompt, GroupCondition, PhasePrompt, TrialSpec
from .runner import (SCORE_DISPLAY_MS, SessionConfig, slide_animation_ms)
from .session_io import SessionLogger

SNAPSHOT_HZ = 60
DEFAULT_TICKS_PER_MOVE = 16  # ms of simulation per client input message


@dataclass
class _TrialState:
    spec: TrialSpec
    shot_number: int = 0
    records: list = field(default_factory=list)
    started: bool = False


class LiveSession:
    """Single-participant session state machine (transport-free)."""

    def __init__(self, cfg: SessionConfig, out_dir: Optional[str | Path] = None,
                 auto_advance: bool = False):
        from .protocol import build_plan

        self.cfg = cfg
        self.plan = build_plan(cfg.participant_id, cfg.condition, cfg.protocol_seed)
        self.auto_advance = auto_advance
        self.cursor = 0
        self.day = 1
        self.t_ms = 0
        self.paused = False
        self.started = False
        self.done = False
        self.total_score = 0
        self.trial_score = 0
        self.records: list[ShotRecord] = []
        self.sim: Optional[ShotSim] = None
        self.trial: Optional[_TrialState] = None
        self.cooldown_ms = 0
        self.last_result: Optional[dict] = None
        self.target_position_mm = APPROACH_START_MM
        self.button_down = False
        self.out_dir = Path(out_dir) if out_dir else None
        self._logger: Optional[SessionLogger] = None
        self._enter_item()

    # -- logging -----------------------------------------------------------

    def _open_day_log(self):
        # deferred to the first advance so a pre-start condition assignment
        # is reflected in the manifest
        if self.out_dir is None:
            return
        session_dir = self.out_dir / self.cfg.participant_id
        session_dir.mkdir(parents=True, exist_ok=True)
        manifest_path = session_dir / "manifest.json"
        if not manifest_path.exists():
            manifest_path.write_text(json.dumps(self.cfg.manifest(), indent=2) + "\n")
        self._logger = SessionLogger(session_dir / f"day{self.day}.jsonl")
        self._log("SessionStarted", manifest=dict(self.cfg.manifest(), day=self.day))

    def _log(self, event_type: str, **payload):
        if self._logger is not None:
            self._logger.append(event_type, self.t_ms, **payload)

    # -- cursor ------------------------------------------------------------

    def current_item(self):
        return self.plan.items[self.cursor]

    def _enter_item(self):
        """Set up state for the item under the cursor."""
        item = self.current_item()
        if item is DONE:
            self.done = True
            self._log("SessionEnded", totalScore=self.total_score)
            if self._logger:
                self._logger.close()
                self._logger = None
            return
        if isinstance(item, TrialSpec):
            self.trial = _TrialState(spec=item)
            self.trial_score = 0
            self._begin_shot()

    def _begin_shot(self):
        self.sim = ShotSim(self.trial.spec.spring, self.cfg.device, start_ms=self.t_ms)
        self.target_position_mm = APPROACH_START_MM
        self.button_down = False
        if not self.trial.started:
            self.trial.started = True
            self._log("TrialStarted", trial=self.trial.spec.to_wire())

    def _advance_cursor(self):
        item = self.current_item()
        if isinstance(item, PhasePrompt):
            if item.day_boundary:
                self._log("SessionEnded", totalScore=self.total_score)
                if self._logger:
                    self._logger.close()
                self.day = 2
                self.t_ms = 0
                self._logger = None
                self._open_day_log()
            else:
                self._log("PhaseEntered", phase=item.phase.value)
        elif isinstance(item, FootPrompt):
            self._log("FootPrompt", toPosition=item.to_position)
        self.cursor += 1
        self._enter_item()

    # -- message handling ----------------------------------------------------

    def handle(self, role: str, message: dict) -> list[dict]:
        """Apply one wire message; returns messages to broadcast."""
        kind = message.get("type")
        if kind == "move":
            return self._handle_move(float(message["x"]))
        if kind == "button_down":
            self.button_down = True
            return []
        if kind == "button_up":
            if not self.button_down:
                return [{"type": "error", "error": "protocol-violation",
                         "detail": "release without a preceding press"}]
            self.button_down = False
            return []
        if kind == "experimenter":
            if role != "experimenter":
                return [{"type": "error", "error": "forbidden",
                         "detail": "participant cannot issue experimenter commands"}]
            return self._handle_command(message)
        return [{"type": "error", "error": "unknown-message", "detail": str(kind)}]

    def _handle_move(self, x: float) -> list[dict]:
        self.target_position_mm = x
        return []

    def _handle_command(self, message: dict) -> list[dict]:
        command = message.get("command")
        if command == "pause":
            self.paused = not self.paused
            return [{"type": "ack", "command": "pause", "paused": self.paused}]
        if command == "assign_condition":
            if self.started or self.cursor != 0:
                return [{"type": "error", "error": "protocol-violation",
                         "detail": "condition can only be assigned before the session starts"}]
            condition = GroupCondition(message["condition"])
            from .protocol import build_plan
            self.cfg.condition = condition
            self.plan = build_plan(self.cfg.participant_id, condition, self.cfg.protocol_seed)
            return [{"type": "ack", "command": "assign_condition",
                     "condition": condition.value}]
        if command == "advance":
            item = self.current_item()
            if self.done or isinstance(item, TrialSpec):
                return [{"type": "error", "error": "protocol-violation",
                         "detail": "advance is only legal at a prompt"}]
            if not self.started:
                self.started = True
                self._open_day_log()
            prompt = self._prompt_payload(item)
            self._advance_cursor()
            return [{"type": "ack", "command": "advance", "passed": prompt,
                     "cursor": self.cursor}]
        return [{"type": "error", "error": "unknown-command", "detail": str(command)}]

    # -- simulation ----------------------------------------------------------

    def tick(self, n_ms: int) -> list[dict]:
        """Advance the engine n_ms simulated milliseconds toward the
        commanded position; returns messages to broadcast."""
        out: list[dict] = []
        if self.paused or self.done or self.trial is None:
            return out
        if self.sim is None and self.cooldown_ms <= 0:
            return out
        step_ms = self.cfg.device.step_ms
        remaining_ms = max(0, n_ms // step_ms) * step_ms
        while remaining_ms > 0:
            if self.cooldown_ms > 0:
                used = min(self.cooldown_ms, remaining_ms)
                self.cooldown_ms -= used
                self.t_ms += used
                remaining_ms -= used
                if self.cooldown_ms <= 0:
                    out.extend(self._next_shot_or_trial())
                    if self.trial is None or self.sim is None:
                        break
                continue
            dt_s = step_ms / 1000.0
            delta = self.target_position_mm - self.sim.state.position_mm
            velocity = delta / dt_s
            event = self.sim.step(velocity, self.button_down)
            self.t_ms = self.sim.state.timestamp_ms
            remaining_ms -= step_ms
            if event is not None and event.kind == "grab":
                self._log("Grab", anchor=event.anchor_mm)
            if event is not None and event.kind == "release":
                out.extend(self._finish_shot(event))
        return out

    def _finish_shot(self, release) -> list[dict]:
        spec = self.trial.spec
        ctx = ShotContext(
            participant_id=self.cfg.participant_id,
            condition=self.cfg.condition.value,
            phase=spec.phase.value,
            trial_index=spec.trial_index,
            shot_number=self.trial.shot_number,
            is_catch=spec.is_catch,
            is_transfer=spec.is_transfer,
            foot_position=spec.foot_position,
            training_trial_number=spec.training_trial_number,
        )
        record = finalize_shot(self.sim, release, ctx, self.cfg.physics,
                               self.cfg.board, self.sim.state.timestamp_ms)
        self.trial.records.append(record)
        self.records.append(record)
        self._log("TraceChunk", positions=self._decimated_trace())
        self._log("Release", aborted=False, force=record.release_force_n,
                  elongation=record.release_elongation_mm)
        anim_ms = slide_animation_ms(record.landing)
        self._log("Landed", distance=record.landing)
        self._log("Scored", points=record.score)
        self.trial_score += record.score
        self.total_score += record.score
        self.cooldown_ms = anim_ms + SCORE_DISPLAY_MS
        self.last_result = {
            "type": "shot_result",
            "landing": record.landing,
            "points": record.score,
            "animationS": anim_ms / 1000.0,
            "shotNumber": self.trial.shot_number,
        }
        self.trial.shot_number += 1
        self.sim = None
        return [self.last_result]

    def abort_active_shot(self, reason: str = "disconnect") -> None:
        """Abort a grabbed shot (e.g. the participant dropped mid-pull)."""
        if self.sim is None or self.trial is None:
            return
        if self.sim.phase is not ShotPhase.GRABBED:
            self.sim = ShotSim(self.trial.spec.spring, self.cfg.device, start_ms=self.t_ms)
            return
        spec = self.trial.spec
        ctx = ShotContext(
            participant_id=self.cfg.participant_id,
            condition=self.cfg.condition.value,
            phase=spec.phase.value,
            trial_index=spec.trial_index,
            shot_number=self.trial.shot_number,
            is_catch=spec.is_catch,
            is_transfer=spec.is_transfer,
            foot_position=spec.foot_position,
            training_trial_number=spec.training_trial_number,
        )
        record = finalize_shot(self.sim, None, ctx, self.cfg.physics,
                               self.cfg.board, self.sim.state.timestamp_ms)
        self.trial.records.append(record)
        self.records.append(record)
        self._log("TraceChunk", positions=self._decimated_trace())
        self._log("Release", aborted=True, force=None, elongation=None)
        self.trial.shot_number += 1
        self._next_shot_or_trial()

    def _decimated_trace(self) -> list[float]:
        from .runner import _decimate
        if self.sim is None:
            return []
        return _decimate(self.sim.trace_mm, self.cfg.device.step_ms,
                         self.cfg.device.trace_hz)

    def _next_shot_or_trial(self) -> list[dict]:
        spec = self.trial.spec
        if self.trial.shot_number >= spec.shots_per_trial:
            agg = aggregate_trial(self.trial.records, self.cfg.participant_id,
                                  spec.phase.value, spec.trial_index)
            self._log("TrialEnded", aggregate=agg.to_wire(),
                      shots=[r.to_wire() for r in self.trial.records])
            summary = {"type": "trial_summary", "aggregate": agg.to_wire()}
            self.trial = None
            self.sim = None
            self.cursor += 1
            self._enter_item()
            if self.auto_advance:
                while not self.done and not isinstance(self.current_item(), TrialSpec):
                    self._advance_cursor()
            return [summary]
        self._begin_shot()
        return []

    # -- snapshots -----------------------------------------------------------

    def _prompt_payload(self, item) -> Optional[dict]:
        if isinstance(item, PhasePrompt):
            if item.day_boundary:
                return {"kind": "phase", "phase": "DayBoundary"}
            return {"kind": "phase", "phase": item.phase.value}
        if isinstance(item, FootPrompt):
            return {"kind": "foot", "toPosition": item.to_position}
        return None

    def snapshot(self) -> dict:
        grabbed = self.sim is not None and self.sim.phase is ShotPhase.GRABBED
        in_animation = self.cooldown_ms > SCORE_DISPLAY_MS
        item = self.current_item() if not self.done else None
        phase_name = None
        if isinstance(item, TrialSpec):
            phase_name = item.phase.value
        return {
            "type": "state",
            "phase": self.sim.phase.value if self.sim is not None else
                     ("Cooldown" if self.cooldown_ms > 0 else "Idle"),
            "phaseName": phase_name,
            "cursorPosition": self.sim.state.position_mm if self.sim is not None else None,
            "renderedForce": self.sim.state.rendered_force_n if self.sim is not None else 0.0,
            "elongationHidden": grabbed,
            "cubeVisible": (self.sim is not None) and not grabbed and not in_animation,
            "sphereVisible": (self.sim is not None) and not grabbed,
            "trialScore": self.trial_score,
            "totalScore": self.total_score,
            "shotNumber": self.trial.shot_number if self.trial else None,
            "trialIndex": self.trial.spec.trial_index if self.trial else None,
            "landingAnimation": ({"landing": self.last_result["landing"],
                                  "remainingS": max(0, self.cooldown_ms - SCORE_DISPLAY_MS) / 1000.0}
                                 if in_animation and self.last_result else None),
            "prompt": self._prompt_payload(item) if item is not None else None,
            "paused": self.paused,
            "done": self.done,
            "day": self.day,
            "cursor": self.cursor,
        }


class ClientOutbox:
    """Per-connection delivery: events are queued reliably, snapshots are a
    latest-wins slot, so a slow client never blocks the producer."""

    def __init__(self):
        self.events: asyncio.Queue = asyncio.Queue()
        self.snapshot: Optional[dict] = None
        self.wake = asyncio.Event()

    def push(self, events: list[dict], snapshot: Optional[dict]):
        for event in events:
            self.events.put_nowait(event)
        if snapshot is not None:
            self.snapshot = snapshot
        self.wake.set()

    async def drain(self) -> list[dict]:
        await self.wake.wait()
        self.wake.clear()
        out = []
        while not self.events.empty():
            out.append(self.events.get_nowait())
        if self.snapshot is not None:
            out.append(self.snapshot)
            self.snapshot = None
        return out


def create_app(session: LiveSession, pacing: str = "client",
               ticks_per_move: int = DEFAULT_TICKS_PER_MOVE,
               static_dir: Optional[str | Path] = None):
    """FastAPI app exposing /ws, /health and the session manifest."""
    app = FastAPI(title="springcurl service")
    app.state.session = session
    app.state.outboxes: dict = {}
    app.state.lock = asyncio.Lock()

    @app.get("/health")
    async def health():
        return {"status": "ok", "participant": session.cfg.participant_id}

    @app.get("/session/{participant_id}/manifest")
    async def manifest(participant_id: str):
        if participant_id != session.cfg.participant_id:
            return JSONResponse({"error": "unknown participant"}, status_code=404)
        return session.cfg.manifest()

    def broadcast(messages: list[dict], snapshot: Optional[dict]):
        for outbox in list(app.state.outboxes.values()):
            outbox.push(messages, snapshot)

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket):
        role = websocket.query_params.get("role", "participant")
        await websocket.accept()
        outbox = ClientOutbox()
        app.state.outboxes[websocket] = outbox
        await websocket.send_json({"type": "hello", "role": role,
                                   "participant": session.cfg.participant_id})
        await websocket.send_json(session.snapshot())

        async def sender():
            while True:
                for message in await outbox.drain():
                    await websocket.send_json(message)

        sender_task = asyncio.create_task(sender())
        try:
            while True:
                message = await websocket.receive_json()
                async with app.state.lock:
                    out = session.handle(role, message)
                    if pacing == "client" and role == "participant" \
                            and message.get("type") in ("move", "button_down", "button_up"):
                        out.extend(session.tick(ticks_per_move))
                    broadcast(out, session.snapshot())
        except WebSocketDisconnect:
            pass
        finally:
            sender_task.cancel()
            app.state.outboxes.pop(websocket, None)
            if role == "participant":
                async with app.state.lock:
                    session.abort_active_shot()

    if pacing == "wall":
        @app.on_event("startup")
        async def pacing_loop():
            async def loop():
                interval = 1.0 / SNAPSHOT_HZ
                loop_time = asyncio.get_event_loop().time
                last = loop_time()
                while True:
                    await asyncio.sleep(interval)
                    now = loop_time()
                    n_ms = int((now - last) * 1000.0)
                    last = now
                    async with app.state.lock:
                        out = session.tick(n_ms)
                        snapshot = session.snapshot()
                    broadcast(out, snapshot)
            app.state.pacer = asyncio.create_task(loop())

    if static_dir is not None and Path(static_dir).exists():
        from fastapi.staticfiles import StaticFiles
        app.mount("/app", StaticFiles(directory=str(static_dir), html=True), name="app")

    return app
