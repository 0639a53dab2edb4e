"""Headless session execution.

Walks a compiled plan with a synthetic subject, drives the engine shot by
shot, and writes the two per-day event logs plus the manifest. All
timing is simulated: the engine contributes step time, and the landing
animation (slide distance over the sped-up playback rate) plus the score
display add fixed offsets so logs carry a plausible session clock.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .engine import DeviceConfig, ShotContext, run_shot
from .errors import ShotTimeoutError
from .metrics import ShotRecord, TrialAggregate, aggregate_trial
from .physics import PhysicsParams, TargetBoard
from .protocol import (DONE, FootPrompt, GroupCondition, PhaseKind, PhasePrompt,
                       SessionPlan, TrialSpec, build_plan)
from .session_io import SESSION_SCHEMA_VERSION, write_log
from .subjects import PolicyParams, Subject, TraitProfile

CUBE_ANIM_SPEED_GU_S = 5.0
SLIDE_SPEEDUP = 20.0
SCORE_DISPLAY_MS = 3000


def slide_animation_ms(landing: float, speed_gu_s: float = CUBE_ANIM_SPEED_GU_S) -> int:
    return int(round(landing / (speed_gu_s * SLIDE_SPEEDUP) * 1000.0))


@dataclass
class SessionConfig:
    participant_id: str
    condition: GroupCondition
    protocol_seed: int
    subject_seed: int
    traits: TraitProfile = field(default_factory=TraitProfile)
    policy: PolicyParams = field(default_factory=PolicyParams)
    mix_weight: float = 0.0
    day_gap_days: float = 1.0
    physics: PhysicsParams = field(default_factory=PhysicsParams)
    board: TargetBoard = field(default_factory=TargetBoard)
    device: DeviceConfig = field(default_factory=DeviceConfig)

    def manifest(self) -> dict:
        return {
            "schemaVersion": SESSION_SCHEMA_VERSION,
            "participantId": self.participant_id,
            "condition": self.condition.value,
            "seeds": {"protocol": self.protocol_seed, "subject": self.subject_seed},
            "dayGapDays": self.day_gap_days,
            "traits": self.traits.to_wire(),
            "policyParams": self.policy.to_wire(),
            "mixWeight": self.mix_weight,
            "physics": self.physics.to_wire(),
            "board": self.board.to_wire(),
            "device": self.device.to_wire(),
        }


@dataclass
class SessionResult:
    config: SessionConfig
    plan: SessionPlan
    records: list[ShotRecord]
    aggregates: list[TrialAggregate]
    events_by_day: dict[int, list[dict]]
    log_paths: list[Path]
    total_score: int


def _decimate(trace: list[float], step_ms: int, trace_hz: float) -> list[float]:
    stride = max(1, round(1000.0 / (trace_hz * step_ms)))
    return [round(float(x), 6) for x in trace[::stride]]


class _DayLog:
    """Per-day event buffer with its own contiguous sequence numbers."""

    def __init__(self):
        self.events: list[dict] = []

    def emit(self, event_type: str, t_ms: int, **payload):
        self.events.append({"seq": len(self.events), "t_ms": int(t_ms),
                            "type": event_type, **payload})


def run_session(cfg: SessionConfig, out_dir: Optional[str | Path] = None) -> SessionResult:
    """Execute the full two-day session; deterministic given the seeds."""
    plan = build_plan(cfg.participant_id, cfg.condition, cfg.protocol_seed)
    subject = Subject(cfg.traits, cfg.policy, mix_weight=cfg.mix_weight)
    rng = np.random.default_rng(cfg.subject_seed)
    manifest = cfg.manifest()
    step_ms = cfg.device.step_ms

    logs = {1: _DayLog(), 2: _DayLog()}
    day = 1
    t_ms = 0
    records: list[ShotRecord] = []
    aggregates: list[TrialAggregate] = []
    total_score = 0

    logs[1].emit("SessionStarted", t_ms, manifest=dict(manifest, day=1))
    for item in plan.items:
        if item is DONE:
            logs[day].emit("SessionEnded", t_ms, totalScore=total_score)
            break
        if isinstance(item, PhasePrompt):
            if item.day_boundary:
                logs[1].emit("SessionEnded", t_ms, totalScore=total_score)
                day = 2
                t_ms = 0
                subject.apply_day_boundary(cfg.day_gap_days)
                logs[2].emit("SessionStarted", t_ms, manifest=dict(manifest, day=2))
            else:
                if item.phase is PhaseKind.BASELINE_TRANSFER:
                    subject.mark_baseline()
                logs[day].emit("PhaseEntered", t_ms, phase=item.phase.value)
            continue
        if isinstance(item, FootPrompt):
            logs[day].emit("FootPrompt", t_ms, toPosition=item.to_position)
            continue

        trial: TrialSpec = item
        if trial.foot_position != subject.state.last_foot_position:
            subject.apply_foot_shift(trial.foot_position)
        logs[day].emit("TrialStarted", t_ms, trial=trial.to_wire())
        trial_records: list[ShotRecord] = []
        for shot_number in range(trial.shots_per_trial):
            ctx = ShotContext(
                participant_id=cfg.participant_id,
                condition=cfg.condition.value,
                phase=trial.phase.value,
                trial_index=trial.trial_index,
                shot_number=shot_number,
                is_catch=trial.is_catch,
                is_transfer=trial.is_transfer,
                foot_position=trial.foot_position,
                training_trial_number=trial.training_trial_number,
            )
            try:
                record = run_shot(subject, trial.spring, cfg.physics, cfg.board,
                                  cfg.device, rng, ctx=ctx, start_ms=t_ms)
            except ShotTimeoutError as err:
                record = err.record
            trial_records.append(record)
            records.append(record)

            trace = record.trace_mm or []
            if trace:
                grab_ms = record.release_ms - (len(trace) - 1) * step_ms
                logs[day].emit("Grab", grab_ms, anchor=trace[0])
                logs[day].emit("TraceChunk", record.release_ms,
                               positions=_decimate(trace, step_ms, cfg.device.trace_hz))
                if record.aborted:
                    logs[day].emit("Release", record.release_ms, aborted=True,
                                   force=None, elongation=None)
                else:
                    logs[day].emit("Release", record.release_ms, aborted=False,
                                   force=record.release_force_n,
                                   elongation=record.release_elongation_mm)
            t_ms = record.release_ms
            if not record.aborted:
                t_ms += slide_animation_ms(record.landing)
                logs[day].emit("Landed", t_ms, distance=record.landing)
                logs[day].emit("Scored", t_ms, points=record.score)
                total_score += record.score
                t_ms += SCORE_DISPLAY_MS
                subject.update_after_outcome(record.landing)
        agg = aggregate_trial(trial_records, cfg.participant_id,
                              trial.phase.value, trial.trial_index)
        aggregates.append(agg)
        logs[day].emit("TrialEnded", t_ms, aggregate=agg.to_wire(),
                       shots=[r.to_wire() for r in trial_records])

    log_paths: list[Path] = []
    if out_dir is not None:
        session_dir = Path(out_dir) / cfg.participant_id
        session_dir.mkdir(parents=True, exist_ok=True)
        (session_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
        for d in (1, 2):
            path = session_dir / f"day{d}.jsonl"
            write_log(path, logs[d].events)
            log_paths.append(path)

    return SessionResult(config=cfg, plan=plan, records=records,
                         aggregates=aggregates,
                         events_by_day={1: logs[1].events, 2: logs[2].events},
                         log_paths=log_paths, total_score=total_score)
