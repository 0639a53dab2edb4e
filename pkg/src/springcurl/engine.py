"""Fixed-timestep shot simulation.

The engine advances an end-effector state machine at 1 kHz through the
shot lifecycle (idle, approach, grab, pull, release) and renders the
active spring's force, clamped to the device limit. Landing and score
come from the closed-form physics once the release force is known; there
is no time-integrated slide.

A :class:`ShotSim` is a single-owner state machine: exactly one caller
advances it. Snapshots handed out are plain values.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .errors import ProtocolViolationError, ShotTimeoutError
from .metrics import ShotRecord, path_metrics
from .physics import PhysicsParams, TargetBoard, score_for_distance, travel_distance
from .springs import SpringParams, spring_force

CUBE_POSITION_MM = 0.0
APPROACH_START_MM = 15.0
DEFAULT_TIMEOUT_S = 30.0


class ShotPhase(Enum):
    IDLE = "Idle"
    APPROACH = "Approach"
    GRABBED = "Grabbed"
    RELEASED = "Released"
    SCORED = "Scored"


@dataclass(frozen=True)
class DeviceConfig:
    step_ms: int = 1
    device_force_limit_n: float = 20.0
    lateral_stiffness_n_mm: float = 7.0  # documented; laterals are hard constraints
    grab_radius_mm: float = 5.0
    trace_hz: float = 100.0

    def __post_init__(self):
        if self.step_ms <= 0:
            raise ValueError("step must be positive")

    def to_wire(self) -> dict:
        return {
            "stepMs": self.step_ms,
            "deviceForceLimitN": self.device_force_limit_n,
            "lateralStiffnessNmm": self.lateral_stiffness_n_mm,
            "grabRadiusMm": self.grab_radius_mm,
            "traceHz": self.trace_hz,
        }

    @classmethod
    def from_wire(cls, data: dict) -> "DeviceConfig":
        return cls(
            step_ms=int(data["stepMs"]),
            device_force_limit_n=float(data["deviceForceLimitN"]),
            lateral_stiffness_n_mm=float(data["lateralStiffnessNmm"]),
            grab_radius_mm=float(data["grabRadiusMm"]),
            trace_hz=float(data["traceHz"]),
        )


@dataclass(frozen=True)
class EndEffectorState:
    position_mm: float
    lateral_mm: tuple[float, float] = (0.0, 0.0)
    button_pressed: bool = False
    rendered_force_n: float = 0.0
    timestamp_ms: int = 0


@dataclass(frozen=True)
class ShotEvent:
    kind: str  # "grab" | "release"
    timestamp_ms: int
    anchor_mm: float = 0.0
    force_n: float = 0.0
    elongation_mm: float = 0.0


class ShotSim:
    """One shot's state machine, stepped at the fixed device rate."""

    def __init__(self, spring: SpringParams, cfg: DeviceConfig,
                 cube_position_mm: float = CUBE_POSITION_MM,
                 start_position_mm: float = APPROACH_START_MM,
                 start_ms: int = 0):
        self.spring = spring
        self.cfg = cfg
        self.cube_position_mm = cube_position_mm
        self.state = EndEffectorState(position_mm=start_position_mm, timestamp_ms=start_ms)
        self.phase = ShotPhase.IDLE
        self.grab_anchor_mm: Optional[float] = None
        self.trace_mm: list[float] = []  # positions while grabbed, full rate

    def rendered_force(self, elongation_mm: float) -> float:
        raw = spring_force(self.spring, max(0.0, elongation_mm))
        return min(max(raw, 0.0), self.cfg.device_force_limit_n)

    @property
    def elongation_mm(self) -> float:
        if self.grab_anchor_mm is None:
            return 0.0
        # Pulls toward the participant are the negative direction; pushing
        # past the anchor yields zero elongation.
        return max(0.0, self.grab_anchor_mm - self.state.position_mm)

    def step(self, commanded_velocity_mm_s: float, button_pressed: bool) -> Optional[ShotEvent]:
        """Advance one fixed step; returns a grab/release event when one fires."""
        if self.phase in (ShotPhase.RELEASED, ShotPhase.SCORED):
            raise ProtocolViolationError(f"cannot step a shot in phase {self.phase.value}")
        dt_s = self.cfg.step_ms / 1000.0
        prev_button = self.state.button_pressed
        position = self.state.position_mm + commanded_velocity_mm_s * dt_s
        t_ms = self.state.timestamp_ms + self.cfg.step_ms

        event = None
        if self.phase is ShotPhase.IDLE:
            if prev_button and not button_pressed:
                raise ProtocolViolationError("release before the shot started")
            self.phase = ShotPhase.APPROACH

        if self.phase is ShotPhase.APPROACH:
            if button_pressed and abs(position - self.cube_position_mm) <= self.cfg.grab_radius_mm:
                self.phase = ShotPhase.GRABBED
                self.grab_anchor_mm = position
                event = ShotEvent(kind="grab", timestamp_ms=t_ms, anchor_mm=position)
        elif self.phase is ShotPhase.GRABBED:
            if prev_button and not button_pressed:
                self.phase = ShotPhase.RELEASED
                elongation = max(0.0, self.grab_anchor_mm - position)
                event = ShotEvent(
                    kind="release", timestamp_ms=t_ms,
                    force_n=self.rendered_force(elongation), elongation_mm=elongation,
                )

        elongation = max(0.0, (self.grab_anchor_mm - position)) if self.grab_anchor_mm is not None else 0.0
        force = self.rendered_force(elongation) if self.phase in (ShotPhase.GRABBED, ShotPhase.RELEASED) else 0.0
        self.state = EndEffectorState(
            position_mm=position,
            lateral_mm=(0.0, 0.0),
            button_pressed=button_pressed,
            rendered_force_n=force,
            timestamp_ms=t_ms,
        )
        if self.phase in (ShotPhase.GRABBED, ShotPhase.RELEASED):
            self.trace_mm.append(position)
        return event


@dataclass
class ShotContext:
    """Protocol labels attached to a shot (who, when, which trial)."""

    participant_id: str = "anon"
    condition: str = "LS"
    phase: str = "Training"
    trial_index: int = 0
    shot_number: int = 0
    is_catch: bool = False
    is_transfer: bool = False
    foot_position: int = 1
    training_trial_number: Optional[int] = None


def finalize_shot(sim: ShotSim, release: Optional[ShotEvent], ctx: ShotContext,
                  phys: PhysicsParams, board: TargetBoard, start_ms: int) -> ShotRecord:
    """Turn a finished (or aborted) shot into its record; shared by the
    headless runner and the live service so both produce identical records."""
    aborted = release is None
    if not aborted:
        landing = travel_distance(phys, release.force_n)
        score = score_for_distance(board, landing)
        sim.phase = ShotPhase.SCORED
        pm = path_metrics(sim.trace_mm) if sim.trace_mm else {"path_length_mm": 0.0, "direction_changes": 0}
    else:
        landing, score = 0.0, 0
        pm = {"path_length_mm": 0.0, "direction_changes": 0}
    return ShotRecord(
        participant_id=ctx.participant_id,
        condition=ctx.condition,
        phase=ctx.phase,
        trial_index=ctx.trial_index,
        shot_number=ctx.shot_number,
        spring_kind=sim.spring.kind,
        is_catch=ctx.is_catch,
        is_transfer=ctx.is_transfer,
        release_force_n=0.0 if aborted else release.force_n,
        release_elongation_mm=0.0 if aborted else release.elongation_mm,
        landing=landing,
        score=score,
        path_length_mm=pm["path_length_mm"],
        direction_changes=pm["direction_changes"],
        foot_position=ctx.foot_position,
        target_force_n=sim.spring.target_force_n,
        target_elongation_mm=sim.spring.target_elongation_mm,
        training_trial_number=ctx.training_trial_number,
        start_ms=start_ms,
        release_ms=sim.state.timestamp_ms,
        aborted=aborted,
        trace_mm=list(sim.trace_mm),
    )


def run_shot(policy, spring: SpringParams, phys: PhysicsParams, board: TargetBoard,
             cfg: DeviceConfig, rng, ctx: Optional[ShotContext] = None,
             timeout_s: float = DEFAULT_TIMEOUT_S, start_ms: int = 0) -> ShotRecord:
    """Drive one full shot from the policy's planned trajectory.

    Deterministic given the rng state. Raises :class:`ShotTimeoutError`
    (carrying the aborted record) if the plan never releases within the
    simulated timeout.
    """
    ctx = ctx or ShotContext()
    plan = policy.plan_shot(spring, ctx, rng, dt_s=cfg.step_ms / 1000.0)
    sim = ShotSim(spring, cfg, start_ms=start_ms)
    max_steps = int(timeout_s * 1000.0 / cfg.step_ms)

    release = None
    velocities = plan.velocities_mm_s
    button = plan.button
    for tick in range(len(velocities)):
        if tick >= max_steps:
            break
        event = sim.step(float(velocities[tick]), bool(button[tick]))
        if event is not None and event.kind == "release":
            release = event
            break
    record = finalize_shot(sim, release, ctx, phys, board, start_ms)
    if release is None:
        raise ShotTimeoutError("shot did not release within the timeout", record=record)
    return record
