"""Synthetic participants.

A subject keeps a remembered release elongation, plans each pull as a
minimum-jerk trajectory toward it (perturbed by across-shot jitter and
motor noise, with optional within-shot probe oscillations), and nudges
the memory after every shot in proportion to the landing error.

Trait wiring: free spirit scales the across-shot jitter ("trial and
reset" exploration), transform-of-challenge scales the within-shot probe
rate; both gains are configurable model assumptions.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .engine import APPROACH_START_MM, CUBE_POSITION_MM, ShotContext
from .errors import InvalidInputError
from .physics import BOARD_CENTER_DISTANCE
from .springs import SpringParams

FOOT_STRIP_PITCH_MM = 70.0  # 40 mm strip width + 30 mm gap
MEMORY_MIN_MM = 0.0
MEMORY_MAX_MM = 300.0
PROBE_AMPLITUDE_MM = (10.0, 25.0)


def _clamp_memory(value: float) -> float:
    return min(max(value, MEMORY_MIN_MM), MEMORY_MAX_MM)


@dataclass(frozen=True)
class TraitProfile:
    free_spirit: float = 0.5
    achiever: float = 0.5
    challenge: float = 0.5
    boredom: float = 0.5
    curiosity: float = 0.5
    locus_of_control: float = 0.0

    def __post_init__(self):
        for name in ("free_spirit", "achiever", "challenge", "boredom", "curiosity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidInputError(f"{name} must be in [0, 1], got {v}")
        if not -1.0 <= self.locus_of_control <= 1.0:
            raise InvalidInputError("locus of control must be in [-1, 1]")

    def to_wire(self) -> dict:
        return {
            "freeSpirit": self.free_spirit,
            "achiever": self.achiever,
            "challenge": self.challenge,
            "boredom": self.boredom,
            "curiosity": self.curiosity,
            "locusOfControl": self.locus_of_control,
        }

    @classmethod
    def from_wire(cls, data: dict) -> "TraitProfile":
        return cls(
            free_spirit=float(data["freeSpirit"]),
            achiever=float(data["achiever"]),
            challenge=float(data["challenge"]),
            boredom=float(data["boredom"]),
            curiosity=float(data["curiosity"]),
            locus_of_control=float(data["locusOfControl"]),
        )


@dataclass(frozen=True)
class PolicyParams:
    learning_rate_mm_per_gu: float = 0.05
    motor_noise_sd_mm: float = 2.0
    across_shot_jitter_sd_max_mm: float = 10.0
    within_shot_explore_rate_max: float = 3.0
    explore_decay: float = 0.97
    pull_speed_mm_s: float = 150.0
    memory_decay_per_day: float = 0.1
    initial_elongation_mm: float = 60.0

    def __post_init__(self):
        if not 0.0 < self.explore_decay <= 1.0:
            raise InvalidInputError("explore decay must be in (0, 1]")
        for name in ("learning_rate_mm_per_gu", "motor_noise_sd_mm",
                     "across_shot_jitter_sd_max_mm", "within_shot_explore_rate_max",
                     "pull_speed_mm_s", "memory_decay_per_day", "initial_elongation_mm"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be non-negative")

    def to_wire(self) -> dict:
        return asdict(self)

    @classmethod
    def from_wire(cls, data: dict) -> "PolicyParams":
        return cls(**data)


@dataclass
class SubjectState:
    remembered_elongation_mm: float
    posture_reference_mm: float
    mix_weight: float = 0.0
    last_foot_position: int = 1
    baseline_anchor_mm: Optional[float] = None

    def __post_init__(self):
        if self.remembered_elongation_mm < 0:
            raise InvalidInputError("remembered elongation must be non-negative")
        if not 0.0 <= self.mix_weight <= 1.0:
            raise InvalidInputError("mix weight must be in [0, 1]")


@dataclass
class PullPlan:
    """Commanded trajectory for one shot at the device step rate."""

    velocities_mm_s: np.ndarray
    button: np.ndarray
    intended_elongation_mm: float

    def __len__(self):
        return len(self.velocities_mm_s)


def _min_jerk_positions(p0: float, p1: float, n_ticks: int) -> np.ndarray:
    """Positions after each of n_ticks steps, ending exactly at p1."""
    tau = np.arange(1, n_ticks + 1) / n_ticks
    shape = 10 * tau**3 - 15 * tau**4 + 6 * tau**5
    return p0 + (p1 - p0) * shape


def _segment_ticks(distance_mm: float, speed_mm_s: float, dt_s: float) -> int:
    return max(1, round(abs(distance_mm) / speed_mm_s / dt_s))


def _assemble_plan(segments: list[np.ndarray], start: float, dt_s: float,
                   grab_tick: int, intended: float,
                   hold_ticks: int = 0) -> PullPlan:
    """Waypoints -> per-tick velocities, button held from grab through the
    second-to-last tick so the falling edge releases at the final position."""
    waypoints = np.concatenate(segments)
    if hold_ticks:
        waypoints = np.concatenate((waypoints, np.full(hold_ticks, waypoints[-1])))
    prev = np.concatenate(([start], waypoints[:-1]))
    velocities = np.concatenate(((waypoints - prev) / dt_s, [0.0]))
    button = np.zeros(len(waypoints) + 1, dtype=bool)
    button[grab_tick:-1] = True
    if hold_ticks:
        button[-1] = True  # never releases
    return PullPlan(velocities_mm_s=velocities, button=button,
                    intended_elongation_mm=intended)


class ScriptedPolicy:
    """Deterministic policy that releases at an exact elongation."""

    def __init__(self, release_elongation_mm: float, pull_speed_mm_s: float = 150.0,
                 hold_ticks: int = 0):
        self.release_elongation_mm = release_elongation_mm
        self.pull_speed_mm_s = pull_speed_mm_s
        self.hold_ticks = hold_ticks

    def plan_shot(self, spring: SpringParams, ctx: ShotContext, rng,
                  dt_s: float = 0.001) -> PullPlan:
        start, anchor = APPROACH_START_MM, CUBE_POSITION_MM
        approach = _min_jerk_positions(
            start, anchor, _segment_ticks(start - anchor, self.pull_speed_mm_s, dt_s))
        pull = _min_jerk_positions(
            anchor, anchor - self.release_elongation_mm,
            _segment_ticks(self.release_elongation_mm or 1.0, self.pull_speed_mm_s, dt_s))
        # Button down on the tick the approach arrives at the cube, so the
        # grab anchor is exactly the cube position.
        return _assemble_plan([approach, pull], start, dt_s, len(approach) - 1,
                              self.release_elongation_mm, hold_ticks=self.hold_ticks)


class Subject:
    """Trait-parameterized synthetic participant with mutable memory."""

    def __init__(self, traits: TraitProfile, params: PolicyParams | None = None,
                 state: SubjectState | None = None, mix_weight: float = 0.0):
        self.traits = traits
        self.params = params or PolicyParams()
        self.state = state or SubjectState(
            remembered_elongation_mm=self.params.initial_elongation_mm,
            posture_reference_mm=self.params.initial_elongation_mm,
            mix_weight=mix_weight,
        )

    def intended_elongation(self) -> float:
        s = self.state
        return ((1.0 - s.mix_weight) * s.remembered_elongation_mm
                + s.mix_weight * s.posture_reference_mm)

    def plan_shot(self, spring: SpringParams, ctx: ShotContext, rng,
                  dt_s: float = 0.001) -> PullPlan:
        p, t = self.params, self.traits
        # Fixed draw order for determinism: jitter, noise, probe count,
        # probe amplitudes.
        jitter_sd = p.across_shot_jitter_sd_max_mm * t.free_spirit
        jitter = rng.normal(0.0, jitter_sd) if jitter_sd > 0 else 0.0
        noise = rng.normal(0.0, p.motor_noise_sd_mm) if p.motor_noise_sd_mm > 0 else 0.0
        intended = _clamp_memory(self.intended_elongation() + jitter + noise)

        n_probes = 0
        if ctx.training_trial_number is not None:
            rate = (p.within_shot_explore_rate_max * t.challenge
                    * p.explore_decay ** ctx.training_trial_number)
            if rate > 0:
                n_probes = int(rng.poisson(rate))
        amplitudes = rng.uniform(*PROBE_AMPLITUDE_MM, size=n_probes) if n_probes else ()

        start, anchor = APPROACH_START_MM, CUBE_POSITION_MM
        approach = _min_jerk_positions(
            start, anchor, _segment_ticks(start - anchor, p.pull_speed_mm_s, dt_s))
        target_pos = anchor - intended
        segments = [approach, _min_jerk_positions(
            anchor, target_pos, _segment_ticks(intended or 1.0, p.pull_speed_mm_s, dt_s))]
        for amp in amplitudes:
            amp = min(float(amp), intended)  # probes dip back toward the anchor
            if amp <= 0:
                continue
            n = _segment_ticks(amp, p.pull_speed_mm_s, dt_s)
            segments.append(_min_jerk_positions(target_pos, target_pos + amp, n))
            segments.append(_min_jerk_positions(target_pos + amp, target_pos, n))
        return _assemble_plan(segments, start, dt_s, len(approach) - 1, intended)

    def update_after_outcome(self, landing: float) -> None:
        delta = self.params.learning_rate_mm_per_gu * (BOARD_CENTER_DISTANCE - landing)
        s = self.state
        s.remembered_elongation_mm = _clamp_memory(s.remembered_elongation_mm + delta)
        # the posture-derived elongation may run negative after foot shifts,
        # so only the remembered elongation (and the final intent) is clamped
        s.posture_reference_mm = s.posture_reference_mm + delta

    def apply_foot_shift(self, new_foot_position: int) -> None:
        if new_foot_position not in (0, 1, 2):
            raise InvalidInputError(f"foot position must be 0, 1 or 2, got {new_foot_position}")
        s = self.state
        shift = (new_foot_position - s.last_foot_position) * FOOT_STRIP_PITCH_MM
        s.posture_reference_mm = s.posture_reference_mm + shift
        s.last_foot_position = new_foot_position

    def mark_baseline(self) -> None:
        """Anchor the pre-training memory; day decay regresses toward it."""
        self.state.baseline_anchor_mm = self.state.remembered_elongation_mm

    def apply_day_boundary(self, gap_days: float = 1.0) -> None:
        s = self.state
        if s.baseline_anchor_mm is None:
            return
        frac = min(1.0, self.params.memory_decay_per_day * gap_days)
        s.remembered_elongation_mm += frac * (s.baseline_anchor_mm - s.remembered_elongation_mm)
        s.posture_reference_mm += frac * (s.baseline_anchor_mm - s.posture_reference_mm)
