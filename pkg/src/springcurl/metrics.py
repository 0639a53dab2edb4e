"""Per-shot and per-trial outcome metrics.

Force accuracy is the absolute release-force error against the target
force; consistency is the sample SD of the signed errors within a trial.
Exploration is summarized by the pre-release path length and the number
of hysteresis-debounced direction reversals along the pull axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

from .errors import InvalidInputError, MetricUnavailableError
from .springs import SpringKind

DEFAULT_HYSTERESIS_MM = 1.0
LOG_FLOOR = 1e-3


@dataclass
class ShotRecord:
    """Full outcome of one shot."""

    participant_id: str
    condition: str
    phase: str
    trial_index: int
    shot_number: int
    spring_kind: SpringKind
    is_catch: bool
    is_transfer: bool
    release_force_n: float
    release_elongation_mm: float
    landing: float
    score: int
    path_length_mm: float
    direction_changes: int
    foot_position: int
    target_force_n: float = 10.0
    target_elongation_mm: float = 90.0
    training_trial_number: Optional[int] = None
    start_ms: int = 0
    release_ms: int = 0
    aborted: bool = False
    # full-rate pre-release trace; in-memory only, logs carry a decimated copy
    trace_mm: Optional[list] = field(default=None, repr=False, compare=False)

    def to_wire(self) -> dict:
        data = asdict(self)
        data.pop("trace_mm")
        data["spring_kind"] = self.spring_kind.value
        return data

    @classmethod
    def from_wire(cls, data: dict) -> "ShotRecord":
        data = dict(data)
        data["spring_kind"] = SpringKind(data["spring_kind"])
        return cls(**data)


@dataclass
class TrialAggregate:
    participant_id: str
    phase: str
    trial_index: int
    n_shots: int
    mean_abs_force_error_n: Optional[float] = None
    force_sd_n: Optional[float] = None
    mean_abs_elongation_error_mm: Optional[float] = None
    trial_score: int = 0

    def to_wire(self) -> dict:
        return asdict(self)


def force_error(record: ShotRecord, target_force_n: float) -> dict:
    """Signed and absolute release-force error against the target."""
    if record.aborted:
        raise MetricUnavailableError("aborted shot has no release force")
    signed = record.release_force_n - target_force_n
    return {"signed": signed, "absolute": abs(signed)}


def elongation_error(record: ShotRecord, target_elongation_mm: float) -> float:
    """Absolute release-elongation error against the target, in mm."""
    if record.aborted:
        raise MetricUnavailableError("aborted shot has no release elongation")
    return abs(record.release_elongation_mm - target_elongation_mm)


def trial_force_sd(records: Sequence[ShotRecord], target_force_n: float) -> float:
    """Sample SD (n-1 denominator) of signed force errors within a trial."""
    completed = [r for r in records if not r.aborted]
    if len(completed) < 2:
        raise MetricUnavailableError("force SD needs at least two completed shots")
    errors = [r.release_force_n - target_force_n for r in completed]
    mean = sum(errors) / len(errors)
    var = sum((e - mean) ** 2 for e in errors) / (len(errors) - 1)
    return math.sqrt(var)


def path_metrics(trace_mm: Sequence[float],
                 hysteresis_mm: float = DEFAULT_HYSTERESIS_MM) -> dict:
    """Path length and direction changes over a pre-release position trace.

    A reversal is only counted once the excursion away from the last
    tracked extremum exceeds the hysteresis, so sensor-scale jitter adds
    path but no changes.
    """
    if len(trace_mm) == 0:
        raise MetricUnavailableError("empty trace")
    path = 0.0
    changes = 0
    direction = 0  # 0 until first movement
    extremum = trace_mm[0]
    prev = trace_mm[0]
    for x in trace_mm[1:]:
        path += abs(x - prev)
        prev = x
        if direction == 0:
            if x != extremum:
                direction = 1 if x > extremum else -1
                extremum = x
        elif direction > 0:
            if x > extremum:
                extremum = x
            elif extremum - x > hysteresis_mm:
                changes += 1
                direction = -1
                extremum = x
        else:
            if x < extremum:
                extremum = x
            elif x - extremum > hysteresis_mm:
                changes += 1
                direction = 1
                extremum = x
    return {"path_length_mm": path, "direction_changes": changes}


def log_transform(value: float, floor: float = LOG_FLOOR) -> float:
    """ln(max(value, floor)); keeps the log total when errors hit zero."""
    if value < 0:
        raise InvalidInputError("log transform input must be non-negative")
    return math.log(max(value, floor))


def aggregate_trial(records: Sequence[ShotRecord], participant_id: str,
                    phase: str, trial_index: int) -> TrialAggregate:
    """Trial-level summary; error fields stay None below two completed shots."""
    completed = [r for r in records if not r.aborted]
    agg = TrialAggregate(
        participant_id=participant_id,
        phase=phase,
        trial_index=trial_index,
        n_shots=len(records),
        trial_score=sum(r.score for r in completed),
    )
    if completed:
        agg.mean_abs_force_error_n = sum(
            abs(r.release_force_n - r.target_force_n) for r in completed
        ) / len(completed)
        agg.mean_abs_elongation_error_mm = sum(
            abs(r.release_elongation_mm - r.target_elongation_mm) for r in completed
        ) / len(completed)
    if len(completed) >= 2:
        agg.force_sd_n = trial_force_sd(completed, completed[0].target_force_n)
    return agg
