"""Two-day session plan: phases, trials, spring assignment, prompts.

The plan compiles to an ordered item sequence (phase prompts, trials,
foot prompts, a day boundary, and a terminal marker) that a session
executor walks with an integer cursor. Plans are immutable after build.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ProtocolViolationError
from .metrics import ShotRecord
from .springs import SpringKind, SpringParams

PLAN_SCHEMA_VERSION = "plan_v1"

# 0-based training-trial indices rendered with the linear spring for every
# group; spaced 4-5 apart and ending the block sequence on a linear probe.
DEFAULT_CATCH_TRIALS = (4, 9, 13, 18, 22, 27)

TRAINING_BLOCKS = 4
TRIALS_PER_BLOCK = 7
SHOTS_PER_TRAINING_TRIAL = 4
SHOTS_PER_RETENTION_TRIAL = 6
FAMILIARIZATION_SHOTS = 4
DEFAULT_FOOT_POSITION = 1  # middle strip; the setup posture


class GroupCondition(Enum):
    LINEAR = "LS"
    GAUSSIAN = "GS"
    ANTISYM_GAUSSIAN = "AGS"

    @property
    def spring_kind(self) -> SpringKind:
        return SpringKind(self.value)


class PhaseKind(Enum):
    FAMILIARIZATION = "Familiarization"
    BASELINE = "Baseline"
    BASELINE_TRANSFER = "BaselineTransfer"
    TRAINING = "Training"
    WASHOUT = "Washout"
    SHORT_RETENTION = "ShortRetention"
    SHORT_RETENTION_TRANSFER = "ShortRetentionTransfer"
    LONG_RETENTION = "LongRetention"
    LONG_RETENTION_TRANSFER = "LongRetentionTransfer"


DAY2_PHASES = (PhaseKind.LONG_RETENTION, PhaseKind.LONG_RETENTION_TRANSFER)
TRANSFER_PHASES = (
    PhaseKind.BASELINE_TRANSFER,
    PhaseKind.SHORT_RETENTION_TRANSFER,
    PhaseKind.LONG_RETENTION_TRANSFER,
)


@dataclass(frozen=True)
class TrialSpec:
    phase: PhaseKind
    trial_index: int
    shots_per_trial: int
    spring: SpringParams
    is_catch: bool = False
    foot_position: int = DEFAULT_FOOT_POSITION
    training_trial_number: Optional[int] = None

    @property
    def is_transfer(self) -> bool:
        return self.phase in TRANSFER_PHASES

    def to_wire(self) -> dict:
        return {
            "phase": self.phase.value,
            "trialIndex": self.trial_index,
            "shotsPerTrial": self.shots_per_trial,
            "spring": self.spring.to_wire(),
            "isCatch": self.is_catch,
            "footPosition": self.foot_position,
            "trainingTrialNumber": self.training_trial_number,
        }

    @classmethod
    def from_wire(cls, data: dict) -> "TrialSpec":
        return cls(
            phase=PhaseKind(data["phase"]),
            trial_index=int(data["trialIndex"]),
            shots_per_trial=int(data["shotsPerTrial"]),
            spring=SpringParams.from_wire(data["spring"]),
            is_catch=bool(data["isCatch"]),
            foot_position=int(data["footPosition"]),
            training_trial_number=data["trainingTrialNumber"],
        )


@dataclass(frozen=True)
class PhasePrompt:
    phase: Optional[PhaseKind] = None
    day_boundary: bool = False


@dataclass(frozen=True)
class FootPrompt:
    to_position: int = DEFAULT_FOOT_POSITION


class Done:
    def __repr__(self):
        return "Done"


DONE = Done()

PlanItem = Union[TrialSpec, PhasePrompt, FootPrompt, Done]


@dataclass
class SessionPlan:
    participant_id: str
    condition: GroupCondition
    seed: int
    trials: list[TrialSpec]
    foot_sequence: list[int]
    catch_trials: tuple[int, ...] = DEFAULT_CATCH_TRIALS
    items: list = field(default_factory=list, repr=False, compare=False)

    def day_of_item(self, cursor: int) -> int:
        boundary = next(i for i, it in enumerate(self.items)
                        if isinstance(it, PhasePrompt) and it.day_boundary)
        return 1 if cursor <= boundary else 2

    def to_wire(self) -> dict:
        return {
            "schemaVersion": PLAN_SCHEMA_VERSION,
            "participantId": self.participant_id,
            "condition": self.condition.value,
            "seed": self.seed,
            "catchTrials": list(self.catch_trials),
            "footSequence": list(self.foot_sequence),
            "trials": [t.to_wire() for t in self.trials],
        }

    @classmethod
    def from_wire(cls, data: dict) -> "SessionPlan":
        if data.get("schemaVersion") != PLAN_SCHEMA_VERSION:
            raise ProtocolViolationError(
                f"unsupported plan schema {data.get('schemaVersion')!r}")
        plan = cls(
            participant_id=data["participantId"],
            condition=GroupCondition(data["condition"]),
            seed=int(data["seed"]),
            trials=[TrialSpec.from_wire(t) for t in data["trials"]],
            foot_sequence=[int(f) for f in data["footSequence"]],
            catch_trials=tuple(data["catchTrials"]),
        )
        plan.items = compile_items(plan)
        return plan


def foot_position_stream(protocol_seed: int, n: int,
                         start_from: int = DEFAULT_FOOT_POSITION) -> list[int]:
    """Seeded sequence over {0,1,2} with no immediate repeats.

    Depends only on the protocol seed, so every participant sees the same
    sequence. The stream starts from the setup posture (middle strip).
    """
    rng = np.random.default_rng(protocol_seed)
    seq = []
    prev = start_from
    for _ in range(n):
        choices = [p for p in (0, 1, 2) if p != prev]
        prev = int(choices[rng.integers(0, len(choices))])
        seq.append(prev)
    return seq


def build_plan(participant_id: str, condition: GroupCondition, protocol_seed: int,
               catch_trials: Sequence[int] = DEFAULT_CATCH_TRIALS) -> SessionPlan:
    """Compile the full ordered two-day plan for one participant."""
    main_linear = SpringParams.main(SpringKind.LINEAR)
    training_spring = SpringParams.main(condition.spring_kind)
    transfer_spring = SpringParams.transfer(SpringKind.LINEAR)
    catch_set = set(catch_trials)

    n_training = TRAINING_BLOCKS * TRIALS_PER_BLOCK
    foot_sequence = foot_position_stream(protocol_seed, n_training)

    trials: list[TrialSpec] = [
        TrialSpec(PhaseKind.FAMILIARIZATION, 0, FAMILIARIZATION_SHOTS, main_linear)
    ]

    def retention_block(phase: PhaseKind, spring: SpringParams):
        for i in range(2):
            trials.append(TrialSpec(phase, i, SHOTS_PER_RETENTION_TRIAL, spring))

    retention_block(PhaseKind.BASELINE, main_linear)
    retention_block(PhaseKind.BASELINE_TRANSFER, transfer_spring)
    for t in range(n_training):
        is_catch = t in catch_set
        trials.append(TrialSpec(
            phase=PhaseKind.TRAINING,
            trial_index=t,
            shots_per_trial=SHOTS_PER_TRAINING_TRIAL,
            spring=main_linear if is_catch else training_spring,
            is_catch=is_catch,
            foot_position=foot_sequence[t],
            training_trial_number=t,
        ))
    trials.append(TrialSpec(PhaseKind.WASHOUT, 0, SHOTS_PER_RETENTION_TRIAL, main_linear))
    retention_block(PhaseKind.SHORT_RETENTION, main_linear)
    retention_block(PhaseKind.SHORT_RETENTION_TRANSFER, transfer_spring)
    retention_block(PhaseKind.LONG_RETENTION, main_linear)
    retention_block(PhaseKind.LONG_RETENTION_TRANSFER, transfer_spring)

    plan = SessionPlan(
        participant_id=participant_id,
        condition=condition,
        seed=protocol_seed,
        trials=trials,
        foot_sequence=foot_sequence,
        catch_trials=tuple(catch_trials),
    )
    plan.items = compile_items(plan)
    return plan


def compile_items(plan: SessionPlan) -> list:
    """Interleave trials with phase/foot prompts and the terminal marker."""
    items: list = []
    prev_phase = None
    prev_trial: Optional[TrialSpec] = None
    for trial in plan.trials:
        if trial.phase is not prev_phase:
            if prev_phase is not None and trial.phase is DAY2_PHASES[0]:
                items.append(PhasePrompt(day_boundary=True))
            items.append(PhasePrompt(phase=trial.phase))
            prev_phase = trial.phase
        elif (trial.phase is PhaseKind.TRAINING and prev_trial is not None
              and trial.foot_position != prev_trial.foot_position):
            items.append(FootPrompt(to_position=trial.foot_position))
        items.append(trial)
        prev_trial = trial
    items.append(DONE)
    return items


def advance(plan: SessionPlan, cursor: int) -> PlanItem:
    """Item at the cursor; advancing past the terminal marker is an error."""
    if cursor < 0 or cursor >= len(plan.items):
        raise ProtocolViolationError(f"cursor {cursor} outside the plan")
    return plan.items[cursor]


def scoreboard(records: Sequence[ShotRecord]) -> dict:
    """Trial score (reset each trial) and session-cumulative total score."""
    trial_score = 0
    total_score = 0
    current_trial = None
    for rec in records:
        key = (rec.phase, rec.trial_index)
        if key != current_trial:
            current_trial = key
            trial_score = 0
        if not rec.aborted:
            trial_score += rec.score
            total_score += rec.score
    return {"trial_score": trial_score, "total_score": total_score}


def plan_shot_counts(plan: SessionPlan) -> dict:
    """Shot totals by day, for plan-arithmetic checks and summaries."""
    day1 = sum(t.shots_per_trial for t in plan.trials if t.phase not in DAY2_PHASES)
    day2 = sum(t.shots_per_trial for t in plan.trials if t.phase in DAY2_PHASES)
    return {"day1": day1, "day2": day2, "total": day1 + day2}
