"""springcurl: virtual-curling force-training simulator and analysis tools."""

__version__ = "0.1.0"

from .springs import (SpringKind, SpringParams, inverse_elongations,
                      linear_intersections, spring_force, spring_slope)
from .physics import (PhysicsParams, TargetBoard, force_for_distance,
                      score_for_distance, travel_distance)
from .engine import DeviceConfig, EndEffectorState, ShotContext, ShotPhase, ShotSim, run_shot
from .protocol import (GroupCondition, PhaseKind, SessionPlan, TrialSpec,
                       advance, build_plan, scoreboard)
from .subjects import PolicyParams, ScriptedPolicy, Subject, SubjectState, TraitProfile
from .metrics import (ShotRecord, TrialAggregate, elongation_error, force_error,
                      log_transform, path_metrics, trial_force_sd)
from .runner import SessionConfig, SessionResult, run_session

__all__ = [
    "SpringKind", "SpringParams", "inverse_elongations", "linear_intersections",
    "spring_force", "spring_slope",
    "PhysicsParams", "TargetBoard", "force_for_distance", "score_for_distance",
    "travel_distance",
    "DeviceConfig", "EndEffectorState", "ShotContext", "ShotPhase", "ShotSim",
    "run_shot",
    "GroupCondition", "PhaseKind", "SessionPlan", "TrialSpec", "advance",
    "build_plan", "scoreboard",
    "PolicyParams", "ScriptedPolicy", "Subject", "SubjectState", "TraitProfile",
    "ShotRecord", "TrialAggregate", "elongation_error", "force_error",
    "log_transform", "path_metrics", "trial_force_sd",
    "SessionConfig", "SessionResult", "run_session",
]
