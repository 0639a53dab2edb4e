"""Event-sourced session logs: JSONL append, replay, CSV export.

One event per line for crash-tolerant appends. Timestamps are simulated
milliseconds and sequence numbers are contiguous, so identical runs
produce byte-identical files. Traces are decimated to the configured log
rate; the full-rate trace only ever lives in memory inside the engine.
"""
from __future__ import annotations

import json
import warnings
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import SchemaMismatchError, TruncatedLogError
from .metrics import ShotRecord, log_transform
from .physics import PhysicsParams, TargetBoard, score_for_distance, travel_distance

SESSION_SCHEMA_VERSION = "session_v1"

EXPORT_COLUMNS = (
    "ID", "Condition", "Stage", "SpringType", "TrialNumber", "ShotNumber",
    "TransTask", "absForceErr", "signedForceErr", "absElongErr", "pathLenMm",
    "dirChanges", "logAbsForceErr", "logAbsElongErr",
    "releaseForceN", "releaseElongMm",
)

STAGE_BY_PHASE = {
    "Baseline": "BL",
    "BaselineTransfer": "BL",
    "ShortRetention": "STR",
    "ShortRetentionTransfer": "STR",
    "LongRetention": "LTR",
    "LongRetentionTransfer": "LTR",
}


class SessionLogger:
    """Append-only JSONL writer with contiguous sequence numbers."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._seq = 0
        self._fh = self.path.open("w", encoding="utf-8")

    def append(self, event_type: str, t_ms: int, **payload) -> dict:
        event = {"seq": self._seq, "t_ms": int(t_ms), "type": event_type, **payload}
        self._fh.write(json.dumps(event) + "\n")
        self._fh.flush()  # crash tolerance: every event lands on disk
        self._seq += 1
        return event

    def close(self):
        self._fh.close()


def write_log(path: str | Path, events: Iterable[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for event in events:
            fh.write(json.dumps(event) + "\n")
    return path


def read_log(path: str | Path) -> list[dict]:
    """Parse a session log, validating schema and sequence contiguity.

    Raises :class:`TruncatedLogError` (carrying the recoverable prefix) if
    the file ends mid-event.
    """
    events: list[dict] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.endswith("\n"):
                raise TruncatedLogError(
                    f"log truncated after seq {events[-1]['seq'] if events else -1}",
                    events=events, last_seq=events[-1]["seq"] if events else -1)
            try:
                event = json.loads(line)
            except json.JSONDecodeError:
                raise TruncatedLogError(
                    f"log truncated after seq {events[-1]['seq'] if events else -1}",
                    events=events, last_seq=events[-1]["seq"] if events else -1)
            events.append(event)
    if events:
        first = events[0]
        if first["type"] != "SessionStarted":
            raise SchemaMismatchError("log does not begin with SessionStarted")
        version = first.get("manifest", {}).get("schemaVersion")
        if version != SESSION_SCHEMA_VERSION:
            raise SchemaMismatchError(f"unsupported log schema {version!r}")
        for i, event in enumerate(events):
            if event["seq"] != i:
                raise SchemaMismatchError(
                    f"sequence gap: expected {i}, got {event['seq']}")
    return events


def validate_event_grammar(events: Sequence[dict]) -> None:
    """Every Grab pairs with a Release before the next Grab, every
    TrialStarted with a TrialEnded."""
    grabbed = False
    in_trial = False
    for event in events:
        t = event["type"]
        if t == "Grab":
            if grabbed:
                raise SchemaMismatchError(f"Grab without Release at seq {event['seq']}")
            grabbed = True
        elif t == "Release":
            if not grabbed:
                raise SchemaMismatchError(f"Release without Grab at seq {event['seq']}")
            grabbed = False
        elif t == "TrialStarted":
            if in_trial:
                raise SchemaMismatchError(f"nested TrialStarted at seq {event['seq']}")
            in_trial = True
        elif t == "TrialEnded":
            if not in_trial:
                raise SchemaMismatchError(f"TrialEnded without TrialStarted at seq {event['seq']}")
            in_trial = False
    if grabbed:
        raise SchemaMismatchError("log ends while grabbed")
    if in_trial:
        raise SchemaMismatchError("log ends mid-trial")


def replay(events: Sequence[dict], atol: float = 1e-9) -> list[ShotRecord]:
    """Rebuild shot records from a complete log, cross-checking the
    derived quantities against what was logged.

    Validates, per shot: landing recomputed from the logged release force
    through the manifest physics, the score from the board, and per trial
    the aggregates recomputed from the logged shots. Incomplete (aborted)
    shots are skipped with a warning. Decimated traces cannot reproduce
    the full-rate path metrics exactly, so the logged trace path length is
    only checked to be a lower bound.
    """
    if not events:
        return []
    validate_event_grammar(events)
    manifest = events[0]["manifest"]
    phys = PhysicsParams.from_wire(manifest["physics"])
    board = TargetBoard.from_wire(manifest["board"])

    records: list[ShotRecord] = []
    pending: dict = {}
    trace: list[float] = []
    for event in events:
        t = event["type"]
        if t == "Grab":
            pending, trace = {}, []
        elif t == "TraceChunk":
            trace.extend(event["positions"])
        elif t == "Release":
            pending["release"] = event
        elif t == "Landed":
            pending["landed"] = event
        elif t == "Scored":
            pending["scored"] = event
        elif t == "TrialEnded":
            agg = event["aggregate"]
            shots = [ShotRecord.from_wire(s) for s in event["shots"]]
            completed = [s for s in shots if not s.aborted]
            for s in shots:
                if s.aborted:
                    warnings.warn(f"skipping aborted shot {s.phase}/{s.trial_index}/{s.shot_number}")
                    continue
                landing = travel_distance(phys, s.release_force_n)
                if abs(landing - s.landing) > atol:
                    raise SchemaMismatchError(
                        f"landing mismatch for shot {s.shot_number}: {landing} vs {s.landing}")
                if score_for_distance(board, landing) != s.score:
                    raise SchemaMismatchError(f"score mismatch for shot {s.shot_number}")
                records.append(s)
            if completed:
                mean_abs = sum(abs(s.release_force_n - s.target_force_n)
                               for s in completed) / len(completed)
                if abs(mean_abs - agg["mean_abs_force_error_n"]) > atol:
                    raise SchemaMismatchError("aggregate force error mismatch")
            if len(completed) >= 2:
                from .metrics import trial_force_sd
                sd = trial_force_sd(completed, completed[0].target_force_n)
                if abs(sd - agg["force_sd_n"]) > atol:
                    raise SchemaMismatchError("aggregate force SD mismatch")
    return records


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, str)):
        return str(value)
    return format(value, ".6g")


def _export_row(rec: ShotRecord, trial_number: int, stage: str) -> dict:
    signed = rec.release_force_n - rec.target_force_n
    abs_elong = abs(rec.release_elongation_mm - rec.target_elongation_mm)
    return {
        "ID": rec.participant_id,
        "Condition": rec.condition,
        "Stage": stage,
        "SpringType": rec.spring_kind.value,
        "TrialNumber": trial_number,
        "ShotNumber": rec.shot_number,
        "TransTask": int(rec.is_transfer),
        "absForceErr": abs(signed),
        "signedForceErr": signed,
        "absElongErr": abs_elong,
        "pathLenMm": rec.path_length_mm,
        "dirChanges": rec.direction_changes,
        "logAbsForceErr": log_transform(abs(signed)),
        "logAbsElongErr": log_transform(abs_elong),
        "releaseForceN": rec.release_force_n,
        "releaseElongMm": rec.release_elongation_mm,
    }


def dataset_rows(records: Sequence[ShotRecord], kind: str) -> list[dict]:
    """Per-shot analysis rows for one of the three dataset kinds.

    training: training-phase shots, trial ordinal 0..27, spring as
    rendered (catch trials are linear). learning: baseline/retention main
    task only. transfer: baseline/retention, both tasks.
    """
    rows = []
    for rec in records:
        if rec.aborted:
            continue
        if kind == "training":
            if rec.phase != "Training":
                continue
            rows.append(_export_row(rec, rec.training_trial_number, "Training"))
        elif kind == "learning":
            if rec.phase not in ("Baseline", "ShortRetention", "LongRetention"):
                continue
            rows.append(_export_row(rec, rec.trial_index, STAGE_BY_PHASE[rec.phase]))
        elif kind == "transfer":
            if rec.phase not in STAGE_BY_PHASE:
                continue
            rows.append(_export_row(rec, rec.trial_index, STAGE_BY_PHASE[rec.phase]))
        else:
            raise ValueError(f"unknown dataset kind {kind!r}")
    return rows


def export_csv(records: Sequence[ShotRecord], kind: str,
               path: Optional[str | Path] = None) -> str:
    """Deterministic CSV (stable column order, 6 significant digits)."""
    rows = dataset_rows(records, kind)
    lines = [",".join(EXPORT_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in EXPORT_COLUMNS))
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
    return text


def records_from_log(events: Sequence[dict]) -> list[ShotRecord]:
    """Shot records exactly as logged (no revalidation)."""
    records = []
    for event in events:
        if event["type"] == "TrialEnded":
            records.extend(ShotRecord.from_wire(s) for s in event["shots"])
    return records


def load_session_dir(session_dir: str | Path) -> dict:
    """Read manifest + all day logs for one participant directory."""
    session_dir = Path(session_dir)
    manifest = json.loads((session_dir / "manifest.json").read_text())
    logs = {}
    for day_file in sorted(session_dir.glob("day*.jsonl")):
        logs[day_file.stem] = read_log(day_file)
    return {"manifest": manifest, "logs": logs}
