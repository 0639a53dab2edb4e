"""Command-line entry points: plan, simulate, replay, export, analyze, serve."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ModelSpecError
from .protocol import GroupCondition, build_plan, plan_shot_counts
from .runner import SessionConfig, run_session
from .session_io import export_csv, load_session_dir, read_log, records_from_log, replay
from .stats import (MODEL_FAMILIES, analysis_rows, behavior_model, compare_models,
                    fit_lmm, format_comparison, format_fit, learning_model,
                    loc_transform, normalize_likert, training_model)
from .subjects import PolicyParams, TraitProfile

DEFAULT_DEPENDENT = {
    "training": "logAbsForceErr",
    "behavior": "pathLenMm",
    "learning": "logAbsForceErr",
    "transfer": "releaseElongMm",
}

DATASET_FOR_MODEL = {
    "training": "training",
    "behavior": "training",
    "learning": "learning",
    "transfer": "transfer",
}


def _condition(value: str) -> GroupCondition:
    try:
        return GroupCondition(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"condition must be one of LS, GS, AGS (got {value!r})")


def load_traits_csv(path: str | Path) -> dict[str, TraitProfile]:
    """Trait profiles from CSV: either normalized columns (free_spirit,
    achiever, challenge, boredom, curiosity, locus_of_control) or raw
    questionnaire responses (semicolon-separated 7-point items per trait
    column fs/ac/ch/bo/cu, plus loc_raw 0..23)."""
    traits = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            pid = row.get("participant_id") or row.get("ID")
            if pid is None:
                raise ValueError("traits CSV needs a participant_id column")
            if "free_spirit" in row:
                traits[pid] = TraitProfile(
                    free_spirit=float(row["free_spirit"]),
                    achiever=float(row["achiever"]),
                    challenge=float(row["challenge"]),
                    boredom=float(row["boredom"]),
                    curiosity=float(row["curiosity"]),
                    locus_of_control=float(row["locus_of_control"]),
                )
            else:
                def likert(col):
                    return normalize_likert([int(v) for v in row[col].split(";")])
                traits[pid] = TraitProfile(
                    free_spirit=likert("fs"),
                    achiever=likert("ac"),
                    challenge=likert("ch"),
                    boredom=likert("bo"),
                    curiosity=likert("cu"),
                    locus_of_control=loc_transform(int(row["loc_raw"])),
                )
    return traits


def _sample_traits(rng) -> TraitProfile:
    fs, ac, ch, bo, cu = rng.uniform(0.0, 1.0, 5)
    loc = rng.uniform(-1.0, 1.0)
    return TraitProfile(free_spirit=float(fs), achiever=float(ac), challenge=float(ch),
                        boredom=float(bo), curiosity=float(cu), locus_of_control=float(loc))


def cmd_plan(args) -> int:
    plan = build_plan(args.participant, args.condition, args.seed)
    print(json.dumps(plan.to_wire(), indent=2))
    return 0


def cmd_simulate(args) -> int:
    out_dir = Path(args.out)
    traits_by_id = load_traits_csv(args.traits) if args.traits else None
    conditions = list(GroupCondition)
    summary = []
    for i in range(args.participants):
        pid = f"p{i + 1:03d}"
        condition = conditions[i % len(conditions)]
        trait_rng = np.random.default_rng(np.random.SeedSequence([args.seed, i, 1]))
        subject_seed = int(np.random.SeedSequence([args.seed, i]).generate_state(1)[0])
        traits = (traits_by_id or {}).get(pid) or _sample_traits(trait_rng)
        cfg = SessionConfig(
            participant_id=pid,
            condition=condition,
            protocol_seed=args.seed,
            subject_seed=subject_seed,
            traits=traits,
            policy=PolicyParams(),
            mix_weight=args.mix_weight,
        )
        result = run_session(cfg, out_dir=out_dir)
        counts = plan_shot_counts(result.plan)
        summary.append({
            "participant": pid,
            "condition": condition.value,
            "shots": counts["total"],
            "totalScore": result.total_score,
        })
        print(f"{pid} ({condition.value}): {counts['total']} shots, "
              f"score {result.total_score}")
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote {args.participants} sessions to {out_dir}")
    return 0


def cmd_replay(args) -> int:
    events = read_log(args.log)
    records = replay(events)
    completed = [r for r in records if not r.aborted]
    print(f"{args.log}: {len(events)} events, {len(completed)} completed shots validated")
    return 0


def _collect_records(sessions_dir: Path):
    records = []
    traits = {}
    for manifest_path in sorted(sessions_dir.glob("*/manifest.json")):
        session = load_session_dir(manifest_path.parent)
        traits[session["manifest"]["participantId"]] = \
            TraitProfile.from_wire(session["manifest"]["traits"])
        for events in session["logs"].values():
            records.extend(records_from_log(events))
    if not records:
        print(f"no session logs under {sessions_dir}", file=sys.stderr)
        raise SystemExit(1)
    return records, traits


def cmd_export(args) -> int:
    records, _ = _collect_records(Path(args.sessions))
    text = export_csv(records, args.kind, path=args.out)
    target = args.out if args.out else "stdout"
    if not args.out:
        print(text, end="")
    else:
        print(f"wrote {text.count(chr(10)) - 1} rows to {target}")
    return 0


def _candidate_models(family: str):
    singles = ["FS_c", "AC_c", "CH_c", "BO_c", "CU_c", "LOC_c"]
    if family == "training":
        models = [training_model(tuple(singles), name="all-traits")]
        models += [training_model((t,), name=t.replace("_c", "")) for t in singles]
        models.append(training_model(("FS_c", "CH_c"), name="FS+CH"))
        return models
    if family == "behavior":
        models = [behavior_model((t,), name=t.replace("_c", "")) for t in ("FS_c", "CH_c", "BO_c")]
        models += [behavior_model(("FS_c", t), name=f"FS+{t.replace('_c', '')}")
                   for t in ("CH_c", "AC_c", "BO_c", "CU_c", "LOC_c")]
        return models
    if family == "learning":
        models = [learning_model((t,), name=t.replace("_c", "")) for t in singles]
        models += [learning_model(("FS_c", t), name=f"FS+{t.replace('_c', '')}")
                   for t in ("CU_c", "CH_c", "BO_c", "AC_c")]
        return models
    return [MODEL_FAMILIES[family]()]


def cmd_analyze(args) -> int:
    records, traits = _collect_records(Path(args.sessions))
    family = args.model
    dataset_kind = DATASET_FOR_MODEL[family]
    rows = analysis_rows(records, dataset_kind, traits)
    dependent = args.dependent or DEFAULT_DEPENDENT[family]
    fits = []
    for spec in _candidate_models(family):
        try:
            fits.append(fit_lmm(spec, rows, dependent=dependent))
        except ModelSpecError as err:
            print(f"skipping {spec.name}: {err}", file=sys.stderr)
    if not fits:
        print("no candidate model is estimable on this dataset", file=sys.stderr)
        return 1
    table = compare_models(fits)
    print(f"dependent: {dependent}  rows: {len(rows)}")
    print(format_comparison(table))
    chosen = MODEL_FAMILIES[family]()
    chosen_fit = next((f for f in fits if f.spec.terms == chosen.terms),
                      fits[0])
    print()
    print(format_fit(chosen_fit))
    if args.json_out:
        Path(args.json_out).write_text(json.dumps({
            "comparison": table, "fit": chosen_fit.to_dict()}, indent=2) + "\n")
        print(f"\nwrote {args.json_out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import LiveSession, create_app

    cfg = SessionConfig(
        participant_id=args.participant,
        condition=args.condition,
        protocol_seed=args.seed,
        subject_seed=0,
    )
    session = LiveSession(cfg, out_dir=args.out, auto_advance=args.auto_advance)
    static = args.static or Path(__file__).resolve().parents[2] / "frontend" / "dist"
    app = create_app(session, pacing=args.pacing, static_dir=static)
    print(f"serving participant {args.participant} on :{args.port} "
          f"(pacing={args.pacing})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="springcurl")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="print a compiled session plan as JSON")
    p.add_argument("--condition", type=_condition, default=GroupCondition.LINEAR)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--participant", default="p001")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="run headless sessions with synthetic subjects")
    p.add_argument("--participants", type=int, default=1)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--traits", help="CSV of trait profiles or raw questionnaire responses")
    p.add_argument("--mix-weight", type=float, default=0.0,
                   help="posture- vs elongation-anchored memory mix (0..1)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="validate a session log")
    p.add_argument("log")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("export", help="export an analysis dataset CSV")
    p.add_argument("--sessions", required=True)
    p.add_argument("--kind", choices=("training", "learning", "transfer"), required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("analyze", help="fit and compare mixed models on session data")
    p.add_argument("--sessions", required=True)
    p.add_argument("--model", choices=tuple(DATASET_FOR_MODEL), required=True)
    p.add_argument("--dependent")
    p.add_argument("--json-out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("serve", help="host a live session over websocket")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--participant", default="live01")
    p.add_argument("--condition", type=_condition, default=GroupCondition.LINEAR)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", help="directory for live session logs")
    p.add_argument("--pacing", choices=("wall", "client"), default="wall")
    p.add_argument("--auto-advance", action="store_true")
    p.add_argument("--static", help="static frontend bundle directory")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
