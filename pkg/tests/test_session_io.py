import json

import pytest

from springcurl.errors import SchemaMismatchError, TruncatedLogError
from springcurl.metrics import path_metrics
from springcurl.protocol import GroupCondition
from springcurl.runner import SessionConfig, run_session
from springcurl.session_io import (dataset_rows, export_csv, read_log,
                                   records_from_log, replay,
                                   validate_event_grammar, write_log)
from springcurl.subjects import TraitProfile


@pytest.fixture(scope="module")
def session(tmp_path_factory):
    out = tmp_path_factory.mktemp("sessions")
    cfg = SessionConfig("p01", GroupCondition.ANTISYM_GAUSSIAN, 7, 11)
    return run_session(cfg, out_dir=out), out


class TestLogRoundTrip:
    def test_write_read_identity(self, session, tmp_path):
        result, _ = session
        events = result.events_by_day[1]
        path = write_log(tmp_path / "log.jsonl", events)
        assert read_log(path) == events

    def test_truncated_log(self, session, tmp_path):
        result, _ = session
        events = result.events_by_day[2]
        path = write_log(tmp_path / "trunc.jsonl", events)
        raw = path.read_text()
        path.write_text(raw[: len(raw) - 40])
        with pytest.raises(TruncatedLogError) as info:
            read_log(path)
        recovered = info.value.events
        assert recovered == events[: len(recovered)]
        assert info.value.last_seq == recovered[-1]["seq"]

    def test_schema_validation(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(
            {"seq": 0, "t_ms": 0, "type": "SessionStarted",
             "manifest": {"schemaVersion": "v99"}}) + "\n")
        with pytest.raises(SchemaMismatchError):
            read_log(path)

    def test_sequence_gap_detected(self, session, tmp_path):
        result, _ = session
        events = [dict(e) for e in result.events_by_day[2]]
        events[3]["seq"] = 99
        path = write_log(tmp_path / "gap.jsonl", events)
        with pytest.raises(SchemaMismatchError):
            read_log(path)

    def test_byte_identical_reruns(self, session, tmp_path):
        result, out = session
        rerun = run_session(result.config, out_dir=tmp_path)
        for day in ("day1", "day2"):
            a = (out / "p01" / f"{day}.jsonl").read_bytes()
            b = (tmp_path / "p01" / f"{day}.jsonl").read_bytes()
            assert a == b


class TestGrammar:
    def test_session_logs_pass(self, session):
        result, _ = session
        for day in (1, 2):
            validate_event_grammar(result.events_by_day[day])

    def test_unbalanced_grab(self):
        events = [{"seq": 0, "type": "Grab"}, {"seq": 1, "type": "Grab"}]
        with pytest.raises(SchemaMismatchError):
            validate_event_grammar(events)

    def test_release_without_grab(self):
        with pytest.raises(SchemaMismatchError):
            validate_event_grammar([{"seq": 0, "type": "Release"}])


class TestReplay:
    def test_aggregates_match(self, session):
        result, out = session
        for day in (1, 2):
            events = read_log(out / "p01" / f"day{day}.jsonl")
            records = replay(events, atol=1e-9)
            assert all(not r.aborted for r in records)

    def test_empty_log(self):
        assert replay([]) == []

    def test_decimated_trace_is_lower_bound(self, session):
        result, out = session
        events = read_log(out / "p01" / "day2.jsonl")
        logged = records_from_log(events)
        traces = [e["positions"] for e in events if e["type"] == "TraceChunk"]
        assert len(traces) == len(logged)
        for rec, trace in zip(logged, traces):
            decimated = path_metrics(trace)["path_length_mm"]
            assert decimated <= rec.path_length_mm + 1e-6

    def test_aborted_shot_skipped(self, session):
        from dataclasses import replace as dc_replace
        from springcurl.metrics import aggregate_trial
        result, _ = session
        manifest = result.events_by_day[1][0]["manifest"]
        completed = result.records[0]
        aborted = dc_replace(completed, aborted=True, shot_number=1)
        agg = aggregate_trial([completed, aborted], "p01",
                              completed.phase, completed.trial_index)
        events = [
            {"seq": 0, "t_ms": 0, "type": "SessionStarted", "manifest": manifest},
            {"seq": 1, "t_ms": 0, "type": "TrialStarted", "trial": {}},
            {"seq": 2, "t_ms": 1, "type": "Grab", "anchor": 0.0},
            {"seq": 3, "t_ms": 2, "type": "Release", "aborted": False,
             "force": completed.release_force_n,
             "elongation": completed.release_elongation_mm},
            {"seq": 4, "t_ms": 3, "type": "Grab", "anchor": 0.0},
            {"seq": 5, "t_ms": 4, "type": "Release", "aborted": True,
             "force": None, "elongation": None},
            {"seq": 6, "t_ms": 5, "type": "TrialEnded", "aggregate": agg.to_wire(),
             "shots": [completed.to_wire(), aborted.to_wire()]},
        ]
        with pytest.warns(UserWarning):
            records = replay(events)
        assert len(records) == 1
        assert not records[0].aborted

    def test_tamper_detected(self, session):
        result, _ = session
        events = [json.loads(json.dumps(e)) for e in result.events_by_day[2]]
        for event in events:
            if event["type"] == "TrialEnded":
                event["shots"][0]["landing"] += 5.0
                break
        with pytest.raises(SchemaMismatchError):
            replay(events)


class TestGoldenLog:
    """Frozen reference run: guards against silent drift in the engine,
    policies, rng use, or serialization."""

    GOLDEN = __file__.rsplit("/", 1)[0] + "/data/golden_day2.jsonl"

    def golden_config(self):
        return SessionConfig(
            "golden01", GroupCondition.ANTISYM_GAUSSIAN, protocol_seed=13,
            subject_seed=99, traits=TraitProfile(free_spirit=0.7, challenge=0.6))

    def test_replay_matches_stored_aggregates(self):
        events = read_log(self.GOLDEN)
        records = replay(events, atol=1e-9)
        assert len(records) == 24
        logged_aggregates = [e["aggregate"] for e in events if e["type"] == "TrialEnded"]
        assert len(logged_aggregates) == 4

    def test_regenerated_log_is_byte_identical(self):
        import json as json_mod
        result = run_session(self.golden_config())
        regenerated = "".join(json_mod.dumps(e) + "\n" for e in result.events_by_day[2])
        from pathlib import Path
        assert regenerated == Path(self.GOLDEN).read_text()


class TestExport:
    def test_row_counts_per_kind(self, session):
        result, _ = session
        assert len(dataset_rows(result.records, "training")) == 112
        assert len(dataset_rows(result.records, "learning")) == 36
        assert len(dataset_rows(result.records, "transfer")) == 72

    def test_catch_trials_labeled_linear(self, session):
        result, _ = session
        rows = dataset_rows(result.records, "training")
        catch_rows = [r for r in rows if r["TrialNumber"] in (4, 9, 13, 18, 22, 27)]
        assert len(catch_rows) == 24
        assert all(r["SpringType"] == "LS" for r in catch_rows)
        others = [r for r in rows if r["TrialNumber"] not in (4, 9, 13, 18, 22, 27)]
        assert all(r["SpringType"] == "AGS" for r in others)

    def test_transfer_balance(self, session):
        result, _ = session
        rows = dataset_rows(result.records, "transfer")
        for stage in ("BL", "STR", "LTR"):
            stage_rows = [r for r in rows if r["Stage"] == stage]
            assert len(stage_rows) == 24
            assert sum(r["TransTask"] for r in stage_rows) == 12

    def test_csv_deterministic(self, session):
        result, _ = session
        rerun = run_session(result.config)
        assert export_csv(result.records, "training") == \
            export_csv(rerun.records, "training")

    def test_csv_shape(self, session):
        result, _ = session
        text = export_csv(result.records, "learning")
        lines = text.strip().split("\n")
        assert lines[0].startswith("ID,Condition,Stage,SpringType,TrialNumber")
        assert len(lines) == 37
        assert all(len(line.split(",")) == len(lines[0].split(",")) for line in lines)

    def test_unknown_kind(self, session):
        result, _ = session
        with pytest.raises(ValueError):
            dataset_rows(result.records, "bogus")

    def test_trial_number_ranges(self, session):
        result, _ = session
        training = dataset_rows(result.records, "training")
        assert {r["TrialNumber"] for r in training} == set(range(28))
        for kind in ("learning", "transfer"):
            assert {r["TrialNumber"] for r in dataset_rows(result.records, kind)} == {0, 1}
        assert {r["ShotNumber"] for r in dataset_rows(result.records, "transfer")} == set(range(6))

    def test_error_symmetry_through_records(self, session):
        # nonlinear force errors recorded end-to-end equal the mirrored
        # spring's error at the same elongation
        from springcurl.springs import SpringKind, SpringParams, spring_force
        result, _ = session
        gs = SpringParams.main(SpringKind.GAUSSIAN)
        checked = 0
        for rec in result.records:
            if rec.spring_kind is SpringKind.ANTISYM_GAUSSIAN and not rec.aborted:
                own = abs(rec.release_force_n - rec.target_force_n)
                mirrored = abs(spring_force(gs, rec.release_elongation_mm)
                               - rec.target_force_n)
                assert own == pytest.approx(mirrored, abs=1e-10)
                checked += 1
        assert checked > 50


class TestAnalysisRows:
    def test_trait_centering(self, session):
        from springcurl.stats import TRAIT_COLUMNS, analysis_rows
        result, _ = session
        traits = {"p01": TraitProfile(free_spirit=0.9, challenge=0.2, curiosity=0.7)}
        rows = analysis_rows(result.records, "training", traits)
        for column in TRAIT_COLUMNS:
            mean = sum(r[column] for r in rows) / len(rows)
            assert abs(mean) < 1e-10

    def test_missing_traits_rejected(self, session):
        from springcurl.errors import InvalidInputError
        from springcurl.stats import analysis_rows
        result, _ = session
        with pytest.raises(InvalidInputError):
            analysis_rows(result.records, "training", {})
