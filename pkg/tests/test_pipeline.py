"""End-to-end orchestration: staging, skipping, resume, reproducibility."""

import json
from types import SimpleNamespace

import pytest

from instructlr.config import ConfigError, load_config
from instructlr.core import CheckedDraft, Draft, TriageStatus
from instructlr.gateway import (
    CallableBackend,
    Gateway,
    RecordingBackend,
    RemoteBackend,
    ReplayBackend,
)
from instructlr.jsonl import read_jsonl
from instructlr.pipeline import (
    PipelineError,
    RunReport,
    StageOutcome,
    apply_corrections,
    build_gateway,
    format_run_report,
    run_pipeline,
)
from instructlr.stats import dataset_stats
from pipeline_script import LOW_FIXES, TOP_DRAFT, e2e_script, expected_final_rows

from instructlr.core import CheckerAnalysis, CorrectionOption, StageReport

DATA_FILES = ("seeds.jsonl", "drafts.jsonl", "checked.jsonl", "final.jsonl")


def make_config(root, store_dir, extra_pipeline="", gateway_toml=None):
    """Write a TOML under root/ and load it; work dir lives next to it."""
    gateway_toml = gateway_toml or 'backend = "replay"'
    text = (
        "[paths]\n"
        'work_dir = "work"\n'
        f'transcript_dir = "{store_dir}"\n'
        "\n"
        "[gateway]\n"
        f"{gateway_toml}\n"
        "requests_per_minute = 1000000000.0\n"
        "\n"
        "[pipeline]\n"
        'lang = "dje"\n'
        "seeds_per_topic = 1\n"
        f"{extra_pipeline}"
    )
    path = root / "config.toml"
    path.write_text(text, encoding="utf-8")
    return load_config(path)


def fast_gateway(backend):
    return Gateway(backend, requests_per_minute=1e9, sleep=lambda s: None)


def snapshot_files(config):
    out = {
        name: (config.paths.work_dir / name).read_bytes()
        for name in DATA_FILES
    }
    for csv_path in sorted(config.paths.review_dir.glob("*.csv")):
        out[f"review/{csv_path.name}"] = csv_path.read_bytes()
    return out


class CountingBackend:
    def __init__(self, inner):
        self.inner = inner
        self.calls = 0

    def complete(self, request):
        self.calls += 1
        return self.inner.complete(request)


class AbortingBackend(CountingBackend):
    """Simulates a hard interruption partway through a run."""

    def __init__(self, inner, fail_at):
        super().__init__(inner)
        self.fail_at = fail_at

    def complete(self, request):
        if self.calls + 1 == self.fail_at:
            raise RuntimeError("simulated interruption")
        return super().complete(request)


@pytest.fixture(scope="module")
def recorded(tmp_path_factory):
    """One scripted run in record mode; later tests replay its store."""
    store = tmp_path_factory.mktemp("store")
    root = tmp_path_factory.mktemp("run-record")
    config = make_config(root, store)
    backend = CountingBackend(
        RecordingBackend(CallableBackend(e2e_script), store)
    )
    report = run_pipeline(config, gateway=fast_gateway(backend))
    return SimpleNamespace(
        store=store,
        config=config,
        report=report,
        calls=backend.calls,
        files=snapshot_files(config),
    )


@pytest.fixture(scope="module")
def replayed(recorded, tmp_path_factory):
    """A second run from the recorded store, fully offline."""
    root = tmp_path_factory.mktemp("run-replay")
    config = make_config(root, recorded.store)
    report = run_pipeline(config, gateway=build_gateway(config))
    return SimpleNamespace(
        config=config, report=report, files=snapshot_files(config)
    )


class TestFullRun:
    def test_all_stages_ran(self, recorded):
        names = [o.name for o in recorded.report.stages]
        assert names == ["seed", "draft", "check", "export"]
        assert all(not o.skipped for o in recorded.report.stages)
        for outcome in recorded.report.stages:
            assert outcome.report.requested == 20
            assert outcome.report.produced == 20
            assert outcome.report.failures == ()

    def test_call_budget(self, recorded):
        # 20 seeds + 20 drafts + 20*2 field checks + 4 chain checks
        assert recorded.calls == 84

    def test_final_is_snapshot_with_corrections(self, recorded):
        final = read_jsonl(recorded.config.paths.final, Draft)
        assert final == expected_final_rows()

    def test_triage_routing(self, recorded):
        checked = read_jsonl(recorded.config.paths.checked, CheckedDraft)
        by_status = {}
        for cd in checked:
            by_status.setdefault(cd.status, []).append(cd.draft.id)
        assert sorted(by_status[TriageStatus.LOW_PRIORITY]) == sorted(LOW_FIXES)
        assert by_status[TriageStatus.TOP_PRIORITY] == [TOP_DRAFT]
        assert len(by_status[TriageStatus.ACCEPTED]) == 17
        for cd in checked:
            if cd.status is TriageStatus.LOW_PRIORITY:
                assert cd.applied_correction == LOW_FIXES[cd.draft.id]
                assert cd.corrected_field == "resp_lrl"

    def test_review_sheet_orders_top_first(self, recorded):
        sheets = sorted(recorded.config.paths.review_dir.glob("*.csv"))
        assert [p.name for p in sheets] == ["review_001.csv"]
        lines = sheets[0].read_text(encoding="utf-8").splitlines()
        ids = [line.split(",")[0] for line in lines[1:]]
        assert ids == [TOP_DRAFT, *sorted(LOW_FIXES)]

    def test_chain_of_thought_survives_to_final(self, recorded):
        final = read_jsonl(recorded.config.paths.final, Draft)
        assert dataset_stats(final).cot_count == 4

    def test_no_checkpoints_left_behind(self, recorded):
        leftovers = list(recorded.config.paths.checkpoints_dir.glob("*"))
        assert leftovers == []

    def test_manifest_lists_all_stages(self, recorded):
        manifest = json.loads(
            recorded.config.paths.manifest.read_text(encoding="utf-8")
        )
        assert sorted(manifest) == ["check", "draft", "export", "seed"]
        assert manifest["export"]["outputs"] == [
            "final.jsonl",
            "review/review_001.csv",
        ]


class TestReproducibility:
    def test_replay_matches_recording(self, recorded, replayed):
        assert replayed.files == recorded.files

    def test_two_replay_runs_byte_identical(self, recorded, replayed, tmp_path):
        config = make_config(tmp_path, recorded.store)
        run_pipeline(config, gateway=build_gateway(config))
        files = snapshot_files(config)
        files["manifest.json"] = config.paths.manifest.read_bytes()
        expected = dict(replayed.files)
        expected["manifest.json"] = replayed.config.paths.manifest.read_bytes()
        assert files == expected

    def test_rerun_in_same_workdir_skips_every_stage(self, replayed):
        report = run_pipeline(
            replayed.config, gateway=build_gateway(replayed.config)
        )
        assert [o.skipped for o in report.stages] == [True] * 4
        assert [o.report for o in report.stages] == [None] * 4
        assert snapshot_files(replayed.config) == replayed.files

    def test_deleting_checked_reruns_only_check(self, recorded, tmp_path):
        config = make_config(tmp_path, recorded.store)
        run_pipeline(config, gateway=build_gateway(config))
        config.paths.checked.unlink()

        backend = CountingBackend(ReplayBackend(recorded.store))
        report = run_pipeline(config, gateway=fast_gateway(backend))
        skipped = {o.name: o.skipped for o in report.stages}
        assert skipped == {
            "seed": True, "draft": True, "check": False, "export": True,
        }
        assert backend.calls == 44
        assert snapshot_files(config) == recorded.files


class TestResume:
    def test_interrupt_mid_check_then_resume(self, recorded, tmp_path):
        config = make_config(tmp_path, recorded.store)
        # 40 calls cover seeds+drafts; call 47 is the 4th draft's first check
        backend = AbortingBackend(ReplayBackend(recorded.store), fail_at=47)
        with pytest.raises(PipelineError, match="check stage failed"):
            run_pipeline(config, gateway=fast_gateway(backend))

        ckpt = config.paths.checkpoints_dir / "check.ckpt.jsonl"
        assert ckpt.exists()
        assert len(read_jsonl(ckpt, CheckedDraft)) == 3
        assert config.paths.seeds.exists()
        assert config.paths.drafts.exists()
        assert not config.paths.checked.exists()

        resume = CountingBackend(ReplayBackend(recorded.store))
        report = run_pipeline(config, gateway=fast_gateway(resume))
        skipped = {o.name: o.skipped for o in report.stages}
        assert skipped == {
            "seed": True, "draft": True, "check": False, "export": False,
        }
        # 3 checkpointed drafts cost 6 calls on the first try; never repaid
        assert resume.calls == 44 - 6
        assert snapshot_files(config) == recorded.files
        assert not ckpt.exists()

    def test_changed_inputs_discard_stale_checkpoint(self, recorded, tmp_path):
        config = make_config(tmp_path, recorded.store)
        backend = AbortingBackend(ReplayBackend(recorded.store), fail_at=47)
        with pytest.raises(PipelineError):
            run_pipeline(config, gateway=fast_gateway(backend))

        # same work dir, different stage parameters: every input hash moves
        retuned = make_config(tmp_path, recorded.store, "max_retries = 2\n")
        assert retuned.paths.work_dir == config.paths.work_dir
        resume = CountingBackend(ReplayBackend(recorded.store))
        report = run_pipeline(retuned, gateway=fast_gateway(resume))
        assert all(not o.skipped for o in report.stages)
        assert resume.calls == 84  # checkpoint discarded, full re-check
        assert snapshot_files(retuned) == recorded.files

    def test_export_reruns_when_batch_size_changes(self, recorded, tmp_path):
        config = make_config(tmp_path, recorded.store)
        run_pipeline(config, gateway=build_gateway(config))

        resized = make_config(tmp_path, recorded.store, "review_batch_size = 2\n")
        backend = CountingBackend(ReplayBackend(recorded.store))
        report = run_pipeline(resized, gateway=fast_gateway(backend))
        skipped = {o.name: o.skipped for o in report.stages}
        assert skipped == {
            "seed": True, "draft": True, "check": True, "export": False,
        }
        assert backend.calls == 0
        names = sorted(p.name for p in resized.paths.review_dir.glob("*.csv"))
        assert names == ["review_001.csv", "review_002.csv"]


class TestScopedRuns:
    def test_topic_subset(self, recorded, tmp_path):
        from instructlr.resources import load_topics

        by_id = {t.id: t for t in load_topics()}
        chosen = [by_id[6].name_fr, by_id[18].name_fr, by_id[19].name_fr]
        topics_toml = "topics = [" + ", ".join(
            json.dumps(name, ensure_ascii=False) for name in chosen
        ) + "]\n"
        config = make_config(tmp_path, recorded.store, topics_toml)
        report = run_pipeline(config, gateway=build_gateway(config))

        assert report.stages[0].report.requested == 3
        final = read_jsonl(config.paths.final, Draft)
        assert [d.id for d in final] == ["d-06-0001", "d-18-0001", "d-19-0001"]
        assert final[0].resp_lrl == LOW_FIXES["d-06-0001"]
        assert final[2].resp_lrl != ""  # top priority kept verbatim
        sheet = next(config.paths.review_dir.glob("*.csv"))
        ids = [
            line.split(",")[0]
            for line in sheet.read_text(encoding="utf-8").splitlines()[1:]
        ]
        assert ids == ["d-19-0001", "d-06-0001", "d-18-0001"]

    def test_unknown_topic_rejected_before_any_stage(self, recorded, tmp_path):
        config = make_config(
            tmp_path, recorded.store, 'topics = ["Astrologie inverse"]\n'
        )
        with pytest.raises(ConfigError, match="unknown topic"):
            run_pipeline(config, gateway=build_gateway(config))
        assert not config.paths.work_dir.exists()

    def test_backend_failure_wrapped_per_stage(self, tmp_path):
        def explode(request):
            raise RuntimeError("socket closed")

        config = make_config(tmp_path, tmp_path / "empty-store")
        with pytest.raises(PipelineError, match="seed stage failed"):
            run_pipeline(
                config, gateway=fast_gateway(CallableBackend(explode))
            )
        assert not config.paths.seeds.exists()
        assert not config.paths.manifest.exists()


class TestApplyCorrections:
    def make_checked(self, status, correction=None, field=None):
        draft = Draft(
            id="d-01-0001",
            instr_fr="Question?",
            instr_lrl="Hari no?",
            resp_lrl="Hari no.",
            cot_lrl="N/A",
            topic_fr="Divers",
            lang="dje",
        )
        analysis = CheckerAnalysis(
            is_correct=status is TriageStatus.ACCEPTED,
            reason=None if status is TriageStatus.ACCEPTED else "bad",
            options=(CorrectionOption(text=correction, explanation=""),)
            if correction
            else (),
        )
        return CheckedDraft(
            draft=draft,
            status=status,
            analysis=analysis,
            applied_correction=correction,
            corrected_field=field,
        )

    def test_substitutes_named_field(self):
        cd = self.make_checked(
            TriageStatus.LOW_PRIORITY, "Hari ga no.", "resp_lrl"
        )
        (final,) = apply_corrections([cd])
        assert final.resp_lrl == "Hari ga no."
        assert final.instr_lrl == "Hari no?"

    def test_instruction_field_correction(self):
        cd = self.make_checked(
            TriageStatus.LOW_PRIORITY, "Hari ga no?", "instr_lrl"
        )
        (final,) = apply_corrections([cd])
        assert final.instr_lrl == "Hari ga no?"
        assert final.resp_lrl == "Hari no."

    def test_accepted_and_top_pass_through(self):
        accepted = self.make_checked(TriageStatus.ACCEPTED)
        top = self.make_checked(TriageStatus.TOP_PRIORITY)
        finals = apply_corrections([accepted, top])
        assert finals == [accepted.draft, top.draft]


class TestGatewayConstruction:
    def test_replay_backend(self, recorded, tmp_path):
        config = make_config(tmp_path, recorded.store)
        gateway = build_gateway(config)
        assert isinstance(gateway.backend, ReplayBackend)
        assert gateway.backend.store_dir == recorded.store

    def test_record_backend(self, tmp_path):
        gateway_toml = (
            'backend = "record"\n'
            'url = "https://example.invalid/v1"\n'
            'model = "m"'
        )
        config = make_config(tmp_path, tmp_path / "store", gateway_toml=gateway_toml)
        gateway = build_gateway(config)
        assert isinstance(gateway.backend, RecordingBackend)
        assert isinstance(gateway.backend.inner, RemoteBackend)
        assert gateway.backend.inner.model == "m"

    def test_live_backend(self, tmp_path):
        gateway_toml = (
            'backend = "live"\n'
            'url = "https://example.invalid/v1"\n'
            'model = "m"'
        )
        config = make_config(tmp_path, tmp_path / "store", gateway_toml=gateway_toml)
        gateway = build_gateway(config)
        assert isinstance(gateway.backend, RemoteBackend)


class TestRunReportFormat:
    def test_mixed_report(self):
        report = RunReport(
            stages=(
                StageOutcome("seed", True, None),
                StageOutcome(
                    "draft",
                    False,
                    StageReport(
                        stage="draft",
                        requested=3,
                        produced=2,
                        retries=1,
                        failures=(("d-01-0002", "no JSON found"),),
                        elapsed_seconds=0.25,
                    ),
                ),
            )
        )
        text = format_run_report(report)
        lines = text.splitlines()
        assert "seed" in lines[0] and "skipped" in lines[0]
        assert "2/3 produced" in lines[1]
        assert "1 retries" in lines[1]
        assert "failure d-01-0002: no JSON found" in lines[2]
