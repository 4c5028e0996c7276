"""Stage orchestration: seed -> draft -> check -> export.

Each stage records a manifest entry (hash of its inputs, list of its
outputs).  A stage reruns only when its input hash changed or an output
file is missing; an interrupted stage resumes from its checkpoint as
long as the inputs are unchanged, otherwise the stale checkpoint is
discarded.  Under a replay gateway a completed run is reproducible
byte for byte.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path

from .annotation import export_review_sheet
from .checker import load_exemplars, run_batch
from .config import Config, ConfigError
from .core import (
    CheckedDraft,
    Draft,
    SeedInstruction,
    StageReport,
    Topic,
)
from .drafts import LANGUAGE_NAMES, generate_drafts, language_name
from .gateway import (
    Gateway,
    RecordingBackend,
    RemoteBackend,
    ReplayBackend,
)
from .grammar import load_lexicon, load_rules
from .jsonl import read_jsonl, write_jsonl
from .resources import (
    data_path,
    load_glossary,
    load_guidelines,
    load_sentences,
    load_topics,
    select_topics,
)
from .retrieval import build_index
from .seeds import SeedBatchPlan, generate_seeds

STAGES = ("seed", "draft", "check", "export")

# CheckedDraft.corrected_field uses wire names; Draft uses attribute names.
_FIELD_ATTR = {"instr_lrl": "instr_lrl", "resp_lrl": "resp_lrl", "CoT_lrl": "cot_lrl"}


class PipelineError(RuntimeError):
    """A stage failed; details name the stage, checkpoints stay on disk."""


@dataclass(frozen=True)
class StageOutcome:
    name: str
    skipped: bool
    report: StageReport | None  # None when the stage was skipped


@dataclass(frozen=True)
class RunReport:
    stages: tuple[StageOutcome, ...]


def apply_corrections(checked: list[CheckedDraft]) -> list[Draft]:
    """Substitute each low-priority correction into its named field."""
    final = []
    for cd in checked:
        if cd.applied_correction and cd.corrected_field:
            attr = _FIELD_ATTR[cd.corrected_field]
            final.append(
                dataclasses.replace(cd.draft, **{attr: cd.applied_correction})
            )
        else:
            final.append(cd.draft)
    return final


def build_gateway(config: Config) -> Gateway:
    g = config.gateway
    if g.backend == "replay":
        backend = ReplayBackend(config.paths.transcript_dir)
    elif g.backend == "record":
        backend = RecordingBackend(
            RemoteBackend(g.url, g.model), config.paths.transcript_dir
        )
    else:
        backend = RemoteBackend(g.url, g.model)
    return Gateway(
        backend,
        requests_per_minute=g.requests_per_minute,
        max_attempts=g.max_attempts,
    )


def _hash_file(path: Path) -> str:
    if not path.exists():
        return "absent"
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _hash_dir(path: Path) -> str:
    if not path.is_dir():
        return "absent"
    digest = hashlib.sha256()
    for child in sorted(path.iterdir()):
        if child.is_file():
            digest.update(child.name.encode("utf-8"))
            digest.update(child.read_bytes())
    return digest.hexdigest()


def _hash_inputs(parts: dict) -> str:
    return hashlib.sha256(
        json.dumps(parts, sort_keys=True, ensure_ascii=False).encode("utf-8")
    ).hexdigest()


def _load_manifest(path: Path) -> dict:
    if not path.exists():
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _save_manifest(manifest: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    os.replace(tmp, path)


class _Stage:
    """Bookkeeping around one stage: skip detection and checkpoints."""

    def __init__(self, runner: "_Runner", name: str, inputs: dict):
        self.runner = runner
        self.name = name
        self.inputs_hash = _hash_inputs(inputs)
        self.ckpt = runner.config.paths.checkpoints_dir / f"{name}.ckpt.jsonl"
        self._marker = self.ckpt.with_suffix(".inputs")

    def outputs(self) -> list[Path] | None:
        """Recorded outputs when the manifest is current, else None."""
        entry = self.runner.manifest.get(self.name)
        if entry is None or entry["inputs"] != self.inputs_hash:
            return None
        paths = [self.runner.work_dir / p for p in entry["outputs"]]
        if all(p.exists() for p in paths):
            return paths
        return None

    def prepare_checkpoint(self) -> Path:
        # A checkpoint from a run with different inputs must not seed
        # this one; the marker file remembers which inputs it belongs to.
        self.ckpt.parent.mkdir(parents=True, exist_ok=True)
        if (
            not self._marker.exists()
            or self._marker.read_text(encoding="utf-8") != self.inputs_hash
        ):
            self.ckpt.unlink(missing_ok=True)
            self._marker.write_text(self.inputs_hash, encoding="utf-8")
        return self.ckpt

    def complete(self, outputs: list[Path]) -> None:
        self.ckpt.unlink(missing_ok=True)
        self._marker.unlink(missing_ok=True)
        work = self.runner.work_dir
        self.runner.manifest[self.name] = {
            "inputs": self.inputs_hash,
            "outputs": [os.path.relpath(p, work) for p in outputs],
        }
        _save_manifest(
            self.runner.manifest, self.runner.config.paths.manifest
        )


class _Runner:
    def __init__(self, config: Config, gateway: Gateway | None):
        self.config = config
        self.work_dir = config.paths.work_dir
        self.gateway = gateway or build_gateway(config)
        self.manifest = _load_manifest(config.paths.manifest)
        self.outcomes: list[StageOutcome] = []

    def run(self) -> RunReport:
        cfg = self.config.pipeline
        topics = load_topics()
        selected = self._select_topics(topics, cfg.topics)
        plan = SeedBatchPlan(
            {t.name_fr: cfg.seeds_per_topic for t in selected}
        )
        language_name(cfg.lang)  # unknown language fails before any stage

        self.work_dir.mkdir(parents=True, exist_ok=True)
        for file_path in (
            self.config.paths.seeds,
            self.config.paths.drafts,
            self.config.paths.checked,
            self.config.paths.final,
        ):
            file_path.parent.mkdir(parents=True, exist_ok=True)

        seeds = self._seed_stage(plan, selected)
        drafts = self._draft_stage(seeds, topics)
        checked = self._check_stage(drafts)
        self._export_stage(checked)
        return RunReport(stages=tuple(self.outcomes))

    @staticmethod
    def _select_topics(topics: list[Topic], wanted: tuple[str, ...]):
        try:
            return select_topics(topics, wanted)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def _gateway_fingerprint(self) -> dict:
        g = self.config.gateway
        parts: dict = {"backend": g.backend}
        if g.backend == "replay":
            parts["transcript"] = _hash_dir(self.config.paths.transcript_dir)
        return parts

    def _execute(self, stage: _Stage, run_fn, load_fn, outputs_fn):
        """Shared skip/run/complete plumbing around one stage."""
        recorded = stage.outputs()
        if recorded is not None:
            self.outcomes.append(StageOutcome(stage.name, True, None))
            return load_fn(recorded)
        try:
            result, report = run_fn(stage.prepare_checkpoint())
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(f"{stage.name} stage failed: {exc}") from exc
        out_paths = outputs_fn(result)
        stage.complete(out_paths)
        self.outcomes.append(StageOutcome(stage.name, False, report))
        return result

    def _seed_stage(self, plan: SeedBatchPlan, selected) -> list[SeedInstruction]:
        cfg = self.config.pipeline
        stage = _Stage(
            self,
            "seed",
            {
                "topics_catalog": _hash_file(data_path("topics.json")),
                "quotas": plan.quotas,
                "max_retries": cfg.max_retries,
                "gateway": self._gateway_fingerprint(),
            },
        )

        def run_fn(ckpt):
            seeds, report = generate_seeds(
                plan,
                selected,
                self.gateway,
                max_retries=cfg.max_retries,
                checkpoint_path=ckpt,
            )
            write_jsonl(seeds, self.config.paths.seeds)
            return seeds, report

        return self._execute(
            stage,
            run_fn,
            load_fn=lambda _: read_jsonl(self.config.paths.seeds, SeedInstruction),
            outputs_fn=lambda _: [self.config.paths.seeds],
        )

    def _draft_stage(self, seeds, topics) -> list[Draft]:
        cfg = self.config.pipeline
        stage = _Stage(
            self,
            "draft",
            {
                "seeds": _hash_file(self.config.paths.seeds),
                "guidelines": _hash_file(
                    data_path("guidelines", f"{cfg.lang}.txt")
                ),
                "lang": cfg.lang,
                "max_retries": cfg.max_retries,
                "gateway": self._gateway_fingerprint(),
            },
        )

        def run_fn(ckpt):
            drafts, report = generate_drafts(
                seeds,
                topics,
                cfg.lang,
                self.gateway,
                load_guidelines(lang=cfg.lang),
                checkpoint_path=ckpt,
                max_retries=cfg.max_retries,
            )
            write_jsonl(drafts, self.config.paths.drafts)
            return drafts, report

        return self._execute(
            stage,
            run_fn,
            load_fn=lambda _: read_jsonl(self.config.paths.drafts, Draft),
            outputs_fn=lambda _: [self.config.paths.drafts],
        )

    def _check_stage(self, drafts) -> list[CheckedDraft]:
        cfg = self.config.pipeline
        lang = cfg.lang
        stage = _Stage(
            self,
            "check",
            {
                "drafts": _hash_file(self.config.paths.drafts),
                "rules": _hash_file(data_path("rules", f"{lang}.json")),
                "lexicon": _hash_file(data_path("lexicon", f"{lang}.tsv")),
                "glossary": _hash_file(data_path("glossary", f"{lang}.tsv")),
                "sentences": _hash_file(data_path("sentences", f"{lang}.txt")),
                "exemplars": _hash_file(data_path("exemplars", f"{lang}.json")),
                "n_shot": cfg.n_shot,
                "max_retries": cfg.max_retries,
                "gateway": self._gateway_fingerprint(),
            },
        )

        def run_fn(ckpt):
            kb = build_index(
                load_sentences(lang=lang),
                load_rules(data_path("rules", f"{lang}.json")),
                load_glossary(lang=lang),
            )
            lexicon = load_lexicon(data_path("lexicon", f"{lang}.tsv"))
            try:
                exemplars = load_exemplars(lang=lang)
            except FileNotFoundError:
                exemplars = []
            checked, _, report = run_batch(
                drafts,
                kb,
                lexicon,
                self.gateway,
                exemplars=exemplars,
                n_shot=cfg.n_shot,
                language_name=LANGUAGE_NAMES[lang],
                max_retries=cfg.max_retries,
                checkpoint_path=ckpt,
            )
            write_jsonl(checked, self.config.paths.checked)
            return checked, report

        return self._execute(
            stage,
            run_fn,
            load_fn=lambda _: read_jsonl(self.config.paths.checked, CheckedDraft),
            outputs_fn=lambda _: [self.config.paths.checked],
        )

    def _export_stage(self, checked) -> None:
        cfg = self.config.pipeline
        stage = _Stage(
            self,
            "export",
            {
                "checked": _hash_file(self.config.paths.checked),
                "review_batch_size": cfg.review_batch_size,
            },
        )

        def run_fn(_ckpt):
            started = time.monotonic()
            final = apply_corrections(checked)
            write_jsonl(final, self.config.paths.final)
            review_paths = export_review_sheet(
                checked,
                self.config.paths.review_dir,
                batch_size=cfg.review_batch_size,
            )
            report = StageReport(
                stage="export",
                requested=len(checked),
                produced=len(final),
                elapsed_seconds=time.monotonic() - started,
            )
            return [self.config.paths.final, *review_paths], report

        self._execute(
            stage,
            run_fn,
            load_fn=lambda recorded: recorded,
            outputs_fn=lambda paths: paths,
        )


def run_pipeline(config: Config, gateway: Gateway | None = None) -> RunReport:
    """Run all stages (skipping the up-to-date ones) and report each."""
    return _Runner(config, gateway).run()


def format_run_report(report: RunReport) -> str:
    lines = []
    for outcome in report.stages:
        if outcome.skipped:
            lines.append(f"{outcome.name:<7} skipped (up to date)")
            continue
        r = outcome.report
        line = (
            f"{outcome.name:<7} ran      "
            f"{r.produced}/{r.requested} produced, "
            f"{r.retries} retries, {len(r.failures)} failed, "
            f"{r.elapsed_seconds:.2f}s"
        )
        lines.append(line)
        for item_id, reason in r.failures:
            lines.append(f"        failure {item_id}: {reason}")
    return "\n".join(lines)
