"""Target-language draft generation from French seeds.

One model call per seed. Draft ids are derived from seed ids by a pure
stem swap so re-runs never fork identities, and a checkpoint file makes
interrupted batches resumable without repeating completed calls.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

from .core import (
    Draft,
    SeedInstruction,
    StageReport,
    Topic,
    topics_by_name,
    validate_draft,
)
from .gateway import Gateway, GenerationRequest, NonRetriableError
from .jsonl import read_jsonl, write_jsonl
from .seeds import SeedParseError, extract_json_object

LANGUAGE_NAMES = {
    "dje": "Zarma",
    "bm": "Bambara",
    "ff": "Fulfulde",
}

DRAFT_SYSTEM_TEMPLATE = (
    "Vous êtes un assistant IA expert dans la génération de paires "
    "instruction–réponse pour des langues à faibles ressources, "
    "spécifiquement pour le {target_language}. Votre tâche : (1) générer "
    "instr_lrl — la version de l'instruction en {target_language}; (2) "
    "générer resp_lrl — une réponse pertinente et grammaticalement "
    "correcte en {target_language}; (3) pour les sujets de raisonnement, "
    "générer CoT_lrl — une explication des étapes de raisonnement (max "
    "200 mots); pour les autres sujets, CoT_lrl doit être \"N/A\"."
    "\n\nCONTRAINTES:\n"
    "1. LES MOTS TECHNIQUES (SCIENCE, MÉDECINE, ETC.) DOIVENT RESTER "
    "INCHANGÉS MAIS UTILISER LEUR VERSION FRANÇAISE.\n"
    "2. SI UN MOT N'A PAS D'ÉQUIVALENT EN {target_language_upper}, "
    "ÉCRIVEZ SA TRANSCRIPTION PHONÉTIQUE EN FRANÇAIS.\n"
    "3. N'INVENTEZ PAS DE MOTS. SUIVEZ LES DIRECTIVES.\n"
    "4. PAS DE TRADUCTION MOT À MOT.\n"
    "5. LES RÉPONSES (resp_lrl) NE DOIVENT PAS DÉPASSER 100 MOTS."
)

REQUIRED_DRAFT_KEYS = ("instr_fr", "instr_lrl", "resp_lrl", "CoT_lrl", "lang")


class DraftParseError(ValueError):
    """Completion is not a usable draft payload."""


class DraftRejected(ValueError):
    """Payload parsed but breaks draft invariants; carries the breach list."""

    def __init__(self, reasons: list[str]):
        super().__init__("; ".join(reasons))
        self.reasons = tuple(reasons)


def language_name(lang: str) -> str:
    try:
        return LANGUAGE_NAMES[lang]
    except KeyError:
        raise ValueError(f"no display name registered for language {lang!r}")


def draft_id_for_seed(seed_id: str) -> str:
    """Stable draft id for a seed id; pure stem swap."""
    if seed_id.startswith("s-"):
        return "d-" + seed_id[2:]
    return "d-" + seed_id


def render_draft_system(lang: str) -> str:
    name = language_name(lang)
    return DRAFT_SYSTEM_TEMPLATE.format(
        target_language=name, target_language_upper=name.upper()
    )


def render_draft_request(
    seed: SeedInstruction, lang: str, guidelines: list[str]
) -> str:
    """User part of the draft prompt: request JSON plus expected keys."""
    payload = {
        "instruction_fr": seed.instruction_fr,
        "context_fr": seed.context_fr,
        "specific_guidelines": list(guidelines),
    }
    body = json.dumps(payload, ensure_ascii=False, indent=2)
    expected = (
        '{"instr_fr": "...", "instr_lrl": "...", "resp_lrl": "...", '
        f'"CoT_lrl": "...", "lang": "{lang}"}}'
    )
    return (
        "USER REQUEST (JSON INPUT):\n"
        + body
        + "\n\nEXPECTED OUTPUT (JSONL):\n"
        + expected
    )


def render_draft_prompt(
    seed: SeedInstruction, lang: str, guidelines: list[str]
) -> str:
    """Full prompt text (system + request), for inspection and goldens."""
    return render_draft_system(lang) + "\n\n" + render_draft_request(
        seed, lang, guidelines
    )


def parse_draft_response(
    completion: str, seed: SeedInstruction, topic: Topic, lang: str
) -> Draft:
    """Draft from a completion; invariant breaches raise DraftRejected."""
    try:
        obj = extract_json_object(completion)
    except SeedParseError as exc:
        raise DraftParseError(str(exc)) from None
    for key in REQUIRED_DRAFT_KEYS:
        if key not in obj:
            raise DraftParseError(f"missing key: {key}")
        if not isinstance(obj[key], str):
            raise DraftParseError(f"key {key} must be a string")
    if obj["lang"] != lang:
        raise DraftParseError(
            f"lang mismatch: expected {lang!r}, got {obj['lang']!r}"
        )
    draft = Draft(
        id=draft_id_for_seed(seed.id),
        instr_fr=obj["instr_fr"],
        instr_lrl=obj["instr_lrl"],
        resp_lrl=obj["resp_lrl"],
        cot_lrl=obj["CoT_lrl"],
        topic_fr=topic.name_fr,
        lang=lang,
    )
    breaches = validate_draft(draft, [topic])
    if breaches:
        raise DraftRejected(breaches)
    return draft


def generate_drafts(
    seeds: list[SeedInstruction],
    topics: list[Topic],
    lang: str,
    gateway: Gateway,
    guidelines: list[str],
    checkpoint_path: Path | None = None,
    max_retries: int = 3,
) -> tuple[list[Draft], StageReport]:
    """One draft per seed, resumable through the checkpoint file.

    Seeds whose topic is unknown are reported as failures without a model
    call. A retry exhausts its budget (default 3 extra attempts) before the
    seed is marked failed; completed drafts are checkpointed after every
    success so an interrupted run resumes without repeating calls.
    """
    catalog = topics_by_name(topics)
    started = time.monotonic()
    system = render_draft_system(lang)

    done: dict[str, Draft] = {}
    if checkpoint_path is not None and checkpoint_path.exists():
        for prior in read_jsonl(checkpoint_path, Draft):
            done[prior.id] = prior

    drafts: list[Draft] = []
    retries = 0
    failures: list[tuple[str, str]] = []
    for seed in seeds:
        draft_id = draft_id_for_seed(seed.id)
        if draft_id in done:
            drafts.append(done[draft_id])
            continue
        topic = catalog.get(seed.context_fr)
        if topic is None:
            failures.append((seed.id, f"unknown topic: {seed.context_fr!r}"))
            continue
        produced = None
        last_reason = "retry budget exhausted"
        for attempt in range(max_retries + 1):
            tag = f"draft:{seed.id}"
            if attempt:
                tag += f":retry{attempt}"
                retries += 1
            request = GenerationRequest(
                system_preamble=system,
                user_content=render_draft_request(seed, lang, guidelines),
                request_tag=tag,
            )
            try:
                completion = gateway.generate(request).text
            except NonRetriableError as exc:
                last_reason = str(exc)
                continue
            try:
                produced = parse_draft_response(completion, seed, topic, lang)
            except (DraftParseError, DraftRejected) as exc:
                last_reason = str(exc)
                continue
            break
        if produced is None:
            failures.append((seed.id, last_reason))
            continue
        drafts.append(produced)
        done[produced.id] = produced
        if checkpoint_path is not None:
            write_jsonl(drafts, checkpoint_path)
    report = StageReport(
        stage="draft",
        requested=len(seeds),
        produced=len(drafts),
        retries=retries,
        failures=tuple(failures),
        elapsed_seconds=time.monotonic() - started,
    )
    return drafts, report
