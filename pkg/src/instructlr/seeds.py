"""French seed-instruction generation: prompt, parsing, batch planning.

One seed per model call. Diversity is enforced two ways: near-duplicate
instructions are rejected and regenerated, and the leading directive verb
is rotated inside a sliding per-topic window (best effort, the model may
refuse to vary).
"""

from __future__ import annotations

import json
import math
import string
import time
from dataclasses import dataclass
from pathlib import Path

from .core import SeedInstruction, StageReport, Topic, topics_by_name
from .gateway import Gateway, GenerationRequest, NonRetriableError
from .jsonl import read_jsonl, write_jsonl

SEED_SYSTEM_PREAMBLE = (
    "Vous êtes un générateur de consignes d'entraînement en français. "
    "Respectez strictement la tâche, les contraintes et le format demandés."
)

SEED_PROMPT_TEMPLATE = """Domaine : {domain}

TASK:
GÉNÉREZ UNE SEULE CONSIGNE OU QUESTION EN FRANÇAIS, REPRÉSENTATIVE DE CE DOMAINE.
VOUS POUVEZ CHOISIR :
- QUESTION À CHOIX MULTIPLES (Options: A)..., B)... etc.)
- QUESTION VRAI/FAUX
- AFFIRMATION À COMPLÉTER
- DEMANDE DE LISTE (ex. : "Donnez x exemples de...")
- TÂCHE OUVERTE (CLASSIFICATION, RÉSUMÉ, EXPLICATION, EXEMPLE, ETC.)
- OU N'IMPORTE QUEL AUTRE STYLE.

CONTRAINTES :
1. RESTEZ EN 1 À 4 PHRASES.
2. NE DEMANDEZ PAS DE DESSIN, DE CHANT, DE GÉNÉRATION D'IMAGE, NI DE RECHERCHE SUR LE WEB.
3. UTILISEZ UN VERBE UNIQUE POUR ÉVITER LA RÉPÉTITION ET MAXIMISER LA DIVERSITÉ.
4. FOURNISSEZ UNE ENTRÉE RÉALISTE (<=150 MOTS).
5. L'ENTRÉE DOIT ÊTRE SPÉCIFIQUE, SUBSTANTIELLE ET FOURNIR UN CONTENU STIMULANT.
6. NE RÉPONDEZ PAS AUX INSTRUCTIONS OU QUESTIONS — LIMITEZ-VOUS JUSTE À L'INSTRUCTION OU À LA QUESTION.

OUTPUT FORMAT (JSON):
RENVOYEZ STRICTEMENT CE JSON :
{{
  "instruction_fr": "<VOTRE INSTRUCTION>",
  "context_fr": "{domain}"
}}"""

# First-token verbs recognized for the rotation rule.
DIRECTIVE_VERBS = frozenset({
    "explique", "expliquez", "décris", "décrivez", "analyse", "analysez",
    "calcule", "calculez", "donne", "donnez", "définis", "définissez",
    "résous", "résolvez", "trouve", "trouvez", "cite", "citez", "liste",
    "listez", "compare", "comparez", "résume", "résumez", "traduis",
    "traduisez", "classe", "classez", "identifie", "identifiez", "propose",
    "proposez", "rédige", "rédigez", "écris", "écrivez", "montre",
    "montrez", "démontre", "démontrez", "évalue", "évaluez", "justifie",
    "justifiez", "complète", "complétez", "corrige", "corrigez", "choisis",
    "choisissez", "détermine", "déterminez", "nomme", "nommez", "lis",
    "lisez", "dis", "dites",
})


class SeedParseError(ValueError):
    """Completion could not be turned into a valid seed."""


@dataclass(frozen=True)
class SeedBatchPlan:
    quotas: dict[str, int]  # topic name -> count

    @property
    def total_count(self) -> int:
        return sum(self.quotas.values())

    def __post_init__(self) -> None:
        if not self.quotas:
            raise ValueError("plan must cover at least one topic")
        for name, quota in self.quotas.items():
            if quota <= 0:
                raise ValueError(f"quota for {name!r} must be positive")

    @classmethod
    def equal_split(cls, topics: list[Topic], total: int) -> "SeedBatchPlan":
        if total % len(topics) != 0:
            raise ValueError(
                f"{total} seeds cannot be split equally over "
                f"{len(topics)} topics"
            )
        per = total // len(topics)
        return cls({t.name_fr: per for t in topics})


def render_seed_prompt(topic: Topic) -> str:
    """The seed prompt for one topic; pure and total."""
    return SEED_PROMPT_TEMPLATE.format(domain=topic.name_fr)


def extract_json_object(completion: str) -> dict:
    """First balanced top-level JSON object embedded in the completion."""
    start = completion.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escaped = False
        for idx in range(start, len(completion)):
            ch = completion[idx]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    candidate = completion[start: idx + 1]
                    try:
                        obj = json.loads(candidate)
                    except json.JSONDecodeError:
                        break
                    if isinstance(obj, dict):
                        return obj
                    break
        start = completion.find("{", start + 1)
    raise SeedParseError("no JSON object found in completion")


def parse_seed_response(
    completion: str, expected_topic: Topic, seed_id: str
) -> SeedInstruction:
    obj = extract_json_object(completion)
    if "instruction_fr" not in obj:
        raise SeedParseError("missing key: instruction_fr")
    if "context_fr" not in obj:
        raise SeedParseError("missing key: context_fr")
    instruction = obj["instruction_fr"]
    context = obj["context_fr"]
    if not isinstance(instruction, str) or not instruction.strip():
        raise SeedParseError("instruction_fr must be a non-empty string")
    if context != expected_topic.name_fr:
        raise SeedParseError(
            f"topic mismatch: expected {expected_topic.name_fr!r}, "
            f"got {context!r}"
        )
    return SeedInstruction(
        id=seed_id, instruction_fr=instruction, context_fr=context
    )


_PUNCT_TABLE = str.maketrans({c: " " for c in string.punctuation + "«»“”‘’…"})


def normalize_instruction(text: str) -> str:
    """Lowercased, punctuation-stripped, space-collapsed comparison form."""
    return " ".join(text.casefold().translate(_PUNCT_TABLE).split())


def jaccard(a: str, b: str) -> float:
    set_a = set(normalize_instruction(a).split())
    set_b = set(normalize_instruction(b).split())
    if not set_a and not set_b:
        return 1.0
    union = set_a | set_b
    return len(set_a & set_b) / len(union)


def leading_verb(instruction: str) -> str | None:
    words = normalize_instruction(instruction).split()
    if words and words[0] in DIRECTIVE_VERBS:
        return words[0]
    return None


DUPLICATE_THRESHOLD = 0.9


def generate_seeds(
    plan: SeedBatchPlan,
    topics: list[Topic],
    gateway: Gateway,
    max_retries: int = 3,
    checkpoint_path: Path | None = None,
) -> tuple[list[SeedInstruction], StageReport]:
    """Generate the planned seeds; deterministic under a replay backend.

    Slots run in catalog order. A slot retries on parse errors, near
    duplicates and verb-rotation conflicts (the last only best-effort);
    after the retry budget a duplicate/parse failure marks the slot failed
    while a verb conflict is accepted. With a checkpoint path, accepted
    seeds are persisted after each slot and a rerun resumes past them
    (the dedup/verb state is rebuilt, so resumed output matches an
    uninterrupted run); a gateway abort leaves the checkpoint in place.
    """
    catalog = topics_by_name(topics)
    for name in plan.quotas:
        if name not in catalog:
            raise ValueError(f"plan references unknown topic {name!r}")

    done: dict[str, SeedInstruction] = {}
    if checkpoint_path is not None and checkpoint_path.exists():
        for prior in read_jsonl(checkpoint_path, SeedInstruction):
            done[prior.id] = prior

    started = time.monotonic()
    seeds: list[SeedInstruction] = []
    normalized_seen: list[str] = []
    verbs_by_topic: dict[str, list[str | None]] = {}
    retries = 0
    failures: list[tuple[str, str]] = []

    def accept(seed: SeedInstruction, topic: Topic) -> None:
        seeds.append(seed)
        normalized_seen.append(normalize_instruction(seed.instruction_fr))
        verbs_by_topic[topic.name_fr].append(leading_verb(seed.instruction_fr))

    ordered = [t for t in topics if t.name_fr in plan.quotas]
    for topic in ordered:
        quota = plan.quotas[topic.name_fr]
        window = math.ceil(quota / 5)
        verbs_by_topic.setdefault(topic.name_fr, [])
        for slot in range(1, quota + 1):
            seed_id = f"s-{topic.id:02d}-{slot:04d}"
            if seed_id in done:
                accept(done[seed_id], topic)
                continue
            accepted = None
            last_reason = "retry budget exhausted"
            for attempt in range(max_retries + 1):
                tag = f"seed:{topic.id}:{slot}"
                if attempt:
                    tag += f":retry{attempt}"
                    retries += 1
                request = GenerationRequest(
                    system_preamble=SEED_SYSTEM_PREAMBLE,
                    user_content=render_seed_prompt(topic),
                    request_tag=tag,
                )
                try:
                    completion = gateway.generate(request).text
                except NonRetriableError as exc:
                    last_reason = str(exc)
                    continue
                try:
                    seed = parse_seed_response(completion, topic, seed_id)
                except SeedParseError as exc:
                    last_reason = str(exc)
                    continue
                normalized = normalize_instruction(seed.instruction_fr)
                if any(
                    normalized == seen
                    or jaccard(seed.instruction_fr, prior.instruction_fr)
                    > DUPLICATE_THRESHOLD
                    for seen, prior in zip(normalized_seen, seeds)
                ):
                    last_reason = "near-duplicate instruction"
                    continue
                verb = leading_verb(seed.instruction_fr)
                recent = verbs_by_topic[topic.name_fr][-window:] if window else []
                if (
                    verb is not None
                    and verb in recent
                    and attempt < max_retries
                ):
                    last_reason = f"directive verb {verb!r} repeated"
                    continue
                accepted = seed
                break
            if accepted is None:
                failures.append((seed_id, last_reason))
                continue
            accept(accepted, topic)
            if checkpoint_path is not None:
                write_jsonl(seeds, checkpoint_path)
    report = StageReport(
        stage="seed",
        requested=plan.total_count,
        produced=len(seeds),
        retries=retries,
        failures=tuple(failures),
        elapsed_seconds=time.monotonic() - started,
    )
    return seeds, report
