"""Automated quality filter: verdict prompt, parsing and triage.

Each draft field is checked as its own sentence. The verdict decides the
routing: correct drafts pass through, fixable ones get their first
suggested correction applied and a low-priority flag, unfixable ones are
flagged top-priority for human review.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .core import (
    CATEGORY_LABELS,
    NO_COT,
    CheckedDraft,
    CheckerAnalysis,
    CorrectionOption,
    Draft,
    StageReport,
    TriageStatus,
    TRIAGE_SEVERITY,
    Violation,
)
from .gateway import Gateway, GenerationRequest, NonRetriableError
from .grammar import ZarmaLexicon, check, tokenize
from .jsonl import read_jsonl, write_jsonl
from .resources import data_path
from .retrieval import KnowledgeBase, glossary_info

CHECKER_PROMPT_TEMPLATE = (
    "You are a {language} language expert. Analyze this potentially "
    'corrupted {language} sentence: "{sentence}"\n'
    "Rely primarily on your expertise in {language} grammar and meaning.\n"
    "Recognize proper nouns unless contradicted by the glossary.\n"
    "Use the grammar check and glossary below as supplementary aids.\n"
    "\n"
    "INPUT DATA:\n"
    "Grammar check results: {grammar_check}\n"
    "Glossary information: {glossary_info}\n"
    "\n"
    "OUTPUT FORMAT:\n"
    "Provide the analysis in this format:\n"
    "Is the sentence correct? [Yes/No]\n"
    "Reason for Incorrectness (if applicable): [Brief reason]\n"
    "Corrections (if incorrect):\n"
    "Option 1: [Corrected sentence with explanation]\n"
    "Option 2: [Corrected sentence with explanation]\n"
    "Option 3: [Corrected sentence with explanation]"
)

NO_VIOLATIONS = "no rule violations detected"
NO_GLOSSARY_MATCHES = "no glossary matches"

# Fields checked per draft, in decision order. CoT is checked last and only
# when the first two came back clean, so a bad CoT can still demote a draft
# without paying a third model call for drafts already flagged.
FIELD_ORDER = ("instr_lrl", "resp_lrl", "CoT_lrl")
_FIELD_ATTRS = {"instr_lrl": "instr_lrl", "resp_lrl": "resp_lrl", "CoT_lrl": "cot_lrl"}


class CheckerParseError(ValueError):
    """Completion does not contain a usable verdict."""


@dataclass(frozen=True)
class CheckerExemplar:
    """One worked example shown to the checker before the real query."""

    sentence: str
    grammar_check: str
    glossary_info: str
    completion: str


@dataclass(frozen=True)
class TriageSummary:
    accepted: int
    low_priority: int
    top_priority: int

    @property
    def total(self) -> int:
        return self.accepted + self.low_priority + self.top_priority

    def percentages(self) -> dict[str, float]:
        """Share of each status in percent, rounded to 2 decimals."""
        total = self.total
        if total == 0:
            return {"accepted": 0.0, "low_priority": 0.0, "top_priority": 0.0}
        return {
            "accepted": round(self.accepted / total * 100, 2),
            "low_priority": round(self.low_priority / total * 100, 2),
            "top_priority": round(self.top_priority / total * 100, 2),
        }

    @classmethod
    def from_statuses(cls, statuses) -> "TriageSummary":
        counts = {status: 0 for status in TriageStatus}
        for status in statuses:
            counts[status] += 1
        return cls(
            accepted=counts[TriageStatus.ACCEPTED],
            low_priority=counts[TriageStatus.LOW_PRIORITY],
            top_priority=counts[TriageStatus.TOP_PRIORITY],
        )


def render_grammar_check(violations: list[Violation]) -> str:
    """Inline numbered citation list for the prompt's grammar slot."""
    if not violations:
        return NO_VIOLATIONS
    parts = []
    for idx, violation in enumerate(violations, start=1):
        label = CATEGORY_LABELS[violation.category]
        source = (
            f"Rule {violation.rule_id}" if violation.rule_id else "Vocabulary"
        )
        message = re.sub(r"^rule \d+:\s*", "", violation.message)
        parts.append(f"{idx}. {source} ({label}): {message}")
    return "; ".join(parts)


def render_glossary_info(pairs, language_name: str = "Zarma") -> str:
    """Inline token-to-entry listing; only matched tokens are shown."""
    seen: set[str] = set()
    parts = []
    for token, entry in pairs:
        if entry is None:
            continue
        key = token.casefold()
        if key in seen:
            continue
        seen.add(key)
        parts.append(
            f'{token}: French "{entry.term_fr}", '
            f'{language_name} "{entry.term_lrl}"'
        )
    return "; ".join(parts) if parts else NO_GLOSSARY_MATCHES


def render_checker_prompt(
    sentence: str,
    grammar_check: str,
    glossary_info: str,
    language_name: str = "Zarma",
) -> str:
    return CHECKER_PROMPT_TEMPLATE.format(
        language=language_name,
        sentence=sentence,
        grammar_check=grammar_check,
        glossary_info=glossary_info,
    )


def render_exemplar_block(
    exemplars: list[CheckerExemplar], n_shot: int
) -> str:
    """System preamble with up to n_shot worked examples; may be empty."""
    chosen = list(exemplars)[: max(n_shot, 0)]
    if not chosen:
        return ""
    blocks = ["Worked examples of the expected analysis format follow."]
    for idx, ex in enumerate(chosen, start=1):
        blocks.append(
            f"EXAMPLE {idx}\n"
            f'Sentence: "{ex.sentence}"\n'
            f"Grammar check results: {ex.grammar_check}\n"
            f"Glossary information: {ex.glossary_info}\n"
            f"Analysis:\n{ex.completion}"
        )
    return "\n\n".join(blocks)


def load_exemplars(
    path: str | Path | None = None, lang: str = "dje"
) -> list[CheckerExemplar]:
    if path is None:
        path = data_path("exemplars", f"{lang}.json")
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    exemplars = []
    for entry in raw["exemplars"]:
        exemplars.append(
            CheckerExemplar(
                sentence=str(entry["sentence"]),
                grammar_check=str(entry["grammar_check"]),
                glossary_info=str(entry["glossary_info"]),
                completion=str(entry["completion"]),
            )
        )
    return exemplars


# The lookahead rejects the format-block placeholder "[Yes/No]" so an echoed
# template never reads as a verdict.
_VERDICT_RE = re.compile(
    r"is the sentence correct\?\s*\W*(yes|no)\b(?!\s*/)", re.IGNORECASE
)
_REASON_RE = re.compile(
    r"^\s*reason(?:\s+for\s+incorrectness)?(?:\s*\(if applicable\))?"
    r"\s*:\s*(.+?)\s*$",
    re.IGNORECASE | re.MULTILINE,
)
_OPTION_RE = re.compile(
    r"^\s*option\s*([123])\s*:\s*(.+?)\s*$", re.IGNORECASE | re.MULTILINE
)
_PLACEHOLDER_RE = re.compile(r"^\[.*\]$")


def _split_option(value: str) -> CorrectionOption:
    value = value.strip()
    explanation = ""
    if value.endswith(")") and " (" in value:
        cut = value.index(" (")
        explanation = value[cut + 2: -1].strip()
        value = value[:cut].rstrip()
    if len(value) >= 2 and value.startswith('"') and value.endswith('"'):
        value = value[1:-1]
    return CorrectionOption(text=value, explanation=explanation)


def parse_checker_output(completion: str) -> CheckerAnalysis:
    """Structured verdict from a checker completion.

    A No verdict with no parseable options is a valid analysis (that is the
    top-priority path); a missing verdict line or a No without any reason
    line is a parse error.
    """
    verdict = _VERDICT_RE.search(completion)
    if verdict is None:
        raise CheckerParseError("missing the Yes/No verdict line")
    is_correct = verdict.group(1).lower() == "yes"
    if is_correct:
        return CheckerAnalysis(is_correct=True)

    reason = None
    for match in _REASON_RE.finditer(completion):
        candidate = match.group(1).strip()
        if candidate and not _PLACEHOLDER_RE.match(candidate):
            reason = candidate
            break
    if reason is None:
        raise CheckerParseError("incorrect verdict without a reason line")

    by_number: dict[int, CorrectionOption] = {}
    for match in _OPTION_RE.finditer(completion):
        number = int(match.group(1))
        value = match.group(2).strip()
        if not value or _PLACEHOLDER_RE.match(value):
            continue
        if number not in by_number:
            by_number[number] = _split_option(value)
    options = tuple(by_number[n] for n in sorted(by_number))
    return CheckerAnalysis(is_correct=False, reason=reason, options=options)


def field_status(analysis: CheckerAnalysis) -> TriageStatus:
    """Total mapping (is_correct, option count) -> status."""
    if analysis.is_correct:
        return TriageStatus.ACCEPTED
    if analysis.options:
        return TriageStatus.LOW_PRIORITY
    return TriageStatus.TOP_PRIORITY


def triage(
    draft: Draft, analyses: Mapping[str, CheckerAnalysis]
) -> CheckedDraft:
    """Aggregate per-field verdicts into one routing decision.

    The draft status is the worst field status; the deciding field is the
    first one (in FIELD_ORDER) reaching it, and for low-priority drafts its
    Option 1 text becomes the applied correction.
    """
    if not analyses:
        raise ValueError("triage needs at least one field analysis")
    unknown = set(analyses) - set(FIELD_ORDER)
    if unknown:
        raise ValueError(f"unknown checked fields: {sorted(unknown)}")

    statuses = {f: field_status(analyses[f]) for f in FIELD_ORDER if f in analyses}
    worst = max(TRIAGE_SEVERITY[s] for s in statuses.values())
    deciding = next(
        f for f in FIELD_ORDER
        if f in statuses and TRIAGE_SEVERITY[statuses[f]] == worst
    )
    status = statuses[deciding]
    applied = None
    corrected_field = None
    if status is TriageStatus.LOW_PRIORITY:
        applied = analyses[deciding].options[0].text
        corrected_field = deciding
    return CheckedDraft(
        draft=draft,
        status=status,
        analysis=analyses[deciding],
        applied_correction=applied,
        corrected_field=corrected_field,
    )


class _FieldCheckFailed(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def analyze_sentence(
    text: str,
    kb: KnowledgeBase,
    lexicon: ZarmaLexicon,
    gateway: Gateway,
    system: str = "",
    language_name: str = "Zarma",
    tag: str = "check",
    max_retries: int = 3,
) -> tuple[CheckerAnalysis, int]:
    """Full check of one sentence: aids, prompt, call, parse.

    Returns the analysis and how many retries it took; raises
    CheckerParseError once the retry budget is spent.
    """
    violations = check(text, lexicon, kb.glossary)
    grammar_rendered = render_grammar_check(violations)
    tokens = [tok.text for tok in tokenize(text)]
    glossary_rendered = render_glossary_info(
        glossary_info(kb, tokens), language_name
    )
    prompt = render_checker_prompt(
        text, grammar_rendered, glossary_rendered, language_name
    )
    retries = 0
    last_reason = "retry budget exhausted"
    for attempt in range(max_retries + 1):
        attempt_tag = tag if not attempt else f"{tag}:retry{attempt}"
        if attempt:
            retries += 1
        request = GenerationRequest(
            system_preamble=system, user_content=prompt, request_tag=attempt_tag
        )
        try:
            completion = gateway.generate(request).text
        except NonRetriableError as exc:
            last_reason = str(exc)
            continue
        try:
            return parse_checker_output(completion), retries
        except CheckerParseError as exc:
            last_reason = str(exc)
            continue
    raise CheckerParseError(last_reason)


def _check_field(
    draft: Draft,
    field: str,
    kb: KnowledgeBase,
    lexicon: ZarmaLexicon,
    gateway: Gateway,
    system: str,
    language_name: str,
    max_retries: int,
) -> tuple[CheckerAnalysis, int]:
    text = getattr(draft, _FIELD_ATTRS[field])
    try:
        return analyze_sentence(
            text, kb, lexicon, gateway,
            system=system,
            language_name=language_name,
            tag=f"check:{draft.id}:{field}",
            max_retries=max_retries,
        )
    except CheckerParseError as exc:
        raise _FieldCheckFailed(f"{field}: {exc}") from None


def run_batch(
    drafts: list[Draft],
    kb: KnowledgeBase,
    lexicon: ZarmaLexicon,
    gateway: Gateway,
    exemplars: list[CheckerExemplar] | None = None,
    n_shot: int = 3,
    language_name: str = "Zarma",
    max_retries: int = 3,
    checkpoint_path: Path | None = None,
) -> tuple[list[CheckedDraft], TriageSummary, StageReport]:
    """Check and triage a batch; resumable through the checkpoint file.

    instr_lrl and resp_lrl are always checked; the chain-of-thought only
    when both came back clean. Drafts whose checker calls exhaust the retry
    budget are reported as failures and excluded from the output.
    """
    started = time.monotonic()
    system = render_exemplar_block(exemplars or [], n_shot)

    done: dict[str, CheckedDraft] = {}
    if checkpoint_path is not None and checkpoint_path.exists():
        for prior in read_jsonl(checkpoint_path, CheckedDraft):
            done[prior.draft.id] = prior

    checked: list[CheckedDraft] = []
    retries = 0
    failures: list[tuple[str, str]] = []
    for draft in drafts:
        prior = done.get(draft.id)
        if prior is not None and prior.draft == draft:
            checked.append(prior)
            continue
        analyses: dict[str, CheckerAnalysis] = {}
        try:
            for field in ("instr_lrl", "resp_lrl"):
                analyses[field], extra = _check_field(
                    draft, field, kb, lexicon, gateway, system,
                    language_name, max_retries,
                )
                retries += extra
            if (
                draft.cot_lrl != NO_COT
                and triage(draft, analyses).status is TriageStatus.ACCEPTED
            ):
                analyses["CoT_lrl"], extra = _check_field(
                    draft, "CoT_lrl", kb, lexicon, gateway, system,
                    language_name, max_retries,
                )
                retries += extra
        except _FieldCheckFailed as exc:
            failures.append((draft.id, exc.reason))
            continue
        checked.append(triage(draft, analyses))
        if checkpoint_path is not None:
            write_jsonl(checked, checkpoint_path)

    summary = TriageSummary.from_statuses(c.status for c in checked)
    report = StageReport(
        stage="check",
        requested=len(drafts),
        produced=len(checked),
        retries=retries,
        failures=tuple(failures),
        elapsed_seconds=time.monotonic() - started,
    )
    return checked, summary, report
