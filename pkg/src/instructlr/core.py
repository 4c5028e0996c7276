"""Domain types shared by every pipeline stage, plus draft validation.

All types are immutable dataclasses: instances can be shared freely across
worker threads. File I/O for these types lives in :mod:`instructlr.jsonl`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

# Sentinel marking "no chain-of-thought" on non-reasoning topics.
# Exact and case-sensitive everywhere (files, prompts, validation).
NO_COT = "N/A"

RESPONSE_WORD_LIMIT = 100
COT_WORD_LIMIT = 200


def word_count(text: str) -> int:
    """Number of whitespace-separated tokens after trimming.

    This is the single word-counting rule used for draft limits, token
    estimates and dataset statistics. Punctuation attached to a word counts
    with the word.
    """
    return len(text.split())


class ErrorCategory(enum.Enum):
    """Closed set of error categories used by the checker and annotators."""

    FLUENCY = "fluency"
    SUFFIX_MISUSE = "suffix_misuse"
    TENSE_INCONSISTENCY = "tense_inconsistency"
    ORTHOGRAPHY = "orthography"

    @classmethod
    def from_token(cls, token: str) -> "ErrorCategory":
        for member in cls:
            if member.value == token:
                return member
        raise ValueError(f"unknown error category token: {token!r}")


# Human-readable labels used in review sheets; 1:1 with the wire tokens.
CATEGORY_LABELS = {
    ErrorCategory.FLUENCY: "Fluency",
    ErrorCategory.SUFFIX_MISUSE: "Suffix Misuse",
    ErrorCategory.TENSE_INCONSISTENCY: "Tense Inconsistency",
    ErrorCategory.ORTHOGRAPHY: "Orthography",
}
LABEL_TO_CATEGORY = {label: cat for cat, label in CATEGORY_LABELS.items()}


class TriageStatus(enum.Enum):
    """Three-way routing decision for a checked draft."""

    ACCEPTED = "accepted"
    LOW_PRIORITY = "low_priority"
    TOP_PRIORITY = "top_priority"

    @classmethod
    def from_token(cls, token: str) -> "TriageStatus":
        for member in cls:
            if member.value == token:
                return member
        raise ValueError(f"unknown triage status token: {token!r}")


# Ordering used when aggregating per-field verdicts into a draft status.
TRIAGE_SEVERITY = {
    TriageStatus.ACCEPTED: 0,
    TriageStatus.LOW_PRIORITY: 1,
    TriageStatus.TOP_PRIORITY: 2,
}


@dataclass(frozen=True)
class Topic:
    """One entry of the topic catalog driving seed generation."""

    id: int
    name_fr: str
    description_fr: str
    requires_cot: bool


@dataclass(frozen=True)
class SeedInstruction:
    """A French task instruction anchored to one catalog topic."""

    id: str
    instruction_fr: str
    context_fr: str


@dataclass(frozen=True)
class Draft:
    """One generated instruction-response pair in the target language."""

    id: str
    instr_fr: str
    instr_lrl: str
    resp_lrl: str
    cot_lrl: str
    topic_fr: str
    lang: str


@dataclass(frozen=True)
class Violation:
    """One rule or vocabulary finding on a checked sentence.

    ``rule_id`` is a grammar-rule number (1..20) or 0 for findings that come
    from the lexicon/glossary rather than a numbered rule. ``span`` is a
    half-open token index range into the tokenized sentence.
    """

    rule_id: int
    category: ErrorCategory
    span: tuple[int, int]
    message: str


@dataclass(frozen=True)
class CorrectionOption:
    """A candidate corrected sentence with a short explanation."""

    text: str
    explanation: str = ""


@dataclass(frozen=True)
class CheckerAnalysis:
    """Structured verdict parsed from the automated checker."""

    is_correct: bool
    reason: str | None = None
    options: tuple[CorrectionOption, ...] = ()

    def __post_init__(self) -> None:
        if self.is_correct and self.options:
            raise ValueError("a correct verdict carries no correction options")
        if not self.is_correct and not self.reason:
            raise ValueError("an incorrect verdict requires a reason")
        if len(self.options) > 3:
            raise ValueError("at most 3 correction options")


@dataclass(frozen=True)
class CheckedDraft:
    """A draft together with its triage outcome.

    ``analysis`` is the verdict of the field that decided the status (absent
    only when the checker was bypassed); ``corrected_field`` names that field
    so a low-priority correction can be applied unambiguously.
    """

    draft: Draft
    status: TriageStatus
    analysis: CheckerAnalysis | None = None
    applied_correction: str | None = None
    corrected_field: str | None = None

    def __post_init__(self) -> None:
        if (self.status is TriageStatus.LOW_PRIORITY) != (
            self.applied_correction is not None
        ):
            raise ValueError(
                "applied_correction present iff status is low_priority"
            )


@dataclass(frozen=True)
class AnnotationRecord:
    """One annotator's verdict on one draft."""

    draft_id: str
    annotator_id: str
    is_correct: bool
    corrected_instruction: str | None = None
    corrected_response: str | None = None
    error_category: ErrorCategory | None = None
    comments: str | None = None

    def __post_init__(self) -> None:
        if not self.is_correct:
            if not self.corrected_response:
                raise ValueError(
                    "is_correct=No requires corrected_response"
                )
            if self.error_category is None:
                raise ValueError("is_correct=No requires error_category")


@dataclass(frozen=True)
class GrammarRule:
    """Machine-readable form of one numbered grammar rule."""

    id: int
    title: str
    kind: str  # lexicon | morphology | syntax | negation
    patterns: tuple[str, ...]
    examples: tuple[tuple[str | None, str], ...]  # (wrong or None, right)


@dataclass(frozen=True)
class GlossaryEntry:
    """A bilingual vocabulary pair (French term, target-language term)."""

    term_fr: str
    term_lrl: str

    def __post_init__(self) -> None:
        if not self.term_fr or not self.term_lrl:
            raise ValueError("glossary terms must be non-empty")


QC_MODES = ("none", "full_human", "instructlr")


@dataclass(frozen=True)
class CostScenario:
    """Inputs of one production-cost scenario."""

    model_name: str
    price_per_million_tokens: float
    tokens_per_pair: float
    total_pairs: int
    error_rate: float
    qc_mode: str
    human_rate_per_pair: float
    reviewed_pairs: int

    def __post_init__(self) -> None:
        if self.qc_mode not in QC_MODES:
            raise ValueError(f"unknown qc_mode: {self.qc_mode!r}")
        for name in (
            "price_per_million_tokens",
            "tokens_per_pair",
            "total_pairs",
            "error_rate",
            "human_rate_per_pair",
            "reviewed_pairs",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.reviewed_pairs > self.total_pairs:
            raise ValueError("reviewed_pairs cannot exceed total_pairs")
        if self.qc_mode == "full_human" and self.reviewed_pairs != self.total_pairs:
            raise ValueError("full_human reviews every pair")
        if self.qc_mode == "none" and self.reviewed_pairs != 0:
            raise ValueError("qc_mode=none reviews nothing")


@dataclass(frozen=True)
class CostBreakdown:
    """Computed costs for one scenario."""

    llm_cost: float
    human_cost: float
    total_cost: float
    saving_vs_full_human: float


@dataclass(frozen=True)
class DatasetStats:
    """Length buckets, CoT count and instruction-type counts of a dataset."""

    total: int
    instr_1_10: int
    instr_11_20: int
    instr_over_20: int
    resp_under_50: int
    resp_50_100: int
    resp_over_100: int  # over-limit drafts, flagged rather than bucketed away
    cot_count: int
    type_counts: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class StageReport:
    """Run accounting for one pipeline stage.

    produced + len(failures) == requested when the stage ran to completion;
    failures carry (item id, reason) pairs so partial batches stay auditable.
    """

    stage: str
    requested: int
    produced: int
    retries: int = 0
    failures: tuple[tuple[str, str], ...] = ()
    elapsed_seconds: float = 0.0

    def __post_init__(self) -> None:
        if self.requested < 0 or self.produced < 0 or self.retries < 0:
            raise ValueError("counts must be non-negative")
        if self.produced > self.requested:
            raise ValueError("produced cannot exceed requested")


def topics_by_name(topics: list[Topic]) -> dict[str, Topic]:
    """Index a catalog by French topic name; duplicate names are an error."""
    index: dict[str, Topic] = {}
    for topic in topics:
        if topic.name_fr in index:
            raise ValueError(f"duplicate topic name: {topic.name_fr!r}")
        index[topic.name_fr] = topic
    return index


def validate_draft(draft: Draft, topics: list[Topic]) -> list[str]:
    """Check all draft invariants; returns a report, one entry per breach.

    An empty report means the draft is valid. Violations are report entries,
    never exceptions.
    """
    report: list[str] = []
    if not draft.id:
        report.append("id is empty")
    if not draft.instr_lrl.strip():
        report.append("instr_lrl is empty")
    if not draft.resp_lrl.strip():
        report.append("resp_lrl is empty")
    if not draft.lang.strip() or draft.lang != draft.lang.lower():
        report.append(f"lang must be a lowercase language code, got {draft.lang!r}")

    resp_words = word_count(draft.resp_lrl)
    if resp_words > RESPONSE_WORD_LIMIT:
        report.append(
            f"response exceeds {RESPONSE_WORD_LIMIT} words ({resp_words})"
        )
    if draft.cot_lrl != NO_COT:
        cot_words = word_count(draft.cot_lrl)
        if cot_words > COT_WORD_LIMIT:
            report.append(
                f"chain-of-thought exceeds {COT_WORD_LIMIT} words ({cot_words})"
            )

    catalog = topics_by_name(topics)
    topic = catalog.get(draft.topic_fr)
    if topic is None:
        report.append(f"unknown topic: {draft.topic_fr!r}")
    else:
        has_cot = draft.cot_lrl != NO_COT
        if topic.requires_cot and not has_cot:
            report.append(
                f"missing chain-of-thought for reasoning topic {topic.name_fr!r}"
            )
        if not topic.requires_cot and has_cot:
            report.append(
                f"chain-of-thought present but topic {topic.name_fr!r} "
                f"is not a reasoning topic (expected {NO_COT!r})"
            )
    return report
