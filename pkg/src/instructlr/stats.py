"""Dataset shape statistics and triage outcome tables."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .annotation import MergeResult
from .checker import TriageSummary
from .core import (
    NO_COT,
    CheckedDraft,
    DatasetStats,
    Draft,
    TriageStatus,
    word_count,
)

INSTRUCTION_TYPES = (
    "open_ended",
    "definition",
    "explanation",
    "list_generation",
)

# French surface patterns, checked in priority order.  The classifier is
# plumbing for the stats table, not linguistics: it only needs to be
# total, deterministic, and documented.
_LIST_RE = re.compile(
    r"\bdonn(?:e|ez|er)\b.*?\bexemples?\b"
    r"|\bliste[zr]?\b"
    r"|\bcitez?\b.*?\b(?:\d+|quelques|plusieurs)\b"
)
_DEFINITION_RE = re.compile(
    r"qu'est-ce qu|\bd[ée]finis(?:sez)?\b|\bque signifie\b"
)
_EXPLANATION_RE = re.compile(
    r"\bexpliqu(?:e|ez|er)\b|\bpourquoi\b|\bd[ée]cri(?:s|vez|re)\b.*?\bfonctionnement\b"
)


def classify_instruction_type(instr_fr: str) -> str:
    """Bucket a French instruction into one of four coarse types."""
    text = instr_fr.casefold().replace("’", "'")
    if _LIST_RE.search(text):
        return "list_generation"
    if _DEFINITION_RE.search(text):
        return "definition"
    if _EXPLANATION_RE.search(text):
        return "explanation"
    return "open_ended"


def dataset_stats(drafts: Sequence[Draft]) -> DatasetStats:
    """Length buckets, CoT count and instruction-type counts.

    Instruction buckets are 1-10 / 11-20 / >20 words of ``instr_lrl``;
    response buckets are <50 / 50-100 / >100 words of ``resp_lrl`` (the
    last bucket is over the generation limit, kept visible rather than
    hidden).  Word counts use whitespace splitting throughout.
    """
    instr_buckets = [0, 0, 0]
    resp_buckets = [0, 0, 0]
    cot_count = 0
    type_counts = {name: 0 for name in INSTRUCTION_TYPES}
    for draft in drafts:
        iw = word_count(draft.instr_lrl)
        if iw <= 10:
            instr_buckets[0] += 1
        elif iw <= 20:
            instr_buckets[1] += 1
        else:
            instr_buckets[2] += 1
        rw = word_count(draft.resp_lrl)
        if rw < 50:
            resp_buckets[0] += 1
        elif rw <= 100:
            resp_buckets[1] += 1
        else:
            resp_buckets[2] += 1
        if draft.cot_lrl != NO_COT:
            cot_count += 1
        type_counts[classify_instruction_type(draft.instr_fr)] += 1
    return DatasetStats(
        total=len(drafts),
        instr_1_10=instr_buckets[0],
        instr_11_20=instr_buckets[1],
        instr_over_20=instr_buckets[2],
        resp_under_50=resp_buckets[0],
        resp_50_100=resp_buckets[1],
        resp_over_100=resp_buckets[2],
        cot_count=cot_count,
        type_counts=type_counts,
    )


def percentage(count: int, denominator: int) -> float:
    """Share of ``denominator`` as a percentage, 2 decimals; 0 when empty."""
    if denominator == 0:
        return 0.0
    return round(100.0 * count / denominator, 2)


@dataclass(frozen=True)
class TriageStats:
    """Triage outcome table: status split plus human-validation rollups.

    ``top_categories`` holds (category token, count, % of top-priority)
    rows from merged annotations; ``low_outcomes`` holds
    (outcome, count, % of low-priority) rows where the outcome is
    already_correct / adjusted / unresolved.  Both are empty when no
    merged annotations are supplied.
    """

    summary: TriageSummary
    status_percentages: dict[str, float] = field(default_factory=dict)
    top_categories: tuple[tuple[str, int, float], ...] = ()
    low_outcomes: tuple[tuple[str, int, float], ...] = ()


def triage_stats(
    checked: Sequence[CheckedDraft],
    merged: Mapping[str, MergeResult] | None = None,
) -> TriageStats:
    """Tabulate triage outcomes, enriched by merged annotations if given."""
    summary = TriageSummary.from_statuses(cd.status for cd in checked)

    top_categories: tuple[tuple[str, int, float], ...] = ()
    low_outcomes: tuple[tuple[str, int, float], ...] = ()
    if merged is not None:
        cat_counts: dict[str, int] = {}
        outcome_counts = {"already_correct": 0, "adjusted": 0, "unresolved": 0}
        for cd in checked:
            result = merged.get(cd.draft.id)
            if result is None:
                continue
            if cd.status is TriageStatus.TOP_PRIORITY:
                if result.category_tally:
                    # Plurality category; the tally is pre-sorted.
                    token = result.category_tally[0][0]
                    cat_counts[token] = cat_counts.get(token, 0) + 1
            elif cd.status is TriageStatus.LOW_PRIORITY:
                if result.needs_adjudication:
                    outcome_counts["unresolved"] += 1
                elif result.is_correct:
                    outcome_counts["already_correct"] += 1
                else:
                    outcome_counts["adjusted"] += 1
        top_categories = tuple(
            (token, count, percentage(count, summary.top_priority))
            for token, count in sorted(
                cat_counts.items(), key=lambda kv: (-kv[1], kv[0])
            )
        )
        low_outcomes = tuple(
            (outcome, count, percentage(count, summary.low_priority))
            for outcome, count in outcome_counts.items()
            if count
        )

    return TriageStats(
        summary=summary,
        status_percentages=summary.percentages(),
        top_categories=top_categories,
        low_outcomes=low_outcomes,
    )
