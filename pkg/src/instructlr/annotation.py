"""Human validation layer: review sheets, imports, and majority merging.

Flagged drafts go out to annotators as CSV batches, come back as filled
sheets, and are merged into one final decision per draft.  Anything the
annotators cannot settle by strict majority is flagged for adjudication
rather than resolved silently.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .core import (
    CATEGORY_LABELS,
    LABEL_TO_CATEGORY,
    AnnotationRecord,
    CheckedDraft,
    ErrorCategory,
    TRIAGE_SEVERITY,
    TriageStatus,
)

# Review-sheet schema.  Order matters: importers key on it and annotators
# see it verbatim in their spreadsheet software.
REVIEW_COLUMNS = (
    "draft_id",
    "instruction_lrl",
    "response_lrl",
    "rag_status",
    "is_correct",
    "corrected_instruction",
    "corrected_response",
    "error_category",
    "comments",
)

DEFAULT_BATCH_SIZE = 200

# Reserved reviewer identity whose verdicts override the majority vote.
ADJUDICATOR_ID = "adjudicator"

# Statuses routed to human review when no explicit filter is given.
_FLAGGED = (TriageStatus.TOP_PRIORITY, TriageStatus.LOW_PRIORITY)

_CSV_KWARGS = {"lineterminator": "\r\n"}


def normalize_correction(text: str) -> str:
    """Collapse runs of whitespace and trim; case is preserved."""
    return " ".join(text.split())


def latest_per_annotator(
    records: Sequence[AnnotationRecord],
) -> list[AnnotationRecord]:
    """One record per (draft, annotator): the last submission wins.

    Journals are append-only, so a resubmission shows up as a later
    record; consumers call this before merging or computing agreement.
    """
    latest: dict[tuple[str, str], AnnotationRecord] = {}
    for rec in records:
        latest[(rec.draft_id, rec.annotator_id)] = rec
    return list(latest.values())


def export_review_sheet(
    checked: Sequence[CheckedDraft],
    out_dir: str | Path,
    statuses: Iterable[TriageStatus] | None = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
    prefix: str = "review",
) -> list[Path]:
    """Write review CSV batches and return the paths in batch order.

    Rows carry the original draft text (a low-priority RAG correction is
    never substituted into ``response_lrl``) and blank annotation columns.
    Top-priority rows come first, then low-priority; within a status the
    input order is kept.  Drafts outside ``statuses`` (default: the two
    flagged statuses) are skipped.  No rows means no files.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    wanted = tuple(statuses) if statuses is not None else _FLAGGED
    rows = [cd for cd in checked if cd.status in wanted]
    # Severity sort is stable, so input order survives within a status.
    rows.sort(key=lambda cd: -TRIAGE_SEVERITY[cd.status])

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    for batch_no, start in enumerate(range(0, len(rows), batch_size), 1):
        path = out_dir / f"{prefix}_{batch_no:03d}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, **_CSV_KWARGS)
            writer.writerow(REVIEW_COLUMNS)
            for cd in rows[start : start + batch_size]:
                writer.writerow(
                    [
                        cd.draft.id,
                        cd.draft.instr_lrl,
                        cd.draft.resp_lrl,
                        cd.status.value,
                        "",
                        "",
                        "",
                        "",
                        "",
                    ]
                )
        paths.append(path)
    return paths


def write_annotation_sheet(
    records: Sequence[AnnotationRecord],
    checked_by_id: Mapping[str, CheckedDraft],
    path: str | Path,
) -> None:
    """Write filled records back out in the review-sheet schema.

    The inverse of :func:`import_annotations` for valid records; draft
    context columns are looked up in ``checked_by_id``.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, **_CSV_KWARGS)
        writer.writerow(REVIEW_COLUMNS)
        for rec in records:
            cd = checked_by_id[rec.draft_id]
            label = (
                CATEGORY_LABELS[rec.error_category]
                if rec.error_category is not None
                else ""
            )
            writer.writerow(
                [
                    rec.draft_id,
                    cd.draft.instr_lrl,
                    cd.draft.resp_lrl,
                    cd.status.value,
                    "Yes" if rec.is_correct else "No",
                    rec.corrected_instruction or "",
                    rec.corrected_response or "",
                    label,
                    rec.comments or "",
                ]
            )


def import_annotations(
    path: str | Path,
    annotator_id: str,
    known_draft_ids: Iterable[str] | None = None,
) -> tuple[list[AnnotationRecord], list[tuple[int, str]]]:
    """Read one filled review sheet into records plus per-row errors.

    Row numbers in the error list match what a spreadsheet shows: the
    header is row 1, data starts at row 2.  A malformed header aborts with
    ``ValueError`` since no row can be trusted after that.  When
    ``known_draft_ids`` is given, rows referencing other drafts are
    rejected.
    """
    if not annotator_id:
        raise ValueError("annotator_id must be non-empty")
    known = set(known_draft_ids) if known_draft_ids is not None else None

    records: list[AnnotationRecord] = []
    errors: list[tuple[int, str]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty file: missing header row") from None
        if tuple(header) != REVIEW_COLUMNS:
            raise ValueError(
                f"header mismatch: expected {list(REVIEW_COLUMNS)}, got {header}"
            )
        for row_no, row in enumerate(reader, 2):
            if len(row) != len(REVIEW_COLUMNS):
                errors.append(
                    (row_no, f"expected {len(REVIEW_COLUMNS)} fields, got {len(row)}")
                )
                continue
            cells = dict(zip(REVIEW_COLUMNS, row))
            problem = _row_problem(cells, known)
            if problem is not None:
                errors.append((row_no, problem))
                continue
            category = (
                LABEL_TO_CATEGORY[cells["error_category"].strip()]
                if cells["error_category"].strip()
                else None
            )
            try:
                records.append(
                    AnnotationRecord(
                        draft_id=cells["draft_id"].strip(),
                        annotator_id=annotator_id,
                        is_correct=cells["is_correct"].strip().casefold() == "yes",
                        corrected_instruction=cells["corrected_instruction"] or None,
                        corrected_response=cells["corrected_response"] or None,
                        error_category=category,
                        comments=cells["comments"] or None,
                    )
                )
            except ValueError as exc:
                errors.append((row_no, str(exc)))
    return records, errors


def _row_problem(cells: dict[str, str], known: set[str] | None) -> str | None:
    """Return a message for the first defect in a parsed row, else None."""
    draft_id = cells["draft_id"].strip()
    if not draft_id:
        return "draft_id is empty"
    if known is not None and draft_id not in known:
        return f"unknown draft_id: {draft_id!r}"
    verdict = cells["is_correct"].strip().casefold()
    if verdict not in ("yes", "no"):
        if not verdict:
            return "is_correct is empty (expected Yes or No)"
        return f"is_correct must be Yes or No, got {cells['is_correct']!r}"
    label = cells["error_category"].strip()
    if label and label not in LABEL_TO_CATEGORY:
        return f"unknown error_category: {label!r}"
    return None


@dataclass(frozen=True)
class MergeResult:
    """Outcome of merging all annotations for one draft.

    When ``needs_adjudication`` is set no final verdict exists and the
    text fields are None.  ``final_response``/``final_instruction`` are
    normalized corrections, present only for a final No.  The category
    tally counts every No vote regardless of outcome.
    """

    draft_id: str
    needs_adjudication: bool
    is_correct: bool | None
    final_instruction: str | None
    final_response: str | None
    category_tally: tuple[tuple[str, int], ...]
    annotators: int


def merge_annotations(
    records: Sequence[AnnotationRecord],
) -> dict[str, MergeResult]:
    """Merge annotations per draft by strict majority vote.

    A verdict is final when >1/2 of annotators agree on is_correct and,
    for a No, on an identical normalized corrected_response.  Records
    from :data:`ADJUDICATOR_ID` bypass the vote entirely.  Conflicting
    records from one annotator for one draft are a caller bug and raise.
    The result is invariant under record order.
    """
    by_draft: dict[str, list[AnnotationRecord]] = {}
    for rec in records:
        by_draft.setdefault(rec.draft_id, []).append(rec)

    results: dict[str, MergeResult] = {}
    for draft_id, group in by_draft.items():
        results[draft_id] = _merge_one(draft_id, group)
    return results


def _vote_key(rec: AnnotationRecord) -> tuple:
    """What a record is voting for, whitespace noise removed."""
    if rec.is_correct:
        return (True, None, None)
    instr = (
        normalize_correction(rec.corrected_instruction)
        if rec.corrected_instruction
        else None
    )
    return (False, instr, normalize_correction(rec.corrected_response))


def _merge_one(draft_id: str, group: list[AnnotationRecord]) -> MergeResult:
    # One vote per annotator; identical duplicates collapse, conflicting
    # ones mean the caller merged two different review rounds by mistake.
    votes: dict[str, AnnotationRecord] = {}
    for rec in group:
        prior = votes.get(rec.annotator_id)
        if prior is not None and _vote_key(prior) != _vote_key(rec):
            raise ValueError(
                f"conflicting records from annotator {rec.annotator_id!r} "
                f"for draft {draft_id!r}"
            )
        votes[rec.annotator_id] = rec

    tally = Counter(
        rec.error_category.value
        for rec in votes.values()
        if not rec.is_correct and rec.error_category is not None
    )
    tally_items = tuple(sorted(tally.items(), key=lambda kv: (-kv[1], kv[0])))

    adjudications = [r for a, r in votes.items() if a == ADJUDICATOR_ID]
    if adjudications:
        return _final(draft_id, adjudications[0], tally_items, len(votes))

    n = len(votes)
    yes_votes = [r for r in votes.values() if r.is_correct]
    no_votes = [r for r in votes.values() if not r.is_correct]

    if len(yes_votes) * 2 > n:
        return MergeResult(
            draft_id=draft_id,
            needs_adjudication=False,
            is_correct=True,
            final_instruction=None,
            final_response=None,
            category_tally=tally_items,
            annotators=n,
        )

    if len(no_votes) * 2 > n:
        groups: dict[str, list[AnnotationRecord]] = {}
        for rec in no_votes:
            groups.setdefault(
                normalize_correction(rec.corrected_response), []
            ).append(rec)
        for response, members in groups.items():
            if len(members) * 2 > n:
                return _final_no(draft_id, response, members, tally_items, n)

    return MergeResult(
        draft_id=draft_id,
        needs_adjudication=True,
        is_correct=None,
        final_instruction=None,
        final_response=None,
        category_tally=tally_items,
        annotators=n,
    )


def _final(
    draft_id: str,
    rec: AnnotationRecord,
    tally: tuple[tuple[str, int], ...],
    n: int,
) -> MergeResult:
    """Verdict dictated by a single record (the adjudicator path)."""
    if rec.is_correct:
        return MergeResult(draft_id, False, True, None, None, tally, n)
    instr = (
        normalize_correction(rec.corrected_instruction)
        if rec.corrected_instruction
        else None
    )
    return MergeResult(
        draft_id,
        False,
        False,
        instr,
        normalize_correction(rec.corrected_response),
        tally,
        n,
    )


def _final_no(
    draft_id: str,
    response: str,
    members: list[AnnotationRecord],
    tally: tuple[tuple[str, int], ...],
    n: int,
) -> MergeResult:
    # The response majority fixes the text; the instruction (optional in
    # each record) is settled by plurality within that majority, ties
    # broken toward a present value, then lexicographically.
    instr_counts = Counter(
        normalize_correction(rec.corrected_instruction)
        if rec.corrected_instruction
        else None
        for rec in members
    )
    winner = min(
        instr_counts.items(),
        key=lambda kv: (-kv[1], kv[0] is None, kv[0] or ""),
    )[0]
    return MergeResult(
        draft_id=draft_id,
        needs_adjudication=False,
        is_correct=False,
        final_instruction=winner,
        final_response=response,
        category_tally=tally,
        annotators=n,
    )
