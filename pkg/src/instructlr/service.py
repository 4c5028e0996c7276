"""REST service backing the human review queue.

Serves the flagged drafts from a completed check stage, hands out short
claim leases so two annotators do not review the same draft at once, and
appends submitted verdicts to an annotations journal. The journal is
append-only; a resubmission by the same annotator supersedes the earlier
record at read time, so merge and agreement always see one verdict per
(draft, annotator) pair.

Auth is a single shared bearer token plus an X-Annotator-Id header:
fine for a trusted annotation team, not for the open internet.
"""

from __future__ import annotations

import csv
import io
import threading
import time
from typing import Callable

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response

from .agreement import krippendorff_alpha, reliability_matrix
from .annotation import (
    REVIEW_COLUMNS,
    latest_per_annotator,
    normalize_correction,
)
from .config import Config, ConfigError
from .core import (
    CATEGORY_LABELS,
    TRIAGE_SEVERITY,
    AnnotationRecord,
    CheckedDraft,
    ErrorCategory,
    TriageStatus,
)
from .jsonl import append_jsonl, read_jsonl

ANNOTATOR_HEADER = "X-Annotator-Id"

_PAYLOAD_FIELDS = (
    "is_correct",
    "corrected_instruction",
    "corrected_response",
    "error_category",
    "comments",
)


def validate_annotation_payload(
    payload: object, draft_id: str, annotator_id: str
) -> AnnotationRecord:
    """Build an AnnotationRecord from a JSON body; ValueError on any problem.

    The error messages are part of the wire contract: the review UI
    replicates this validation client-side against shared test vectors.
    """
    if not isinstance(payload, dict):
        raise ValueError("annotation payload must be a JSON object")
    for key in payload:
        if key not in _PAYLOAD_FIELDS:
            raise ValueError(f"unknown field {key!r}")
    is_correct = payload.get("is_correct")
    if not isinstance(is_correct, bool):
        raise ValueError("is_correct must be a boolean")
    for key in ("corrected_instruction", "corrected_response", "comments"):
        value = payload.get(key)
        if value is not None and not isinstance(value, str):
            raise ValueError(f"{key} must be a string or null")
    category = None
    raw_category = payload.get("error_category")
    if raw_category is not None:
        if not isinstance(raw_category, str):
            raise ValueError("error_category must be a string or null")
        category = ErrorCategory.from_token(raw_category)
    return AnnotationRecord(
        draft_id=draft_id,
        annotator_id=annotator_id,
        is_correct=is_correct,
        corrected_instruction=payload.get("corrected_instruction") or None,
        corrected_response=payload.get("corrected_response") or None,
        error_category=category,
        comments=payload.get("comments") or None,
    )


class ReviewService:
    """Queue, leases and journal for one checked dataset."""

    def __init__(
        self,
        config: Config,
        clock: Callable[[], float] = time.monotonic,
    ):
        checked = read_jsonl(config.paths.checked, CheckedDraft)
        flagged = [
            cd for cd in checked if cd.status is not TriageStatus.ACCEPTED
        ]
        flagged.sort(key=lambda cd: (-TRIAGE_SEVERITY[cd.status], cd.draft.id))
        self.queue = flagged
        self.by_id = {cd.draft.id: cd for cd in flagged}
        self.journal_path = config.paths.annotations
        self.journal_path.parent.mkdir(parents=True, exist_ok=True)
        self.lease_seconds = config.service.lease_seconds
        self.token = config.service.token
        self.clock = clock
        self._lock = threading.Lock()
        self._leases: dict[str, tuple[str, float]] = {}

    # -- journal ------------------------------------------------------------

    def read_journal(self) -> list[AnnotationRecord]:
        if not self.journal_path.exists():
            return []
        return read_jsonl(self.journal_path, AnnotationRecord)

    def effective_records(self) -> list[AnnotationRecord]:
        return latest_per_annotator(self.read_journal())

    def annotated_by(self) -> dict[str, list[str]]:
        seen: dict[str, list[str]] = {}
        for rec in self.read_journal():
            ids = seen.setdefault(rec.draft_id, [])
            if rec.annotator_id not in ids:
                ids.append(rec.annotator_id)
        return seen

    # -- leases -------------------------------------------------------------

    def lease_holder(self, draft_id: str) -> tuple[str, float] | None:
        """(annotator, seconds left) for an unexpired lease, else None."""
        lease = self._leases.get(draft_id)
        if lease is None:
            return None
        annotator, expires = lease
        remaining = expires - self.clock()
        if remaining <= 0:
            del self._leases[draft_id]
            return None
        return annotator, remaining

    def claim(self, draft_id: str, annotator_id: str) -> float:
        """Take or extend a lease; ValueError when someone else holds it."""
        with self._lock:
            holder = self.lease_holder(draft_id)
            if holder is not None and holder[0] != annotator_id:
                raise ValueError(
                    f"draft {draft_id} is claimed by {holder[0]}"
                )
            self._leases[draft_id] = (
                annotator_id,
                self.clock() + self.lease_seconds,
            )
            return self.lease_seconds

    def submit(self, record: AnnotationRecord) -> None:
        with self._lock:
            holder = self.lease_holder(record.draft_id)
            if holder is not None and holder[0] != record.annotator_id:
                raise ValueError(
                    f"draft {record.draft_id} is claimed by {holder[0]}"
                )
            append_jsonl([record], self.journal_path)
            self._leases.pop(record.draft_id, None)

    # -- views --------------------------------------------------------------

    def draft_view(
        self, cd: CheckedDraft, annotated_map: dict[str, list[str]] | None = None
    ) -> dict:
        analysis = cd.analysis
        if annotated_map is None:
            annotated_map = self.annotated_by()
        annotated = annotated_map.get(cd.draft.id, [])
        holder = self.lease_holder(cd.draft.id)
        return {
            "id": cd.draft.id,
            "status": cd.status.value,
            "instruction_fr": cd.draft.instr_fr,
            "instruction_lrl": cd.draft.instr_lrl,
            "response_lrl": cd.draft.resp_lrl,
            "chain_of_thought": cd.draft.cot_lrl,
            "reason": analysis.reason if analysis else None,
            "options": [
                {"text": opt.text, "explanation": opt.explanation}
                for opt in (analysis.options if analysis else ())
            ],
            "applied_correction": cd.applied_correction,
            "corrected_field": cd.corrected_field,
            "annotated_by": annotated,
            "claimed_by": holder[0] if holder else None,
            "lease_expires_in": round(holder[1], 3) if holder else None,
        }

    def progress(self) -> dict:
        reviewed_ids = set(self.annotated_by())
        out: dict = {"by_status": {}}
        total = reviewed = 0
        for status in (TriageStatus.TOP_PRIORITY, TriageStatus.LOW_PRIORITY):
            ids = [
                cd.draft.id for cd in self.queue if cd.status is status
            ]
            done = sum(1 for draft_id in ids if draft_id in reviewed_ids)
            out["by_status"][status.value] = {
                "total": len(ids),
                "reviewed": done,
                "remaining": len(ids) - done,
            }
            total += len(ids)
            reviewed += done
        out["total"] = total
        out["reviewed"] = reviewed
        out["remaining"] = total - reviewed
        return out

    def agreement(self) -> dict:
        records = self.effective_records()
        try:
            matrix, draft_ids, rater_ids = reliability_matrix(records)
            alpha = krippendorff_alpha(matrix)
        except ValueError as exc:
            raters = sorted({r.annotator_id for r in records})
            return {
                "alpha": None,
                "items": len({r.draft_id for r in records}),
                "raters": len(raters),
                "detail": str(exc),
            }
        return {
            "alpha": alpha,
            "items": len(draft_ids),
            "raters": len(rater_ids),
        }

    def export_csv(self, annotator_id: str | None) -> str:
        """Review sheet for the whole queue; filled when an annotator is named."""
        by_draft: dict[str, AnnotationRecord] = {}
        if annotator_id is not None:
            for rec in self.effective_records():
                if rec.annotator_id == annotator_id:
                    by_draft[rec.draft_id] = rec
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\r\n")
        writer.writerow(REVIEW_COLUMNS)
        for cd in self.queue:
            rec = by_draft.get(cd.draft.id)
            writer.writerow(
                [
                    cd.draft.id,
                    cd.draft.instr_lrl,
                    cd.draft.resp_lrl,
                    cd.status.value,
                    "" if rec is None else ("Yes" if rec.is_correct else "No"),
                    (rec and rec.corrected_instruction) or "",
                    (rec and rec.corrected_response) or "",
                    CATEGORY_LABELS[rec.error_category]
                    if rec and rec.error_category
                    else "",
                    (rec and rec.comments) or "",
                ]
            )
        return buffer.getvalue()


def create_app(
    config: Config, clock: Callable[[], float] = time.monotonic
) -> FastAPI:
    service = ReviewService(config, clock=clock)
    app = FastAPI(title="instructlr review service")
    # The browser UI may be served from another origin; auth is header-based
    # (no cookies), so a wildcard is safe here.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = service

    def authorize(request: Request) -> None:
        if not service.token:
            return
        header = request.headers.get("Authorization", "")
        if header != f"Bearer {service.token}":
            raise HTTPException(401, "missing or invalid bearer token")

    def annotator_of(request: Request) -> str:
        annotator = request.headers.get(ANNOTATOR_HEADER, "").strip()
        if not annotator:
            raise HTTPException(400, f"{ANNOTATOR_HEADER} header required")
        return annotator

    def flagged_or_404(draft_id: str) -> CheckedDraft:
        cd = service.by_id.get(draft_id)
        if cd is None:
            raise HTTPException(404, f"no flagged draft {draft_id}")
        return cd

    @app.get("/api/drafts")
    def list_drafts(request: Request, status: str | None = None):
        authorize(request)
        queue = service.queue
        if status is not None:
            try:
                wanted = TriageStatus.from_token(status)
            except ValueError as exc:
                raise HTTPException(400, str(exc)) from None
            queue = [cd for cd in queue if cd.status is wanted]
        annotated_map = service.annotated_by()
        return {
            "drafts": [service.draft_view(cd, annotated_map) for cd in queue]
        }

    @app.get("/api/drafts/{draft_id}")
    def get_draft(draft_id: str, request: Request):
        authorize(request)
        return service.draft_view(flagged_or_404(draft_id))

    @app.post("/api/drafts/{draft_id}/claim")
    def claim_draft(draft_id: str, request: Request):
        authorize(request)
        annotator = annotator_of(request)
        flagged_or_404(draft_id)
        try:
            lease = service.claim(draft_id, annotator)
        except ValueError as exc:
            raise HTTPException(409, str(exc)) from None
        return {
            "draft_id": draft_id,
            "annotator_id": annotator,
            "lease_seconds": lease,
        }

    @app.post("/api/drafts/{draft_id}/annotation", status_code=201)
    async def submit_annotation(draft_id: str, request: Request):
        authorize(request)
        annotator = annotator_of(request)
        flagged_or_404(draft_id)
        try:
            payload = await request.json()
        except Exception:
            raise HTTPException(400, "request body must be JSON") from None
        try:
            record = validate_annotation_payload(payload, draft_id, annotator)
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from None
        try:
            service.submit(record)
        except ValueError as exc:
            raise HTTPException(409, str(exc)) from None
        return {
            "draft_id": record.draft_id,
            "annotator_id": record.annotator_id,
            "is_correct": record.is_correct,
        }

    @app.get("/api/progress")
    def progress(request: Request):
        authorize(request)
        return service.progress()

    @app.get("/api/agreement")
    def agreement(request: Request):
        authorize(request)
        return service.agreement()

    @app.get("/api/export.csv")
    def export_csv(request: Request, annotator: str | None = None):
        authorize(request)
        return Response(
            content=service.export_csv(annotator),
            media_type="text/csv; charset=utf-8",
            headers={
                "Content-Disposition": 'attachment; filename="review.csv"'
            },
        )

    return app


def serve(config: Config) -> None:
    """Run the review service until interrupted."""
    if not config.paths.checked.exists():
        raise ConfigError(
            f"service needs checked drafts at {config.paths.checked}; "
            "run the check stage first"
        )
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.service.host, port=config.service.port)


# normalize_correction is re-exported for UI-parity tests: the editor
# normalizes corrections the same way before comparing options.
__all__ = [
    "ANNOTATOR_HEADER",
    "ReviewService",
    "create_app",
    "latest_per_annotator",
    "normalize_correction",
    "serve",
    "validate_annotation_payload",
]
