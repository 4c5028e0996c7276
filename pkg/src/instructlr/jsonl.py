"""Canonical JSON Lines I/O for the pipeline record types.

One JSON object per line, UTF-8, LF line endings, fixed field order. The
decoder is strict: missing required fields and unknown fields are errors
that name the field and the line. write -> read is the identity on valid
records, and the canonical byte form is stable across runs and machines.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Callable

from .core import (
    AnnotationRecord,
    CheckedDraft,
    CheckerAnalysis,
    CorrectionOption,
    Draft,
    ErrorCategory,
    SeedInstruction,
    TriageStatus,
)


class JsonlError(ValueError):
    """Malformed line or I/O problem; carries the path and 1-based line."""

    def __init__(self, path: str | Path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class SchemaError(JsonlError):
    """Record does not match its schema; names the offending field."""

    def __init__(self, path: str | Path, line_no: int, field: str, message: str):
        super().__init__(path, line_no, f"field {field!r}: {message}")
        self.field = field


def _check_keys(
    obj: dict[str, Any],
    required: tuple[str, ...],
    optional: tuple[str, ...] = (),
) -> str | None:
    """Returns the name of the first bad field, or None when keys are fine."""
    for key in required:
        if key not in obj:
            return key
    allowed = set(required) | set(optional)
    for key in obj:
        if key not in allowed:
            return key
    return None


def _require_str(obj: dict[str, Any], key: str) -> str:
    value = obj[key]
    if not isinstance(value, str):
        raise TypeError(f"{key} must be a string")
    return value


# ---------------------------------------------------------------------------
# Per-type encoders (fixed field order) and decoders (strict).

def _encode_seed(seed: SeedInstruction) -> dict[str, Any]:
    return {
        "id": seed.id,
        "instruction_fr": seed.instruction_fr,
        "context_fr": seed.context_fr,
    }


def _decode_seed(obj: dict[str, Any]) -> SeedInstruction:
    bad = _check_keys(obj, ("id", "instruction_fr", "context_fr"))
    if bad is not None:
        raise KeyError(bad)
    return SeedInstruction(
        id=_require_str(obj, "id"),
        instruction_fr=_require_str(obj, "instruction_fr"),
        context_fr=_require_str(obj, "context_fr"),
    )


def _encode_draft(draft: Draft) -> dict[str, Any]:
    return {
        "id": draft.id,
        "instr_fr": draft.instr_fr,
        "instr_lrl": draft.instr_lrl,
        "resp_lrl": draft.resp_lrl,
        "CoT_lrl": draft.cot_lrl,
        "topic_fr": draft.topic_fr,
        "lang": draft.lang,
    }


_DRAFT_FIELDS = (
    "id", "instr_fr", "instr_lrl", "resp_lrl", "CoT_lrl", "topic_fr", "lang",
)


def _decode_draft(obj: dict[str, Any]) -> Draft:
    bad = _check_keys(obj, _DRAFT_FIELDS)
    if bad is not None:
        raise KeyError(bad)
    return Draft(
        id=_require_str(obj, "id"),
        instr_fr=_require_str(obj, "instr_fr"),
        instr_lrl=_require_str(obj, "instr_lrl"),
        resp_lrl=_require_str(obj, "resp_lrl"),
        cot_lrl=_require_str(obj, "CoT_lrl"),
        topic_fr=_require_str(obj, "topic_fr"),
        lang=_require_str(obj, "lang"),
    )


def _encode_analysis(analysis: CheckerAnalysis) -> dict[str, Any]:
    out: dict[str, Any] = {"is_correct": analysis.is_correct}
    if analysis.reason is not None:
        out["reason"] = analysis.reason
    if analysis.options:
        out["options"] = [
            {"text": opt.text, "explanation": opt.explanation}
            for opt in analysis.options
        ]
    return out


def _decode_analysis(obj: dict[str, Any]) -> CheckerAnalysis:
    bad = _check_keys(obj, ("is_correct",), ("reason", "options"))
    if bad is not None:
        raise KeyError(bad)
    if not isinstance(obj["is_correct"], bool):
        raise TypeError("is_correct must be a boolean")
    options = []
    for raw in obj.get("options", []):
        bad = _check_keys(raw, ("text",), ("explanation",))
        if bad is not None:
            raise KeyError(f"options.{bad}")
        options.append(
            CorrectionOption(
                text=_require_str(raw, "text"),
                explanation=str(raw.get("explanation", "")),
            )
        )
    reason = obj.get("reason")
    if reason is not None and not isinstance(reason, str):
        raise TypeError("reason must be a string")
    return CheckerAnalysis(
        is_correct=obj["is_correct"],
        reason=reason,
        options=tuple(options),
    )


def _encode_checked(checked: CheckedDraft) -> dict[str, Any]:
    out: dict[str, Any] = {
        "draft": _encode_draft(checked.draft),
        "status": checked.status.value,
    }
    if checked.analysis is not None:
        out["analysis"] = _encode_analysis(checked.analysis)
    if checked.applied_correction is not None:
        out["applied_correction"] = checked.applied_correction
        out["corrected_field"] = checked.corrected_field
    return out


def _decode_checked(obj: dict[str, Any]) -> CheckedDraft:
    bad = _check_keys(
        obj,
        ("draft", "status"),
        ("analysis", "applied_correction", "corrected_field"),
    )
    if bad is not None:
        raise KeyError(bad)
    if not isinstance(obj["draft"], dict):
        raise TypeError("draft must be an object")
    draft = _decode_draft(obj["draft"])
    status = TriageStatus.from_token(_require_str(obj, "status"))
    analysis = None
    if "analysis" in obj:
        if not isinstance(obj["analysis"], dict):
            raise TypeError("analysis must be an object")
        analysis = _decode_analysis(obj["analysis"])
    correction = obj.get("applied_correction")
    if correction is not None and not isinstance(correction, str):
        raise TypeError("applied_correction must be a string")
    corrected_field = obj.get("corrected_field")
    if corrected_field is not None and corrected_field not in (
        "instr_lrl", "resp_lrl", "CoT_lrl",
    ):
        raise TypeError("corrected_field must name a draft text field")
    return CheckedDraft(
        draft=draft,
        status=status,
        analysis=analysis,
        applied_correction=correction,
        corrected_field=corrected_field,
    )


def _encode_annotation(rec: AnnotationRecord) -> dict[str, Any]:
    out: dict[str, Any] = {
        "draft_id": rec.draft_id,
        "annotator_id": rec.annotator_id,
        "is_correct": rec.is_correct,
    }
    if rec.corrected_instruction is not None:
        out["corrected_instruction"] = rec.corrected_instruction
    if rec.corrected_response is not None:
        out["corrected_response"] = rec.corrected_response
    if rec.error_category is not None:
        out["error_category"] = rec.error_category.value
    if rec.comments is not None:
        out["comments"] = rec.comments
    return out


def _decode_annotation(obj: dict[str, Any]) -> AnnotationRecord:
    bad = _check_keys(
        obj,
        ("draft_id", "annotator_id", "is_correct"),
        ("corrected_instruction", "corrected_response", "error_category",
         "comments"),
    )
    if bad is not None:
        raise KeyError(bad)
    if not isinstance(obj["is_correct"], bool):
        raise TypeError("is_correct must be a boolean")
    category = None
    if "error_category" in obj:
        category = ErrorCategory.from_token(_require_str(obj, "error_category"))
    for key in ("corrected_instruction", "corrected_response", "comments"):
        if key in obj and not isinstance(obj[key], str):
            raise TypeError(f"{key} must be a string")
    return AnnotationRecord(
        draft_id=_require_str(obj, "draft_id"),
        annotator_id=_require_str(obj, "annotator_id"),
        is_correct=obj["is_correct"],
        corrected_instruction=obj.get("corrected_instruction"),
        corrected_response=obj.get("corrected_response"),
        error_category=category,
        comments=obj.get("comments"),
    )


_CODECS: dict[type, tuple[Callable[[Any], dict], Callable[[dict], Any]]] = {
    SeedInstruction: (_encode_seed, _decode_seed),
    Draft: (_encode_draft, _decode_draft),
    CheckedDraft: (_encode_checked, _decode_checked),
    AnnotationRecord: (_encode_annotation, _decode_annotation),
}


def encode_record(record: Any) -> dict[str, Any]:
    """Canonical JSON object for one record (fixed key order)."""
    codec = _CODECS.get(type(record))
    if codec is None:
        raise TypeError(f"no JSONL codec for {type(record).__name__}")
    return codec[0](record)


def decode_record(obj: dict[str, Any], kind: type) -> Any:
    codec = _CODECS.get(kind)
    if codec is None:
        raise TypeError(f"no JSONL codec for {kind.__name__}")
    return codec[1](obj)


def dumps_record(record: Any) -> str:
    """One canonical JSONL line, without the trailing newline."""
    return json.dumps(encode_record(record), ensure_ascii=False)


def read_jsonl(path: str | Path, kind: type) -> list[Any]:
    """Read and strictly validate a JSONL file of one record kind.

    Raises :class:`JsonlError` for malformed JSON and :class:`SchemaError`
    for schema mismatches; both name the file and 1-based line, schema
    errors additionally name the field.
    """
    records: list[Any] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise JsonlError(path, line_no, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise JsonlError(path, line_no, "line is not a JSON object")
            try:
                records.append(decode_record(obj, kind))
            except KeyError as exc:
                field = str(exc.args[0])
                raise SchemaError(
                    path, line_no, field, "missing or unknown"
                ) from exc
            except (TypeError, ValueError) as exc:
                raise SchemaError(path, line_no, _field_of(exc), str(exc)) from exc
    return records


def _field_of(exc: Exception) -> str:
    # Best-effort field name: first word of the message when it looks like one.
    text = str(exc)
    head = text.split(" ", 1)[0].strip(":'\"")
    return head if head.isidentifier() else "record"


def write_jsonl(records: list[Any], path: str | Path) -> None:
    """Write records in canonical form, atomically replacing ``path``."""
    path = Path(path)
    payload = "".join(dumps_record(rec) + "\n" for rec in records)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(payload)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def append_jsonl(records: list[Any], path: str | Path) -> None:
    """Append records to a journal file, creating it when missing.

    Existing lines are never touched; callers serialize concurrent
    appends themselves.
    """
    path = Path(path)
    payload = "".join(dumps_record(rec) + "\n" for rec in records)
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        fh.write(payload)
        fh.flush()
        os.fsync(fh.fileno())
