"""Loaders for the data files shipped inside the package.

Every loader accepts an explicit path so runs can swap in their own
catalogs; the ``default_*`` helpers point at the packaged copies.
"""

from __future__ import annotations

import json
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Sequence

from .core import GlossaryEntry, Topic

_DATA_ROOT = Path(str(importlib_resources.files("instructlr") / "data"))


def data_path(*parts: str) -> Path:
    """Path of a packaged data file."""
    return _DATA_ROOT.joinpath(*parts)


def load_topics(path: str | Path | None = None) -> list[Topic]:
    """Read a topic catalog; ids must be unique and names distinct."""
    path = Path(path) if path is not None else data_path("topics.json")
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    topics = [
        Topic(
            id=int(entry["id"]),
            name_fr=str(entry["name_fr"]),
            description_fr=str(entry["description_fr"]),
            requires_cot=bool(entry["requires_cot"]),
        )
        for entry in raw["topics"]
    ]
    ids = [t.id for t in topics]
    names = [t.name_fr for t in topics]
    if len(set(ids)) != len(ids):
        raise ValueError("topic ids must be unique")
    if len(set(names)) != len(names):
        raise ValueError("topic names must be unique")
    return topics


def select_topics(topics: list[Topic], wanted: Sequence[str]) -> list[Topic]:
    """Subset a catalog by French name; empty selection keeps everything."""
    if not wanted:
        return list(topics)
    catalog = {t.name_fr: t for t in topics}
    missing = [name for name in wanted if name not in catalog]
    if missing:
        raise ValueError(f"pipeline.topics names unknown topic {missing[0]!r}")
    return [catalog[name] for name in wanted]


def load_guidelines(
    path: str | Path | None = None, lang: str = "dje"
) -> list[str]:
    """One guideline per line; blank lines and #-comments skipped."""
    path = Path(path) if path is not None else data_path(
        "guidelines", f"{lang}.txt"
    )
    lines = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            text = line.strip()
            if text and not text.startswith("#"):
                lines.append(text)
    return lines


def load_glossary(
    path: str | Path | None = None, lang: str = "dje"
) -> list[GlossaryEntry]:
    """Tab-separated French/target-language pairs; pairs must be unique."""
    path = Path(path) if path is not None else data_path(
        "glossary", f"{lang}.tsv"
    )
    entries: list[GlossaryEntry] = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.rstrip("\n")
            if not text.strip() or text.startswith("#"):
                continue
            parts = text.split("\t")
            if len(parts) != 2:
                raise ValueError(
                    f"{path}:{line_no}: expected 2 tab-separated terms"
                )
            pair = (parts[0].strip(), parts[1].strip())
            if pair in seen:
                raise ValueError(f"{path}:{line_no}: duplicate pair {pair}")
            seen.add(pair)
            entries.append(GlossaryEntry(term_fr=pair[0], term_lrl=pair[1]))
    return entries


def load_sentences(
    path: str | Path | None = None, lang: str = "dje"
) -> list[str]:
    """Known-good reference sentences, one per line."""
    path = Path(path) if path is not None else data_path(
        "sentences", f"{lang}.txt"
    )
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
