"""Knowledge base for the automated checker: sentences, rules, glossary.

Sentences are indexed as L2-normalized bag-of-words count vectors and
queried by cosine similarity. The vectorizer is deliberately simple and
deterministic; anything smarter can be dropped in behind the same
interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import GlossaryEntry, GrammarRule
from .grammar import tokenize


def _bag(text: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for token in tokenize(text):
        word = token.folded
        if any(c.isalnum() for c in word):
            counts[word] = counts.get(word, 0) + 1
    return counts


def _norm(bag: dict[str, int]) -> float:
    return math.sqrt(sum(v * v for v in bag.values()))


@dataclass(frozen=True)
class RetrievalHit:
    sentence: str
    score: float
    rank: int


@dataclass(frozen=True)
class KnowledgeBase:
    sentences: tuple[str, ...]
    rules: tuple[GrammarRule, ...]
    glossary: tuple[GlossaryEntry, ...]
    _bags: tuple[dict, ...]
    _norms: tuple[float, ...]


def build_index(
    sentences: list[str],
    rules: list[GrammarRule],
    glossary: list[GlossaryEntry],
) -> KnowledgeBase:
    """Index the clean-sentence corpus; rebuilds are bit-identical."""
    if not sentences:
        raise ValueError("at least one sentence is required")
    seen_fr: set[str] = set()
    for entry in glossary:
        key = entry.term_fr.casefold()
        if key in seen_fr:
            raise ValueError(f"duplicate glossary term: {entry.term_fr!r}")
        seen_fr.add(key)
    bags = tuple(_bag(s) for s in sentences)
    return KnowledgeBase(
        sentences=tuple(sentences),
        rules=tuple(rules),
        glossary=tuple(glossary),
        _bags=bags,
        _norms=tuple(_norm(b) for b in bags),
    )


def retrieve(kb: KnowledgeBase, query: str, k: int = 5) -> list[RetrievalHit]:
    """Top-k sentences by cosine similarity; ties keep insertion order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    query_bag = _bag(query)
    query_norm = _norm(query_bag)
    scored: list[tuple[float, int]] = []
    for idx, (bag, norm) in enumerate(zip(kb._bags, kb._norms)):
        if query_norm == 0 or norm == 0:
            score = 0.0
        else:
            dot = sum(count * bag.get(word, 0) for word, count in query_bag.items())
            score = dot / (query_norm * norm)
        scored.append((score, idx))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [
        RetrievalHit(sentence=kb.sentences[idx], score=score, rank=rank)
        for rank, (score, idx) in enumerate(scored[:k], start=1)
    ]


def glossary_info(kb: KnowledgeBase, tokens: list[str]) -> list[tuple[str, GlossaryEntry | None]]:
    """Per-token glossary lookup: target-language side first, then French."""
    lrl = {e.term_lrl.casefold(): e for e in kb.glossary}
    fr = {e.term_fr.casefold(): e for e in kb.glossary}
    out: list[tuple[str, GlossaryEntry | None]] = []
    for token in tokens:
        folded = token.casefold()
        out.append((token, lrl.get(folded) or fr.get(folded)))
    return out
