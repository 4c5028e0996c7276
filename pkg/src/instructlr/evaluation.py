"""Checker quality metrics: sentence GLEU, exact match, false positives.

The GLEU here is the sentence-level min(precision, recall) form over
n-gram orders 1..4 with clipped match counts. An order with zero matches
contributes through add-one smoothing on both counts instead of zeroing
the whole product; the per-order scores combine as a geometric mean.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable

from .core import CheckerAnalysis

MAX_ORDER = 4


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(
        tuple(tokens[i: i + n]) for i in range(len(tokens) - n + 1)
    )


def gleu(hypothesis: str, reference: str) -> float:
    """Similarity of a corrected sentence to its gold form, in [0, 1]."""
    ref_tokens = reference.split()
    if not ref_tokens:
        raise ValueError("reference must not be empty")
    hyp_tokens = hypothesis.split()

    product = 1.0
    for n in range(1, MAX_ORDER + 1):
        hyp_counts = _ngrams(hyp_tokens, n)
        ref_counts = _ngrams(ref_tokens, n)
        hyp_total = sum(hyp_counts.values())
        ref_total = sum(ref_counts.values())
        matches = sum(
            min(count, ref_counts[gram])
            for gram, count in hyp_counts.items()
        )
        if matches == 0:
            score = min(1.0 / (hyp_total + 1), 1.0 / (ref_total + 1))
        else:
            score = min(matches / hyp_total, matches / ref_total)
        product *= score
    return product ** (1.0 / MAX_ORDER)


@dataclass(frozen=True)
class EvalSentence:
    """One test sentence; gold is None for known-clean sentences."""

    text: str
    gold: str | None = None

    @property
    def is_error_case(self) -> bool:
        return self.gold is not None


@dataclass(frozen=True)
class EvaluationReport:
    mean_gleu: float
    exact_match_rate: float
    false_positive_rate: float
    error_count: int
    clean_count: int
    fluency: float | None = None  # externally supplied human rating


SentenceChecker = Callable[[str], CheckerAnalysis]


def evaluate_checker(
    items: list[EvalSentence],
    checker: SentenceChecker,
    fluency: float | None = None,
) -> EvaluationReport:
    """Score a checker against gold corrections and clean sentences.

    On error sentences the proposed text is the best-scoring option, or
    the unchanged input when the checker offered nothing. Both partitions
    must be non-empty.
    """
    errors = [item for item in items if item.is_error_case]
    clean = [item for item in items if not item.is_error_case]
    if not errors:
        raise ValueError("test set has no error sentences")
    if not clean:
        raise ValueError("test set has no clean sentences")

    gleu_total = 0.0
    exact_matches = 0
    for item in errors:
        analysis = checker(item.text)
        candidates = [opt.text for opt in analysis.options] or [item.text]
        gleu_total += max(gleu(text, item.gold) for text in candidates)
        if any(opt.text == item.gold for opt in analysis.options):
            exact_matches += 1

    false_positives = sum(
        1 for item in clean if not checker(item.text).is_correct
    )
    return EvaluationReport(
        mean_gleu=gleu_total / len(errors),
        exact_match_rate=exact_matches / len(errors),
        false_positive_rate=false_positives / len(clean),
        error_count=len(errors),
        clean_count=len(clean),
        fluency=fluency,
    )
