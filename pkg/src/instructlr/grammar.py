"""Zarma grammar rule engine: tokenization, checks, correction options.

The engine implements the mechanically checkable subset of the 20-rule
grammar: definite-suffix use (rules 4/5), the preverbal-object "na"
construction (rule 17), the future marker "ga" (rule 9), negation placement
(rules 19/20), plus glossary-driven loanword and misspelling detection.
Word-order and past-tense rules (6, 8, 15, 16, 18) are carried as data for
prompt rendering but generate no violations: they are not decidable without
full parsing. Calque-style fluency problems are likewise left to the
model layer; the engine only flags loanword-type fluency.

All operations are pure; the lexicon is immutable after load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .core import (
    CorrectionOption,
    ErrorCategory,
    GlossaryEntry,
    GrammarRule,
    Violation,
)
from .resources import data_path

# Detached as standalone tokens when leading/trailing.
_PUNCT = set('.,!?;:«»"“”‘’()')

# Orthography candidates must be at least this long on both sides;
# shorter strings are almost always within distance 1 of something.
_MIN_ORTHO_LEN = 3


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int

    @property
    def folded(self) -> str:
        return self.text.casefold()


def tokenize(sentence: str) -> list[Token]:
    """Whitespace split with leading/trailing punctuation detached."""
    tokens: list[Token] = []
    pos = 0
    for chunk in sentence.split():
        start = sentence.index(chunk, pos)
        pos = start + len(chunk)
        lead = 0
        while lead < len(chunk) and chunk[lead] in _PUNCT:
            tokens.append(Token(chunk[lead], start + lead, start + lead + 1))
            lead += 1
        trail = len(chunk)
        while trail > lead and chunk[trail - 1] in _PUNCT:
            trail -= 1
        if trail > lead:
            tokens.append(Token(chunk[lead:trail], start + lead, start + trail))
        for k in range(trail, len(chunk)):
            tokens.append(Token(chunk[k], start + k, start + k + 1))
    return tokens


@dataclass(frozen=True)
class NounEntry:
    base: str
    definites: tuple[str, ...] = ()
    plural: str | None = None


@dataclass(frozen=True)
class ZarmaLexicon:
    pronouns: frozenset[str]
    demonstratives: frozenset[str]
    indefinites: frozenset[str]
    nouns: dict[str, NounEntry]
    verbs: frozenset[str]
    copulas: frozenset[str]
    markers: frozenset[str]
    future_adverbs: frozenset[str]
    adjectives: frozenset[str]
    misc: frozenset[str] = frozenset()
    vocabulary: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        noun_forms = set(self.nouns)
        for entry in self.nouns.values():
            noun_forms.update(entry.definites)
            if entry.plural:
                noun_forms.add(entry.plural)
        if noun_forms & self.markers:
            raise ValueError("marker and noun inventories must be disjoint")
        vocab = (
            self.pronouns | self.demonstratives | self.indefinites
            | noun_forms | self.verbs | self.copulas | self.markers
            | self.future_adverbs | self.adjectives | self.misc
        )
        object.__setattr__(self, "vocabulary", frozenset(vocab))

    def noun_forms(self) -> frozenset[str]:
        forms = set(self.nouns)
        for entry in self.nouns.values():
            forms.update(entry.definites)
            if entry.plural:
                forms.add(entry.plural)
        return frozenset(forms)


def load_lexicon(path: str | Path | None = None) -> ZarmaLexicon:
    """Read the tab-separated word inventory (form, pos, features)."""
    path = Path(path) if path is not None else data_path("lexicon", "dje.tsv")
    buckets: dict[str, set[str]] = {
        "pronoun": set(), "demonstrative": set(), "indefinite": set(),
        "verb": set(), "copula": set(), "marker": set(),
        "adverb_future": set(), "adjective": set(), "misc": set(),
    }
    nouns: dict[str, NounEntry] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{line_no}: expected 3 columns")
            form, pos, features = (p.strip() for p in parts)
            if pos == "noun":
                definites: tuple[str, ...] = ()
                plural = None
                if features != "-":
                    for item in features.split(";"):
                        key, _, value = item.partition("=")
                        if key == "definite":
                            definites = tuple(value.split(","))
                        elif key == "plural":
                            plural = value
                        else:
                            raise ValueError(
                                f"{path}:{line_no}: unknown feature {key!r}"
                            )
                nouns[form] = NounEntry(form, definites, plural)
            elif pos in buckets:
                buckets[pos].add(form)
            else:
                raise ValueError(f"{path}:{line_no}: unknown pos {pos!r}")
    return ZarmaLexicon(
        pronouns=frozenset(buckets["pronoun"]),
        demonstratives=frozenset(buckets["demonstrative"]),
        indefinites=frozenset(buckets["indefinite"]),
        nouns=nouns,
        verbs=frozenset(buckets["verb"]),
        copulas=frozenset(buckets["copula"]),
        markers=frozenset(buckets["marker"]),
        future_adverbs=frozenset(buckets["adverb_future"]),
        adjectives=frozenset(buckets["adjective"]),
        misc=frozenset(buckets["misc"]),
    )


def load_rules(path: str | Path | None = None) -> list[GrammarRule]:
    """Read the rule set; ids must cover exactly 1..20."""
    path = Path(path) if path is not None else data_path("rules", "dje.json")
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    rules = [
        GrammarRule(
            id=int(entry["id"]),
            title=str(entry["title"]),
            kind=str(entry["kind"]),
            patterns=tuple(entry["patterns"]),
            examples=tuple((w, r) for w, r in entry["examples"]),
        )
        for entry in raw["rules"]
    ]
    if sorted(r.id for r in rules) != list(range(1, 21)):
        raise ValueError("rule ids must cover exactly 1..20")
    for rule in rules:
        if rule.kind not in ("lexicon", "morphology", "syntax", "negation"):
            raise ValueError(f"rule {rule.id}: unknown kind {rule.kind!r}")
    return rules


def levenshtein(a: str, b: str) -> int:
    """Character edit distance (insert, delete, substitute)."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def _glossary_maps(glossary: list[GlossaryEntry]):
    fr = {e.term_fr.casefold(): e for e in glossary}
    lrl = {e.term_lrl.casefold(): e for e in glossary}
    return fr, lrl


def _subject_index(tokens: list[Token], lexicon: ZarmaLexicon) -> int | None:
    for idx, tok in enumerate(tokens):
        if tok.folded in lexicon.pronouns:
            return idx
    return None


def _has_future_context(
    tokens: list[Token], lexicon: ZarmaLexicon, fr_map: dict
) -> bool:
    for tok in tokens:
        if tok.folded in lexicon.future_adverbs:
            return True
        entry = fr_map.get(tok.folded)
        if entry and entry.term_lrl.casefold() in lexicon.future_adverbs:
            return True
    return False


def check(
    sentence: str,
    lexicon: ZarmaLexicon,
    glossary: list[GlossaryEntry],
) -> list[Violation]:
    """All rule and vocabulary findings for one sentence.

    Each token yields at most one violation; detectors run in fixed
    precedence (loanword, suffix/plural, structure, orthography) so results
    are deterministic. Findings are ordered by position then rule id.
    """
    tokens = tokenize(sentence)
    fr_map, lrl_map = _glossary_maps(glossary)
    vocab = lexicon.vocabulary
    violations: list[Violation] = []
    claimed: set[int] = set()

    def emit(rule_id: int, category: ErrorCategory, idx: int, message: str):
        if idx in claimed:
            return
        claimed.add(idx)
        violations.append(Violation(rule_id, category, (idx, idx + 1), message))

    # Loanword fluency: a token that IS a French glossary term.
    for idx, tok in enumerate(tokens):
        entry = fr_map.get(tok.folded)
        if entry is not None:
            emit(
                0, ErrorCategory.FLUENCY, idx,
                f"loanword '{tok.text}' has the equivalent '{entry.term_lrl}'",
            )

    subject = _subject_index(tokens, lexicon)
    blockers = lexicon.markers | lexicon.copulas

    # Rule 17 construction: base noun where a definite form is required.
    # Triggers: pronoun + na + NOUN + verb, or sentence-final noun right
    # after a plain verb.
    for idx, tok in enumerate(tokens):
        noun = lexicon.nouns.get(tok.folded)
        if noun is None or not noun.definites:
            continue
        in_na_object = (
            idx >= 2
            and tokens[idx - 1].folded == "na"
            and tokens[idx - 2].folded in lexicon.pronouns
            and any(t.folded in lexicon.verbs for t in tokens[idx + 1:])
        )
        word_tokens = [t for t in tokens if t.text not in _PUNCT]
        is_final_object = (
            word_tokens
            and tok is word_tokens[-1]
            and idx >= 1
            and tokens[idx - 1].folded in lexicon.verbs
        )
        if in_na_object or is_final_object:
            emit(
                4, ErrorCategory.SUFFIX_MISUSE, idx,
                f"rule 4: definite object requires '{noun.definites[0]}', "
                f"not the base form '{tok.text}'",
            )

    # Rule 5: malformed definite plural such as a bare 'ey' concatenation.
    known_noun_forms = lexicon.noun_forms()
    for idx, tok in enumerate(tokens):
        folded = tok.folded
        if folded in vocab or not folded.endswith("ey") or len(folded) < 4:
            continue
        stem = folded[:-2]
        for base, entry in lexicon.nouns.items():
            if entry.plural is None:
                continue
            stems = {base} | set(entry.definites)
            if stem in stems and entry.plural in known_noun_forms:
                emit(
                    5, ErrorCategory.SUFFIX_MISUSE, idx,
                    f"rule 5: definite plural of '{base}' is '{entry.plural}'",
                )
                break

    # Rule 17: missing 'na' in pronoun + OBJECT + verb (past positive).
    if subject is not None:
        noun_idx = None
        verb_idx = None
        for idx in range(subject + 1, len(tokens)):
            folded = tokens[idx].folded
            if folded in blockers:
                noun_idx = None
                break
            if noun_idx is None and folded in lexicon.nouns:
                noun_idx = idx
            elif noun_idx is not None and folded in lexicon.verbs:
                verb_idx = idx
                break
        if noun_idx is not None and verb_idx is not None:
            emit(
                17, ErrorCategory.SUFFIX_MISUSE, noun_idx,
                "rule 17: preverbal direct object requires 'na' "
                "after the subject",
            )

    # Rule 9: future context without 'ga' (or negative 'si') before the verb.
    if subject is not None and _has_future_context(tokens, lexicon, fr_map):
        verb_idx = None
        for idx in range(subject + 1, len(tokens)):
            if tokens[idx].folded in lexicon.verbs:
                verb_idx = idx
                break
        if verb_idx is not None:
            between = {t.folded for t in tokens[subject + 1: verb_idx]}
            if not ({"ga", "si"} & between):
                emit(
                    9, ErrorCategory.TENSE_INCONSISTENCY, verb_idx,
                    "rule 9: future context requires 'ga' before "
                    f"'{tokens[verb_idx].text}'",
                )

    # Rule 19: 'mana' must follow the subject, not precede it.
    if subject is not None:
        for idx in range(subject):
            if tokens[idx].folded == "mana":
                emit(
                    19, ErrorCategory.TENSE_INCONSISTENCY, idx,
                    "rule 19: past negative places 'mana' after the subject",
                )

    # Rule 20: 'si' replaces 'ga'; the two never sit together.
    for idx in range(len(tokens) - 1):
        pair = {tokens[idx].folded, tokens[idx + 1].folded}
        if pair == {"si", "ga"}:
            ga_idx = idx if tokens[idx].folded == "ga" else idx + 1
            emit(
                20, ErrorCategory.TENSE_INCONSISTENCY, ga_idx,
                "rule 20: negative uses 'si' alone, never with 'ga'",
            )

    # Orthography: unknown token one edit away from a glossary term.
    for idx, tok in enumerate(tokens):
        folded = tok.folded
        if (
            len(folded) < _MIN_ORTHO_LEN
            or folded in vocab
            or folded in lrl_map
            or not any(c.isalpha() for c in folded)
        ):
            continue
        best: tuple[int, str] | None = None
        for term in lrl_map:
            if len(term) < _MIN_ORTHO_LEN:
                continue
            distance = levenshtein(folded, term)
            if best is None or (distance, term) < best:
                best = (distance, term)
        if best is not None and best[0] == 1:
            emit(
                0, ErrorCategory.ORTHOGRAPHY, idx,
                f"possible misspelling of '{best[1]}'",
            )

    violations.sort(key=lambda v: (v.span[0], v.rule_id))
    return violations


def _match_case(replacement: str, original: str) -> str:
    if original[:1].isupper():
        return replacement[:1].upper() + replacement[1:]
    return replacement


@dataclass(frozen=True)
class _Edit:
    start: int
    end: int
    text: str


def _nearest_term(folded: str, lrl_map: dict) -> str | None:
    best: tuple[int, str] | None = None
    for term in lrl_map:
        if len(term) < _MIN_ORTHO_LEN:
            continue
        candidate = (levenshtein(folded, term), term)
        if best is None or candidate < best:
            best = candidate
    return best[1] if best is not None and best[0] == 1 else None


def _edits_for(
    violation: Violation,
    tokens: list[Token],
    lexicon: ZarmaLexicon,
    glossary: list[GlossaryEntry],
) -> list[_Edit]:
    fr_map, lrl_map = _glossary_maps(glossary)
    idx = violation.span[0]
    tok = tokens[idx]
    if violation.rule_id == 9:
        return [_Edit(tok.start, tok.start, "ga ")]
    if violation.rule_id == 4:
        noun = lexicon.nouns[tok.folded]
        return [_Edit(tok.start, tok.end, _match_case(noun.definites[0], tok.text))]
    if violation.rule_id == 5:
        folded = tok.folded
        for base, entry in lexicon.nouns.items():
            stems = {base} | set(entry.definites)
            if entry.plural and folded[:-2] in stems:
                return [
                    _Edit(tok.start, tok.end, _match_case(entry.plural, tok.text))
                ]
        return []
    if violation.rule_id == 17:
        # The preverbal object is definite in this construction, so the
        # repair also normalizes the noun when a definite form exists.
        edits = [_Edit(tok.start, tok.start, "na ")]
        noun = lexicon.nouns.get(tok.folded)
        if noun is not None and noun.definites:
            edits.append(
                _Edit(tok.start, tok.end, _match_case(noun.definites[0], tok.text))
            )
        return edits
    if violation.rule_id == 19:
        subject = _subject_index(tokens, lexicon)
        if subject is None:
            return []
        subj_tok = tokens[subject]
        delete_end = min(tok.end + 1, subj_tok.start)
        return [
            _Edit(tok.start, delete_end, ""),
            _Edit(subj_tok.end, subj_tok.end, " mana"),
        ]
    if violation.rule_id == 20:
        start, end = tok.start, tok.end
        if idx + 1 < len(tokens) and tokens[idx + 1].start == end + 1:
            end += 1
        elif idx >= 1 and tokens[idx - 1].end == start - 1:
            start -= 1
        return [_Edit(start, end, "")]
    if violation.category is ErrorCategory.FLUENCY:
        entry = fr_map.get(tok.folded)
        if entry is None:
            return []
        return [_Edit(tok.start, tok.end, _match_case(entry.term_lrl, tok.text))]
    if violation.category is ErrorCategory.ORTHOGRAPHY:
        term = _nearest_term(tok.folded, lrl_map)
        if term is None:
            return []
        return [_Edit(tok.start, tok.end, _match_case(term, tok.text))]
    return []


def _apply_edits(sentence: str, edits: list[_Edit]) -> str:
    # Right-to-left so earlier spans keep their original coordinates; at
    # equal starts the wider (replacing) edit must land before the insert.
    result = sentence
    for edit in sorted(edits, key=lambda e: (e.start, e.end), reverse=True):
        result = result[: edit.start] + edit.text + result[edit.end:]
    return result


def suggest(
    sentence: str,
    violations: list[Violation],
    lexicon: ZarmaLexicon,
    glossary: list[GlossaryEntry],
) -> list[CorrectionOption]:
    """Up to three corrected sentences: full fix first, then single fixes.

    Deterministic: single-violation fixes follow violation position order;
    duplicates collapse into the earliest option.
    """
    if not violations:
        return []
    tokens = tokenize(sentence)
    candidates: list[tuple[str, str]] = []

    full_edits: list[_Edit] = []
    full_notes: list[str] = []
    for violation in violations:
        edits = _edits_for(violation, tokens, lexicon, glossary)
        if edits:
            full_edits.extend(edits)
            full_notes.append(violation.message)
    if full_edits:
        candidates.append(
            (_apply_edits(sentence, full_edits), "; ".join(full_notes))
        )
    for violation in violations:
        edits = _edits_for(violation, tokens, lexicon, glossary)
        if edits:
            candidates.append(
                (_apply_edits(sentence, edits), violation.message)
            )

    options: list[CorrectionOption] = []
    seen: set[str] = set()
    for text, note in candidates:
        if sentence[:1].isupper() and text[:1].islower():
            text = text[:1].upper() + text[1:]
        if text in seen or text == sentence:
            continue
        seen.add(text)
        options.append(CorrectionOption(text=text, explanation=note))
        if len(options) == 3:
            break
    return options
