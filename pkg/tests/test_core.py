"""Domain-type invariants and draft validation."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from instructlr.core import (
    AnnotationRecord,
    CheckedDraft,
    CheckerAnalysis,
    CorrectionOption,
    CostScenario,
    Draft,
    ErrorCategory,
    NO_COT,
    Topic,
    TriageStatus,
    topics_by_name,
    validate_draft,
    word_count,
)
from instructlr.resources import load_topics

TOPICS = load_topics()


def make_draft(**overrides):
    base = dict(
        id="d-01-0001",
        instr_fr="Quelle est la capitale du Niger ?",
        instr_lrl="Niamey wo di Niger kebal?",
        resp_lrl="Niamey di Niger gaba kuruso.",
        cot_lrl=NO_COT,
        topic_fr="Connaissances générales",
        lang="dje",
    )
    base.update(overrides)
    return Draft(**base)


class TestWordCount:
    def test_empty(self):
        assert word_count("") == 0

    def test_whitespace_only(self):
        assert word_count("   \t\n ") == 0

    def test_seventy_five_words(self):
        assert word_count(" ".join(["kan"] * 75)) == 75

    def test_punctuation_sticks_to_words(self):
        assert word_count("A ga koy, suba.") == 4

    @given(st.lists(st.text(alphabet="abcé", min_size=1), min_size=0, max_size=30))
    def test_matches_token_list_length(self, words):
        assert word_count(" ".join(words)) == len(words)


class TestValidateDraft:
    def test_snapshot_row_is_valid(self):
        assert validate_draft(make_draft(), TOPICS) == []

    def test_response_over_limit(self):
        draft = make_draft(resp_lrl=" ".join(["kan"] * 120))
        report = validate_draft(draft, TOPICS)
        assert any("response exceeds 100 words" in entry for entry in report)

    def test_response_at_limit_is_fine(self):
        draft = make_draft(resp_lrl=" ".join(["kan"] * 100))
        assert validate_draft(draft, TOPICS) == []

    def test_cot_on_non_reasoning_topic(self):
        draft = make_draft(cot_lrl="a ga buburu wa")
        report = validate_draft(draft, TOPICS)
        assert any("reasoning topic" in entry for entry in report)

    def test_missing_cot_on_reasoning_topic(self):
        draft = make_draft(topic_fr="Raisonnement causal")
        report = validate_draft(draft, TOPICS)
        assert any("missing chain-of-thought" in entry for entry in report)

    def test_cot_over_limit(self):
        draft = make_draft(
            topic_fr="Raisonnement causal", cot_lrl=" ".join(["kan"] * 201)
        )
        report = validate_draft(draft, TOPICS)
        assert any("chain-of-thought exceeds 200 words" in entry for entry in report)

    def test_unknown_topic(self):
        report = validate_draft(make_draft(topic_fr="Astrologie"), TOPICS)
        assert any("unknown topic" in entry for entry in report)

    def test_bad_lang_code(self):
        report = validate_draft(make_draft(lang="DJE"), TOPICS)
        assert any("lang" in entry for entry in report)

    def test_pure(self):
        draft = make_draft(resp_lrl=" ".join(["kan"] * 120))
        assert validate_draft(draft, TOPICS) == validate_draft(draft, TOPICS)


class TestEnums:
    def test_error_category_tokens(self):
        assert {c.value for c in ErrorCategory} == {
            "fluency", "suffix_misuse", "tense_inconsistency", "orthography",
        }

    def test_triage_tokens(self):
        assert {s.value for s in TriageStatus} == {
            "accepted", "low_priority", "top_priority",
        }

    @pytest.mark.parametrize("cat", list(ErrorCategory))
    def test_error_category_round_trip(self, cat):
        assert ErrorCategory.from_token(cat.value) is cat

    @pytest.mark.parametrize("status", list(TriageStatus))
    def test_triage_round_trip(self, status):
        assert TriageStatus.from_token(status.value) is status

    def test_unknown_tokens_rejected(self):
        with pytest.raises(ValueError):
            ErrorCategory.from_token("spelling")
        with pytest.raises(ValueError):
            TriageStatus.from_token("medium")


class TestCheckerAnalysis:
    def test_correct_with_options_rejected(self):
        with pytest.raises(ValueError):
            CheckerAnalysis(is_correct=True, options=(CorrectionOption("x"),))

    def test_incorrect_without_reason_rejected(self):
        with pytest.raises(ValueError):
            CheckerAnalysis(is_correct=False, reason=None)

    def test_more_than_three_options_rejected(self):
        opts = tuple(CorrectionOption(f"o{i}") for i in range(4))
        with pytest.raises(ValueError):
            CheckerAnalysis(is_correct=False, reason="r", options=opts)


class TestCheckedDraft:
    def test_correction_only_on_low_priority(self):
        draft = make_draft()
        with pytest.raises(ValueError):
            CheckedDraft(draft=draft, status=TriageStatus.ACCEPTED,
                         applied_correction="x")
        with pytest.raises(ValueError):
            CheckedDraft(draft=draft, status=TriageStatus.LOW_PRIORITY)


class TestAnnotationRecord:
    def test_no_requires_correction_and_category(self):
        with pytest.raises(ValueError):
            AnnotationRecord(draft_id="d", annotator_id="a", is_correct=False,
                             corrected_response="fixed")
        with pytest.raises(ValueError):
            AnnotationRecord(draft_id="d", annotator_id="a", is_correct=False,
                             error_category=ErrorCategory.FLUENCY)

    def test_yes_needs_nothing_else(self):
        rec = AnnotationRecord(draft_id="d", annotator_id="a", is_correct=True)
        assert rec.corrected_response is None


class TestCostScenario:
    def kwargs(self, **over):
        base = dict(
            model_name="m", price_per_million_tokens=12.0, tokens_per_pair=75,
            total_pairs=50_000, error_rate=0.15, qc_mode="instructlr",
            human_rate_per_pair=0.40, reviewed_pairs=6_000,
        )
        base.update(over)
        return base

    def test_valid(self):
        CostScenario(**self.kwargs())

    def test_full_human_must_review_all(self):
        with pytest.raises(ValueError):
            CostScenario(**self.kwargs(qc_mode="full_human"))

    def test_none_reviews_nothing(self):
        with pytest.raises(ValueError):
            CostScenario(**self.kwargs(qc_mode="none"))

    def test_reviewed_cannot_exceed_total(self):
        with pytest.raises(ValueError):
            CostScenario(**self.kwargs(reviewed_pairs=60_000))

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            CostScenario(**self.kwargs(qc_mode="sampling"))


class TestTopicCatalog:
    def test_catalog_has_twenty_unique_topics(self):
        assert len(TOPICS) == 20
        assert len({t.id for t in TOPICS}) == 20

    def test_four_reasoning_topics(self):
        assert sum(1 for t in TOPICS if t.requires_cot) == 4

    def test_duplicate_names_rejected(self):
        dup = [Topic(1, "X", "d", False), Topic(2, "X", "d", False)]
        with pytest.raises(ValueError):
            topics_by_name(dup)
