"""Span construction, scorers, softmax, and article-level aggregation."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from litdex import (
    LexicalScorer,
    ExternalScorer,
    RetrievalUnit,
    ScorerUnavailable,
    Span,
    build_index,
    make_spans,
    relevance_input,
    rerank,
    score_span_lexical,
    search,
    segment_sentences,
    true_false_probability,
)
from stub_backends import StubBackend, dead_endpoint


def spans_for(n_sentences: int, window: int = 10, stride: int = 5) -> list[tuple[int, int]]:
    text = " ".join("Word one two." for _ in range(n_sentences))
    sentences = segment_sentences(text)
    assert len(sentences) == n_sentences
    spans = make_spans(text, sentences, "a1", 0, window=window, stride=stride)
    return [s.sentence_range for s in spans]


class TestMakeSpans:
    def test_twelve_sentences(self):
        assert spans_for(12) == [(0, 10), (5, 12)]

    def test_seven_sentences(self):
        assert spans_for(7) == [(0, 7)]

    def test_exactly_window(self):
        assert spans_for(10) == [(0, 10)]

    def test_zero_sentences_whole_text(self):
        spans = make_spans("no terminator here", [], "a1", 3)
        assert len(spans) == 1
        assert spans[0].sentence_range == (0, 0)
        assert spans[0].text == "no terminator here"
        assert spans[0].unit_ordinal == 3

    def test_span_text_joins_sentences(self):
        text = "Alpha beta gamma. Delta epsilon zeta. Eta theta iota."
        sentences = segment_sentences(text)
        spans = make_spans(text, sentences, "a1", 0, window=2, stride=1)
        assert spans[0].text == "Alpha beta gamma. Delta epsilon zeta."
        assert spans[1].text == "Delta epsilon zeta. Eta theta iota."

    @pytest.mark.parametrize("window,stride", [(0, 1), (5, 0), (5, 6), (-1, 1)])
    def test_invalid_parameters(self, window, stride):
        with pytest.raises(ValueError):
            make_spans("Text.", [], "a1", 0, window=window, stride=stride)

    def test_matches_closed_form_enumeration(self):
        for n in range(0, 41):
            assert spans_for(n) == oracles.window_spans(n), f"n={n}"


def span_with(text: str) -> Span:
    return Span(article_id="a1", unit_ordinal=0, sentence_range=(0, 1), text=text)


class TestLexicalScorer:
    def test_single_match(self):
        assert score_span_lexical("virus", span_with("the virus spread")) == 0.5

    def test_no_overlap(self):
        assert score_span_lexical("virus", span_with("unrelated words only")) == 0.0

    def test_saturation_at_three(self):
        span = span_with("virus virus virus virus virus spread")
        assert score_span_lexical("virus spread", span) == pytest.approx(0.8)

    def test_zero_term_query(self):
        assert score_span_lexical("the", span_with("anything")) == 0.0

    def test_probability_range(self):
        rng = random.Random(3)
        words = ["virus", "cell", "host", "the", "gene"]
        for _ in range(50):
            query = " ".join(rng.choice(words) for _ in range(rng.randint(1, 4)))
            text = " ".join(rng.choice(words) for _ in range(rng.randint(0, 30)))
            p = score_span_lexical(query, span_with(text))
            assert 0.0 <= p < 1.0


class TestTrueFalseProbability:
    def test_equal_logits_exactly_half(self):
        assert true_false_probability(0.0, 0.0) == 0.5
        assert true_false_probability(123.4, 123.4) == 0.5

    def test_frozen_value(self):
        # e^2 / (e^2 + 1), evaluated independently
        assert true_false_probability(2.0, 0.0) == pytest.approx(0.8807970779778824, abs=1e-15)

    def test_no_overflow_at_extreme_logits(self):
        assert true_false_probability(1000.0, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert true_false_probability(0.0, 1000.0) == pytest.approx(0.0, abs=1e-12)
        assert true_false_probability(-1000.0, -1000.0) == 0.5

    @given(
        st.floats(min_value=-500, max_value=500),
        st.floats(min_value=-500, max_value=500),
    )
    def test_complement_sums_to_one(self, a, b):
        assert true_false_probability(a, b) + true_false_probability(b, a) == pytest.approx(1.0, abs=1e-12)

    @given(
        st.floats(min_value=-100, max_value=100),
        st.floats(min_value=-100, max_value=100),
        st.floats(min_value=-100, max_value=100),
    )
    def test_shift_invariance(self, a, b, c):
        assert true_false_probability(a + c, b + c) == pytest.approx(
            true_false_probability(a, b), abs=1e-12
        )

    def test_strictly_increasing_in_true_logit(self):
        values = [true_false_probability(l, 0.5) for l in [-2.0, -1.0, 0.0, 1.0, 2.0]]
        assert values == sorted(values)
        assert len(set(values)) == len(values)


class TestExternalScorer:
    def test_scores_via_wire_protocol(self):
        with StubBackend() as stub:
            scorer = ExternalScorer(stub.url, timeout=5.0)
            spans = [span_with("alpha"), span_with("beta")]
            probabilities = scorer.score_spans("question", spans)
            assert len(probabilities) == 2
            for text, p in zip(["alpha", "beta"], probabilities):
                l_true, l_false = stub.logits_fn(relevance_input("question", text))
                expected = math.exp(l_true) / (math.exp(l_true) + math.exp(l_false))
                assert p == pytest.approx(expected, abs=1e-12)
            path, body = stub.requests[0]
            assert path == "/score"
            assert body["target_words"] == ["true", "false"]
            assert body["inputs"][0] == "Query: question Document: alpha Relevant:"

    def test_batching_preserves_order(self):
        with StubBackend() as stub:
            scorer = ExternalScorer(stub.url, timeout=5.0, batch_size=2)
            spans = [span_with(f"text {i}") for i in range(5)]
            batched = scorer.score_spans("q", spans)
            assert len(stub.requests) == 3
        with StubBackend() as stub2:
            unbatched = ExternalScorer(stub2.url, timeout=5.0, batch_size=64).score_spans("q", spans)
        assert batched == unbatched

    def test_connection_refused_raises(self):
        scorer = ExternalScorer(dead_endpoint(), timeout=0.5)
        with pytest.raises(ScorerUnavailable):
            scorer.score_spans("q", [span_with("x")])

    def test_http_error_raises(self):
        with StubBackend(mode="error") as stub:
            with pytest.raises(ScorerUnavailable):
                ExternalScorer(stub.url, timeout=5.0).score_spans("q", [span_with("x")])

    def test_garbage_payload_raises(self):
        with StubBackend(mode="garbage") as stub:
            with pytest.raises(ScorerUnavailable):
                ExternalScorer(stub.url, timeout=5.0).score_spans("q", [span_with("x")])


class _FixedScorer:
    """Maps span text to a fixed probability; unknown text scores 0."""

    kind = "lexical"

    def __init__(self, table: dict[str, float]):
        self.table = table

    def score_spans(self, query: str, spans):
        return [self.table.get(span.text, 0.0) for span in spans]


def one_sentence_units(texts_by_article: dict[str, list[str]]) -> list[RetrievalUnit]:
    units = []
    for article_id, texts in texts_by_article.items():
        for i, text in enumerate(texts):
            units.append(
                RetrievalUnit(
                    unit_id=f"{article_id}#p{i}",
                    article_id=article_id,
                    text=text,
                    paragraph_index=i,
                    source="s",
                )
            )
    return units


class TestRerank:
    def test_article_score_is_max_of_spans(self):
        units = one_sentence_units({"a1": ["First span here.", "Second span here.", "Third span here."]})
        index = build_index(units)
        hits = search(index, "span", k=10)
        scorer = _FixedScorer({"First span here.": 0.2, "Second span here.": 0.9, "Third span here.": 0.4})
        ranking = rerank("span", hits, index, scorer)
        assert len(ranking.entries) == 1
        assert ranking.entries[0].score == 0.9
        assert ranking.entries[0].best_span.text == "Second span here."

    def test_two_hits_same_article_dedup(self):
        units = one_sentence_units({"a1": ["Virus alpha.", "Virus beta."]})
        index = build_index(units)
        hits = search(index, "virus", k=10)
        assert len(hits) == 2
        ranking = rerank("virus", hits, index, LexicalScorer())
        assert len(ranking.entries) == 1

    def test_single_hit_identity(self):
        units = one_sentence_units({"a1": ["Virus alpha."]})
        index = build_index(units)
        hits = search(index, "virus", k=10)
        ranking = rerank("virus", hits, index, _FixedScorer({"Virus alpha.": 0.7}))
        assert [(e.article_id, e.score) for e in ranking.entries] == [("a1", 0.7)]

    def test_tie_prefers_earliest_unit_then_start(self):
        units = one_sentence_units({"a1": ["Tie text one.", "Tie text two."]})
        index = build_index(units)
        hits = search(index, "tie", k=10)
        scorer = _FixedScorer({"Tie text one.": 0.5, "Tie text two.": 0.5})
        ranking = rerank("tie", hits, index, scorer)
        assert ranking.entries[0].best_span.unit_ordinal == 0

    def test_score_tie_breaks_by_bm25_then_id(self):
        units = one_sentence_units(
            {
                "a2": ["Virus virus virus here."],
                "a1": ["Virus here."],
                "a3": ["Virus here too."],
            }
        )
        index = build_index(units)
        hits = search(index, "virus", k=10)
        bm25_by_article = {h.article_id: h.bm25_score for h in hits}
        scorer = _FixedScorer(
            {"Virus virus virus here.": 0.5, "Virus here.": 0.5, "Virus here too.": 0.5}
        )
        ranking = rerank("virus", hits, index, scorer)
        ordered = [e.article_id for e in ranking.entries]
        assert ordered[0] == "a2"  # highest BM25 wins the score tie
        assert bm25_by_article["a2"] > bm25_by_article["a1"]
        # remaining two share BM25 and probability: article_id ascending
        assert ordered[1:] == sorted(ordered[1:])

    def test_degrades_to_lexical_on_scorer_failure(self):
        units = one_sentence_units({"a1": ["Virus alpha."], "a2": ["Virus beta."]})
        index = build_index(units)
        hits = search(index, "virus", k=10)
        broken = ExternalScorer(dead_endpoint(), timeout=0.3)
        ranking = rerank("virus", hits, index, broken)
        assert ranking.degraded is True
        assert ranking.scorer == "lexical"
        expected = rerank("virus", hits, index, LexicalScorer())
        assert [(e.article_id, e.score) for e in ranking.entries] == [
            (e.article_id, e.score) for e in expected.entries
        ]

    def test_deterministic_with_lexical(self):
        units = one_sentence_units({"a1": ["Virus alpha.", "More virus text."], "a2": ["Virus beta."]})
        index = build_index(units)
        hits = search(index, "virus", k=10)
        first = rerank("virus", hits, index, LexicalScorer())
        second = rerank("virus", hits, index, LexicalScorer())
        assert first == second

    def test_first_stage_k_recorded(self):
        units = one_sentence_units({"a1": ["Virus alpha."]})
        index = build_index(units)
        hits = search(index, "virus", k=10)
        assert rerank("virus", hits, index, LexicalScorer()).first_stage_k == 1
        assert rerank("virus", hits, index, LexicalScorer(), first_stage_k=10).first_stage_k == 10

    def test_max_aggregation_matches_oracle_randomized(self):
        rng = random.Random(13)
        for _ in range(40):
            n_articles = rng.randint(1, 8)
            texts_by_article = {
                f"a{i}": [f"Sentence {i} {j} word." for j in range(rng.randint(1, 4))]
                for i in range(n_articles)
            }
            units = one_sentence_units(texts_by_article)
            index = build_index(units)
            hits = search(index, "sentence word", k=len(units))
            table = {u.text: round(rng.random(), 3) for u in units}
            ranking = rerank("sentence word", hits, index, _FixedScorer(table))

            records = []
            for hit in hits:
                unit = index.units[hit.unit_ordinal]
                records.append((hit.article_id, hit.unit_ordinal, 0, table[unit.text]))
            expected = oracles.max_aggregate(records)
            assert len(ranking.entries) == len({h.article_id for h in hits})
            for entry in ranking.entries:
                exp_score, exp_key = expected[entry.article_id]
                assert entry.score == exp_score
                assert (entry.best_span.unit_ordinal, entry.best_span.sentence_range[0]) == exp_key

    def test_scores_non_increasing(self):
        rng = random.Random(17)
        units = one_sentence_units({f"a{i}": [f"Common term {i}."] for i in range(10)})
        index = build_index(units)
        hits = search(index, "common term", k=20)
        table = {u.text: rng.random() for u in units}
        ranking = rerank("common term", hits, index, _FixedScorer(table))
        scores = [e.score for e in ranking.entries]
        assert scores == sorted(scores, reverse=True)

    def test_raising_span_probability_never_lowers_rank(self):
        units = one_sentence_units({f"a{i}": [f"Shared word {i}."] for i in range(6)})
        index = build_index(units)
        hits = search(index, "shared word", k=20)
        rng = random.Random(23)
        table = {u.text: round(rng.random(), 3) for u in units}
        target_text = units[2].text
        base = rerank("shared word", hits, index, _FixedScorer(dict(table)))
        base_rank = [e.article_id for e in base.entries].index("a2")
        boosted_table = dict(table)
        boosted_table[target_text] = min(1.0, table[target_text] + 0.4)
        boosted = rerank("shared word", hits, index, _FixedScorer(boosted_table))
        boosted_rank = [e.article_id for e in boosted.entries].index("a2")
        assert boosted_rank <= base_rank


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=40))
def test_window_law_property(n_sentences: int):
    assert spans_for(n_sentences) == oracles.window_spans(n_sentences)
