"""Embeddings, token salience, and sentence selection."""

from __future__ import annotations

import numpy as np
import pytest

import oracles
from litdex import (
    EmbedderUnavailable,
    ExternalEmbedder,
    HashNGramEmbedder,
    analyze,
    embed_tokens,
    segment_sentences,
    select_highlights,
    token_salience,
)
from stub_backends import StubBackend, dead_endpoint

# One sentence contains the query terms verbatim; the other sentences
# share no character n-gram (orders 3-5, with boundary markers) with any
# query token.  Asserted below, not assumed.
FIXTURE_PARAGRAPH = (
    "Apples grow near my house. Bananas ripen quickly. "
    "The incubation period lasted five days."
)
FIXTURE_QUERY = "incubation period"


def char_ngrams(token: str) -> set[str]:
    decorated = f"^{token}$"
    return {
        decorated[i : i + order]
        for order in (3, 4, 5)
        for i in range(len(decorated) - order + 1)
    }


class TestHashNGramEmbedder:
    def test_deterministic_across_instances(self):
        a = HashNGramEmbedder().embed(["virus"])
        b = HashNGramEmbedder().embed(["virus"])
        np.testing.assert_array_equal(a, b)

    def test_unit_norm(self):
        vecs = HashNGramEmbedder().embed(["virus", "incubation", "a"])
        np.testing.assert_allclose(np.linalg.norm(vecs, axis=1), 1.0, atol=1e-12)

    def test_self_cosine_is_one(self):
        embedder = HashNGramEmbedder()
        u = embedder.embed(["virus"])[0]
        v = embedder.embed(["virus"])[0]
        assert float(u @ v) == pytest.approx(1.0, abs=1e-12)

    def test_shared_ngrams_beat_disjoint(self):
        embedder = HashNGramEmbedder()
        virus, viruses, zebra = embedder.embed(["virus", "viruses", "zebra"])
        assert float(virus @ viruses) > float(virus @ zebra)

    def test_dimension(self):
        assert HashNGramEmbedder().embed(["x", "y"]).shape == (2, 64)

    def test_empty_token_list(self):
        assert HashNGramEmbedder().embed([]).shape == (0, 64)


class TestExternalEmbedder:
    def test_normalizes_backend_vectors(self):
        with StubBackend() as stub:
            vecs = ExternalEmbedder(stub.url, timeout=5.0).embed(["alpha", "beta"])
            np.testing.assert_allclose(np.linalg.norm(vecs, axis=1), 1.0, atol=1e-12)
            assert stub.requests[0][0] == "/embed"
            assert stub.requests[0][1] == {"tokens": ["alpha", "beta"]}

    def test_connection_refused_raises(self):
        with pytest.raises(EmbedderUnavailable):
            ExternalEmbedder(dead_endpoint(), timeout=0.3).embed(["x"])

    def test_malformed_payload_raises(self):
        with StubBackend(mode="garbage") as stub:
            with pytest.raises(EmbedderUnavailable):
                ExternalEmbedder(stub.url, timeout=5.0).embed(["x"])

    def test_embed_tokens_wrapper(self):
        with StubBackend() as stub:
            direct = ExternalEmbedder(stub.url, timeout=5.0)
            np.testing.assert_array_equal(embed_tokens(direct, ["x"]), direct.embed(["x"]))


class TestTokenSalience:
    def test_identical_token_scores_one(self):
        embedder = HashNGramEmbedder()
        q = embedder.embed(["virus"])
        c = embedder.embed(["virus", "zebra"])
        scores = token_salience(q, c)
        assert scores[0] == pytest.approx(1.0, abs=1e-12)
        assert scores[0] > scores[1]

    def test_orthogonal_vectors_score_zero(self):
        q = np.array([[1.0, 0.0]])
        c = np.array([[0.0, 1.0], [0.0, -1.0]])
        np.testing.assert_array_equal(token_salience(q, c), [0.0, 0.0])

    def test_negative_cosines_clipped(self):
        q = np.array([[1.0, 0.0]])
        c = np.array([[-1.0, 0.0]])
        assert token_salience(q, c)[0] == 0.0

    def test_empty_query_all_zero(self):
        c = HashNGramEmbedder().embed(["x", "y"])
        np.testing.assert_array_equal(token_salience(np.zeros((0, 64)), c), [0.0, 0.0])

    def test_max_over_query_tokens_matches_brute_force(self):
        embedder = HashNGramEmbedder()
        q = embedder.embed(["virus", "spread"])
        c = embedder.embed(["infection", "zebra", "viral"])
        matrix = oracles.cosine_matrix(c.tolist(), q.tolist())
        expected = [max(0.0, min(1.0, max(row))) for row in matrix]
        np.testing.assert_allclose(token_salience(q, c), expected, atol=1e-9)


class TestSelectHighlights:
    def test_fixture_precondition_ngram_disjointness(self):
        query_grams = set().union(*(char_ngrams(t.term) for t in analyze(FIXTURE_QUERY)))
        sentences = segment_sentences(FIXTURE_PARAGRAPH)
        other_text = " ".join(
            FIXTURE_PARAGRAPH[s.start_char : s.end_char] for s in sentences[:2]
        )
        other_grams = set().union(*(char_ngrams(t.term) for t in analyze(other_text)))
        assert not query_grams & other_grams

    def test_verbatim_sentence_wins(self):
        results, degraded = select_highlights(FIXTURE_PARAGRAPH, FIXTURE_QUERY, HashNGramEmbedder())
        assert not degraded
        assert len(results) == 1
        top = results[0]
        assert top.sentence_index == 2
        span_text = FIXTURE_PARAGRAPH[top.sentence_span.start_char : top.sentence_span.end_char]
        assert span_text == "The incubation period lasted five days."
        top_terms = [term for term, _ in top.top_words]
        assert "incubation" in top_terms and "period" in top_terms

    def test_single_sentence_with_shared_term(self):
        results, _ = select_highlights("The virus spread fast.", "virus", HashNGramEmbedder())
        assert [r.sentence_index for r in results] == [0]

    def test_empty_query_returns_nothing(self):
        assert select_highlights("Some text here.", "the", HashNGramEmbedder()) == ([], False)

    def test_empty_paragraph_returns_nothing(self):
        assert select_highlights("", "virus", HashNGramEmbedder()) == ([], False)
        assert select_highlights("...", "virus", HashNGramEmbedder()) == ([], False)

    def test_deterministic(self):
        first = select_highlights(FIXTURE_PARAGRAPH, FIXTURE_QUERY, HashNGramEmbedder())
        second = select_highlights(FIXTURE_PARAGRAPH, FIXTURE_QUERY, HashNGramEmbedder())
        assert first == second

    def test_max_sentences_limits_output(self):
        paragraph = "Virus found here. Virus there too. Virus everywhere now."
        one, _ = select_highlights(paragraph, "virus", HashNGramEmbedder(), max_sentences=1)
        three, _ = select_highlights(paragraph, "virus", HashNGramEmbedder(), max_sentences=3)
        assert len(one) == 1
        assert len(three) == 3

    def test_sentence_scores_bounded_by_k(self):
        paragraph = "Virus virus virus virus virus. Also virus virus here."
        results, _ = select_highlights(paragraph, "virus", HashNGramEmbedder(), k=3, max_sentences=2)
        assert sum(r.salience for r in results) <= 3.0 + 1e-9
        for result in results:
            assert len(result.top_words) <= 3

    def test_top_k_tie_prefers_earlier_position(self):
        # two sentences each contain the same single query term once; with
        # K=1 only the earlier occurrence is kept
        paragraph = "Virus first here. Virus second there."
        results, _ = select_highlights(paragraph, "virus", HashNGramEmbedder(), k=1, max_sentences=2)
        assert [r.sentence_index for r in results] == [0]

    def test_permuting_sentences_permutes_highlights(self):
        sentences = [
            "Apples grow near my house.",
            "Bananas ripen quickly.",
            "The incubation period lasted five days.",
        ]
        for order in ([2, 0, 1], [1, 2, 0], [0, 2, 1]):
            permuted = " ".join(sentences[i] for i in order)
            results, _ = select_highlights(permuted, FIXTURE_QUERY, HashNGramEmbedder())
            assert len(results) == 1
            top = results[0]
            assert top.sentence_index == order.index(2)
            text = permuted[top.sentence_span.start_char : top.sentence_span.end_char]
            assert text == sentences[2]

    def test_degrades_to_hash_ngram_on_external_failure(self):
        broken = ExternalEmbedder(dead_endpoint(), timeout=0.3)
        results, degraded = select_highlights(FIXTURE_PARAGRAPH, FIXTURE_QUERY, broken)
        assert degraded is True
        expected, _ = select_highlights(FIXTURE_PARAGRAPH, FIXTURE_QUERY, HashNGramEmbedder())
        assert results == expected

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            select_highlights("Text.", "q", HashNGramEmbedder(), k=0)
        with pytest.raises(ValueError):
            select_highlights("Text.", "q", HashNGramEmbedder(), max_sentences=0)

    def test_salience_scores_within_bounds(self):
        results, _ = select_highlights(FIXTURE_PARAGRAPH, FIXTURE_QUERY, HashNGramEmbedder(), k=10)
        for result in results:
            for _, score in result.top_words:
                assert 0.0 <= score <= 1.0
