"""Second-stage reranking over sentence-window spans.

Each candidate unit's text is segmented into sentences and cut into
overlapping spans (a sliding window of sentences).  A pluggable scorer
assigns every span a relevance probability; an article's score is the
maximum probability over all of its spans, and articles appear once each
in the final ranking.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Protocol, Sequence

import httpx

from .corpus import SentenceSpan, segment_sentences
from .errors import ScorerUnavailable
from .index import Hit, InvertedIndex, analyze

__all__ = [
    "Span",
    "ScoredSpan",
    "RankedArticle",
    "ArticleRanking",
    "SpanScorer",
    "LexicalScorer",
    "ExternalScorer",
    "make_spans",
    "relevance_input",
    "true_false_probability",
    "score_span_lexical",
    "score_span_external",
    "rerank",
]

DEFAULT_WINDOW = 10
DEFAULT_STRIDE = 5


@dataclass(frozen=True)
class Span:
    """A window of consecutive sentences from one retrieval unit."""

    article_id: str
    unit_ordinal: int
    sentence_range: tuple[int, int]
    text: str


@dataclass(frozen=True)
class ScoredSpan:
    span: Span
    probability: float


@dataclass(frozen=True)
class RankedArticle:
    article_id: str
    score: float
    best_span: Span


@dataclass(frozen=True)
class ArticleRanking:
    """Deduplicated article ranking with retrieval metadata."""

    entries: tuple[RankedArticle, ...]
    scorer: str
    first_stage_k: int
    degraded: bool = False


class SpanScorer(Protocol):
    kind: str

    def score_spans(self, query: str, spans: Sequence[Span]) -> list[float]: ...


def make_spans(
    text: str,
    sentences: Sequence[SentenceSpan],
    article_id: str,
    unit_ordinal: int,
    window: int = DEFAULT_WINDOW,
    stride: int = DEFAULT_STRIDE,
) -> list[Span]:
    """Cut a unit's sentences into sliding-window spans.

    Window starts are 0, stride, 2*stride, ...; each span covers sentences
    [start, min(start + window, n)); generation stops after the first
    window whose end reaches the last sentence.  A unit with no sentences
    yields a single span over its raw text.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if not 1 <= stride <= window:
        raise ValueError(f"stride must be in [1, window], got {stride}")
    n = len(sentences)
    if n == 0:
        return [Span(article_id=article_id, unit_ordinal=unit_ordinal, sentence_range=(0, 0), text=text)]
    spans: list[Span] = []
    start = 0
    while True:
        end = min(start + window, n)
        spans.append(
            Span(
                article_id=article_id,
                unit_ordinal=unit_ordinal,
                sentence_range=(start, end),
                text=text[sentences[start].start_char : sentences[end - 1].end_char],
            )
        )
        if end >= n:
            return spans
        start += stride


def relevance_input(query: str, document: str) -> str:
    """The exact input string the external scorer is asked to judge."""
    return f"Query: {query} Document: {document} Relevant:"


def true_false_probability(l_true: float, l_false: float) -> float:
    """Two-way softmax over the true/false logits, stable under large values."""
    m = l_true if l_true >= l_false else l_false
    e_true = math.exp(l_true - m)
    e_false = math.exp(l_false - m)
    return e_true / (e_true + e_false)


def score_span_lexical(query: str, span: Span) -> float:
    """Deterministic lexical stand-in for the neural scorer.

    p = c / (1 + c) with c = sum over distinct query terms of
    min(tf(term, span), 3); term repetition saturates so long spans cannot
    win on repetition alone.  p is always in [0, 1).
    """
    query_terms = {token.term for token in analyze(query)}
    if not query_terms:
        return 0.0
    tf = Counter(token.term for token in analyze(span.text))
    c = sum(min(tf[term], 3) for term in query_terms if term in tf)
    return c / (1.0 + c)


class LexicalScorer:
    """Scores spans with :func:`score_span_lexical`."""

    kind = "lexical"

    def score_spans(self, query: str, spans: Sequence[Span]) -> list[float]:
        return [score_span_lexical(query, span) for span in spans]


class ExternalScorer:
    """Client for a wire-protocol relevance scorer.

    Sends batches of "Query: ... Document: ... Relevant:" inputs and turns
    the returned (true, false) logit pairs into probabilities.  Any
    transport or protocol failure raises :class:`ScorerUnavailable`.
    """

    kind = "external"

    def __init__(
        self,
        endpoint: str,
        timeout: float = 10.0,
        target_words: tuple[str, str] = ("true", "false"),
        batch_size: int = 32,
    ):
        if batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.target_words = target_words
        self.batch_size = batch_size
        self._client = httpx.Client(timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def _score_batch(self, inputs: list[str]) -> list[float]:
        try:
            response = self._client.post(
                f"{self.endpoint}/score",
                json={"inputs": inputs, "target_words": list(self.target_words)},
            )
            response.raise_for_status()
            payload = response.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise ScorerUnavailable(f"scorer at {self.endpoint}: {exc}") from exc
        logits = payload.get("logits") if isinstance(payload, dict) else None
        if not isinstance(logits, list) or len(logits) != len(inputs):
            raise ScorerUnavailable(f"scorer at {self.endpoint}: malformed logits payload")
        probabilities: list[float] = []
        for pair in logits:
            if not isinstance(pair, list) or len(pair) != 2:
                raise ScorerUnavailable(f"scorer at {self.endpoint}: malformed logit pair {pair!r}")
            try:
                l_true, l_false = float(pair[0]), float(pair[1])
            except (TypeError, ValueError) as exc:
                raise ScorerUnavailable(f"scorer at {self.endpoint}: non-numeric logits") from exc
            probabilities.append(true_false_probability(l_true, l_false))
        return probabilities

    def score_spans(self, query: str, spans: Sequence[Span]) -> list[float]:
        inputs = [relevance_input(query, span.text) for span in spans]
        out: list[float] = []
        for offset in range(0, len(inputs), self.batch_size):
            out.extend(self._score_batch(inputs[offset : offset + self.batch_size]))
        return out


def score_span_external(query: str, span: Span, scorer: ExternalScorer) -> float:
    return scorer.score_spans(query, [span])[0]


def rerank(
    query: str,
    hits: Sequence[Hit],
    index: InvertedIndex,
    scorer: SpanScorer,
    window: int = DEFAULT_WINDOW,
    stride: int = DEFAULT_STRIDE,
    first_stage_k: int | None = None,
) -> ArticleRanking:
    """Rerank first-stage hits into a deduplicated article ranking.

    Every hit unit is cut into spans and scored; an article's score is the
    max probability over all of its spans, with the argmax span kept for
    display (ties: earliest unit ordinal, then earliest start sentence).
    Articles are ordered by score descending, ties by best first-stage
    BM25 score descending, then article_id ascending.  If the scorer fails,
    all spans are rescored lexically and the ranking is marked degraded.
    """
    spans: list[Span] = []
    best_bm25: dict[str, float] = {}
    for hit in hits:
        unit = index.units[hit.unit_ordinal]
        sentences = segment_sentences(unit.text)
        spans.extend(
            make_spans(unit.text, sentences, hit.article_id, hit.unit_ordinal, window=window, stride=stride)
        )
        if hit.article_id not in best_bm25 or hit.bm25_score > best_bm25[hit.article_id]:
            best_bm25[hit.article_id] = hit.bm25_score

    degraded = False
    effective = scorer
    try:
        probabilities = scorer.score_spans(query, spans)
    except ScorerUnavailable:
        effective = LexicalScorer()
        probabilities = effective.score_spans(query, spans)
        degraded = True
    if len(probabilities) != len(spans):
        raise ValueError(f"scorer returned {len(probabilities)} scores for {len(spans)} spans")

    best: dict[str, ScoredSpan] = {}
    for span, probability in zip(spans, probabilities):
        current = best.get(span.article_id)
        if current is None or _span_beats(probability, span, current):
            best[span.article_id] = ScoredSpan(span=span, probability=probability)

    entries = [
        RankedArticle(article_id=article_id, score=scored.probability, best_span=scored.span)
        for article_id, scored in best.items()
    ]
    entries.sort(key=lambda e: (-e.score, -best_bm25[e.article_id], e.article_id))
    return ArticleRanking(
        entries=tuple(entries),
        scorer=effective.kind,
        first_stage_k=first_stage_k if first_stage_k is not None else len(hits),
        degraded=degraded,
    )


def _span_beats(probability: float, span: Span, current: ScoredSpan) -> bool:
    if probability != current.probability:
        return probability > current.probability
    challenger = (span.unit_ordinal, span.sentence_range[0])
    incumbent = (current.span.unit_ordinal, current.span.sentence_range[0])
    return challenger < incumbent
