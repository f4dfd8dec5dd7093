"""Shared query pipeline: retrieve, rerank, facet, highlight, serialize.

Both the CLI search command and the HTTP service call :func:`run_search`,
so their JSON outputs are identical for identical parameters (the service
adds only timing, which is excluded from that equality).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from time import perf_counter

from .corpus import Article
from .errors import LitdexError
from .highlight import EmbeddingProvider, HashNGramEmbedder, select_highlights
from .index import FilterSet, Hit, InvertedIndex, compute_facets, search
from .rerank import LexicalScorer, SpanScorer, rerank

__all__ = ["SearchOptions", "run_search"]

MAX_FIRST_STAGE_K = 10000


@dataclass(frozen=True)
class SearchOptions:
    """Validated parameters for one search execution."""

    query: str
    filters: FilterSet = field(default_factory=FilterSet)
    k_first_stage: int = 96
    max_results: int = 20
    rerank: bool = True
    highlight_k: int = 10

    def validate(self) -> None:
        if not self.query.strip():
            raise ValueError("query must be non-empty")
        if not 1 <= self.max_results <= self.k_first_stage <= MAX_FIRST_STAGE_K:
            raise ValueError(
                "expected 1 <= max_results <= k_first_stage <= "
                f"{MAX_FIRST_STAGE_K}, got max_results={self.max_results} "
                f"k_first_stage={self.k_first_stage}"
            )
        if self.highlight_k < 1:
            raise ValueError(f"highlight_k must be >= 1, got {self.highlight_k}")


@dataclass(frozen=True)
class _Candidate:
    article_id: str
    score: float
    unit_ordinal: int


def _dedupe_by_article(hits: list[Hit], max_results: int) -> list[_Candidate]:
    # Hits arrive sorted by BM25 score; the first hit per article is its
    # best, so first-seen order is article-best-score order.
    out: list[_Candidate] = []
    seen: set[str] = set()
    for hit in hits:
        if hit.article_id in seen:
            continue
        seen.add(hit.article_id)
        out.append(_Candidate(article_id=hit.article_id, score=hit.bm25_score, unit_ordinal=hit.unit_ordinal))
        if len(out) == max_results:
            break
    return out


def run_search(
    index: InvertedIndex,
    options: SearchOptions,
    scorer: SpanScorer | None = None,
    provider: EmbeddingProvider | None = None,
) -> dict:
    """Execute one search and return the response body as a plain dict.

    Facet counts are computed over the first-stage hits (pre-rerank) so
    they describe the candidate pool, not just the page of results.  The
    returned dict is JSON-ready; "degraded" is True when any external
    backend failed and a deterministic fallback answered.
    """
    options.validate()
    if index.articles is None:
        raise LitdexError("index was built without an article table; rebuild it from a corpus file")
    if scorer is None:
        scorer = LexicalScorer()
    if provider is None:
        provider = HashNGramEmbedder()

    start_total = perf_counter()
    hits = search(index, options.query, options.k_first_stage, options.filters)
    retrieval_ms = (perf_counter() - start_total) * 1000.0

    facets = compute_facets(index, hits)

    degraded = False
    rerank_ms = 0.0
    candidates: list[_Candidate]
    if options.rerank:
        start = perf_counter()
        ranking = rerank(options.query, hits, index, scorer, first_stage_k=options.k_first_stage)
        rerank_ms = (perf_counter() - start) * 1000.0
        degraded = degraded or ranking.degraded
        candidates = [
            _Candidate(article_id=e.article_id, score=e.score, unit_ordinal=e.best_span.unit_ordinal)
            for e in ranking.entries[: options.max_results]
        ]
    else:
        candidates = _dedupe_by_article(hits, options.max_results)

    start = perf_counter()
    results = []
    for candidate in candidates:
        article = index.articles.get(candidate.article_id)
        if article is None:
            raise LitdexError(f"stored article table is missing article {candidate.article_id!r}")
        unit = index.units[candidate.unit_ordinal]
        paragraph_index = unit.paragraph_index
        paragraph = article.paragraphs[paragraph_index] if paragraph_index is not None else None

        highlight = None
        if paragraph is not None:
            highlights, hl_degraded = select_highlights(
                paragraph, options.query, provider, k=options.highlight_k, max_sentences=1
            )
            if hl_degraded:
                degraded = True
                # stop re-probing a dead backend for the remaining results
                provider = HashNGramEmbedder()
            if highlights:
                top = highlights[0]
                highlight = {
                    "sentence_index": top.sentence_index,
                    "start_char": top.sentence_span.start_char,
                    "end_char": top.sentence_span.end_char,
                }
        results.append(_result_item(article, candidate.score, paragraph, paragraph_index, highlight))
    highlight_ms = (perf_counter() - start) * 1000.0
    total_ms = (perf_counter() - start_total) * 1000.0

    return {
        "results": results,
        "facets": facets.as_dict(),
        "timing": {
            "retrieval_ms": round(retrieval_ms, 3),
            "rerank_ms": round(rerank_ms, 3),
            "highlight_ms": round(highlight_ms, 3),
            "total_ms": round(total_ms, 3),
        },
        "degraded": degraded,
    }


def _result_item(
    article: Article,
    score: float,
    paragraph: str | None,
    paragraph_index: int | None,
    highlight: dict | None,
) -> dict:
    return {
        "article_id": article.article_id,
        "title": article.title,
        "year": article.year,
        "authors": list(article.authors),
        "journal": article.journal,
        "source": article.source,
        "abstract": article.abstract,
        "score": score,
        "paragraph": paragraph,
        "paragraph_index": paragraph_index,
        "highlight": highlight,
    }
