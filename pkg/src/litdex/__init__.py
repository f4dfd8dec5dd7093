"""litdex: multi-stage search over scientific-article corpora.

Pipeline: paragraph-granularity BM25 retrieval, sliding-window span
reranking with pluggable relevance scorers, article-level max aggregation
with deduplication, and unsupervised salient-sentence highlighting, plus a
faceted HTTP search service and operator CLI on top.
"""

from __future__ import annotations

from .corpus import (
    Article,
    GranularityScheme,
    RetrievalUnit,
    SentenceSpan,
    expand_granularity,
    parse_corpus,
    segment_sentences,
)
from .errors import (
    ConfigError,
    CorpusError,
    EmbedderUnavailable,
    IndexChecksumError,
    IndexLoadError,
    IndexVersionError,
    LitdexError,
    ScorerUnavailable,
)
from .highlight import (
    ExternalEmbedder,
    HashNGramEmbedder,
    HighlightResult,
    embed_tokens,
    select_highlights,
    token_salience,
)
from .index import (
    STOPWORDS,
    AnalyzedToken,
    FacetCounts,
    FilterSet,
    Hit,
    InvertedIndex,
    analyze,
    build_index,
    compute_facets,
    load_index,
    save_index,
    search,
)
from .pipeline import SearchOptions, run_search
from .rerank import (
    ArticleRanking,
    ExternalScorer,
    LexicalScorer,
    RankedArticle,
    ScoredSpan,
    Span,
    make_spans,
    relevance_input,
    rerank,
    score_span_lexical,
    true_false_probability,
)
from .service import ServiceConfig, create_app, load_config

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # corpus
    "Article",
    "GranularityScheme",
    "RetrievalUnit",
    "SentenceSpan",
    "parse_corpus",
    "expand_granularity",
    "segment_sentences",
    # index
    "STOPWORDS",
    "AnalyzedToken",
    "analyze",
    "FilterSet",
    "Hit",
    "FacetCounts",
    "InvertedIndex",
    "build_index",
    "search",
    "compute_facets",
    "save_index",
    "load_index",
    # rerank
    "Span",
    "ScoredSpan",
    "RankedArticle",
    "ArticleRanking",
    "LexicalScorer",
    "ExternalScorer",
    "make_spans",
    "relevance_input",
    "true_false_probability",
    "score_span_lexical",
    "rerank",
    # highlight
    "HashNGramEmbedder",
    "ExternalEmbedder",
    "HighlightResult",
    "embed_tokens",
    "token_salience",
    "select_highlights",
    # pipeline and service
    "SearchOptions",
    "run_search",
    "ServiceConfig",
    "load_config",
    "create_app",
    # errors
    "LitdexError",
    "CorpusError",
    "IndexLoadError",
    "IndexVersionError",
    "IndexChecksumError",
    "ScorerUnavailable",
    "EmbedderUnavailable",
    "ConfigError",
]
