"""Second-stage reranking and unsupervised sentence highlighting.

Walk-through:

 1. cut a long retrieval unit into overlapping sentence windows (spans),
 2. score spans against a query and aggregate to article level,
 3. rerank first-stage BM25 hits end to end,
 4. pick the most query-relevant sentence of a paragraph to highlight.

Run from the repository root:

    python3 demos/02_rerank_and_highlight.py
"""

from litdex import (
    Article,
    GranularityScheme,
    HashNGramEmbedder,
    LexicalScorer,
    build_index,
    expand_granularity,
    make_spans,
    rerank,
    search,
    segment_sentences,
    select_highlights,
)

# ---------------------------------------------------------------------------
# 1. Spans: windows of 10 sentences advancing by 5.  A 13-sentence unit
#    yields windows over sentences [0,10), [5,13) - generation stops at the
#    first window that reaches the end.
# ---------------------------------------------------------------------------

long_text = " ".join(f"Sentence number {i} talks about incubation." for i in range(13))
sentences = segment_sentences(long_text)
spans = make_spans(long_text, sentences, article_id="demo", unit_ordinal=0)
print(f"{len(sentences)} sentences -> {len(spans)} spans:")
for span in spans:
    start, end = span.sentence_range
    print(f"  sentences [{start:2d}, {end:2d})  {len(span.text)} chars")
print()

# ---------------------------------------------------------------------------
# 2. Each span gets a relevance probability.  The built-in lexical scorer
#    is a deterministic stand-in for an external neural backend: spans
#    covering more query terms score higher.  An article's score is the
#    maximum over all of its spans.
# ---------------------------------------------------------------------------

scorer = LexicalScorer()
query = "incubation period distribution"
for span, p in zip(spans, scorer.score_spans(query, spans)):
    print(f"  span {span.sentence_range}: p = {p:.4f}")
print()

# ---------------------------------------------------------------------------
# 3. End to end: BM25 candidates, span scoring, max aggregation, dedup.
# ---------------------------------------------------------------------------

articles = [
    Article(
        article_id="incubation-study",
        title="Incubation period of emerging infections",
        source="pmc",
        abstract="We estimate incubation period distributions from case data.",
        paragraphs=(
            "The mean incubation period was 5.2 days. The distribution was "
            "right-skewed. Some cases exceeded fourteen days.",
            "Quarantine policies should reflect the tail of the distribution.",
        ),
        year=2020,
    ),
    Article(
        article_id="transmission-review",
        title="Transmission routes reviewed",
        source="pmc",
        abstract="A review of droplet and aerosol transmission evidence.",
        paragraphs=("Aerosol transmission dominates in enclosed spaces.",),
        year=2020,
    ),
]
units = [u for a in articles for u in expand_granularity(a, GranularityScheme.PARAGRAPH_LEVEL)]
index = build_index(units, articles=articles)

hits = search(index, query, k=10)
ranking = rerank(query, hits, index, scorer)
print(f"query: {query!r}")
for entry in ranking.entries:
    print(f"  {entry.score:.4f}  {entry.article_id}  "
          f"(best span: unit {entry.best_span.unit_ordinal}, "
          f"sentences {entry.best_span.sentence_range})")
print()

# ---------------------------------------------------------------------------
# 4. Highlighting: every paragraph token is embedded with a hashed
#    character-n-gram embedder; a token's salience is its best cosine
#    against the query tokens, and the sentence whose members carry the
#    most salience wins.  No training, no external calls.
# ---------------------------------------------------------------------------

paragraph = articles[0].paragraphs[0]
results, degraded = select_highlights(paragraph, query, HashNGramEmbedder())
highlight = results[0]
span = highlight.sentence_span
print(f"paragraph: {paragraph!r}")
print(f"highlight: sentence {highlight.sentence_index}, "
      f"chars [{span.start_char}, {span.end_char})")
print(f"  -> {paragraph[span.start_char:span.end_char]!r}")
print(f"  salient words: {[w for w, _ in highlight.top_words]}")
print(f"  degraded: {degraded}")
