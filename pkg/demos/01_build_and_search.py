"""Build an index over a tiny corpus and search it at three granularities.

Walk-through:

 1. define a handful of articles in memory,
 2. expand them into retrieval units under each granularity scheme,
 3. build a BM25 index and run a query,
 4. narrow the same query with metadata filters.

Run from the repository root:

    python3 demos/01_build_and_search.py
"""

from litdex import (
    Article,
    FilterSet,
    GranularityScheme,
    build_index,
    compute_facets,
    expand_granularity,
    search,
)

# ---------------------------------------------------------------------------
# 1. A corpus small enough to reason about by hand.
# ---------------------------------------------------------------------------

ARTICLES = [
    Article(
        article_id="spike-2020",
        title="Spike protein binding in coronaviruses",
        source="pmc",
        abstract="We characterize spike protein binding affinity across strains.",
        paragraphs=(
            "Binding assays show the spike protein attaches to the ACE2 receptor.",
            "Mutations in the receptor binding domain change infection rates. "
            "We measured binding across twelve strains.",
        ),
        year=2020,
        authors=("Liu, A.", "Ng, B."),
        journal="J Virol",
    ),
    Article(
        article_id="mask-2020",
        title="Mask effectiveness for respiratory transmission",
        source="medrxiv",
        abstract="A meta-analysis of mask usage and droplet transmission.",
        paragraphs=(
            "Across 40 studies, masks reduced droplet transmission substantially.",
        ),
        year=2020,
        authors=("Cho, C.",),
        journal=None,
    ),
    Article(
        article_id="vaccine-2021",
        title="Vaccine trial outcomes",
        source="pmc",
        abstract="Phase three trial results for two vaccine candidates.",
        paragraphs=(
            "Both candidates elicited strong antibody responses.",
            "No serious adverse events were attributed to the vaccine.",
            "Efficacy against symptomatic infection exceeded ninety percent.",
        ),
        year=2021,
        authors=("Ng, B.", "Das, D."),
        journal="Lancet",
    ),
]

# ---------------------------------------------------------------------------
# 2. One article becomes several retrieval units.  Under the paragraph
#    scheme an article with n paragraphs yields n+1 units: one per
#    paragraph (each prefixed with title and abstract for context) plus a
#    title+abstract unit, so abstract-only matches still surface.
# ---------------------------------------------------------------------------

for scheme in GranularityScheme:
    units = [u for a in ARTICLES for u in expand_granularity(a, scheme)]
    print(f"{scheme.value:<11} -> {len(units):2d} units")

units = [u for a in ARTICLES for u in expand_granularity(a, GranularityScheme.PARAGRAPH_LEVEL)]
print()
print("paragraph-level unit ids:", ", ".join(u.unit_id for u in units))
print()

# ---------------------------------------------------------------------------
# 3. Build the index and search.  Scores are BM25 (k1=0.9, b=0.4); each hit
#    points at one unit, so a strong paragraph can outrank a diffuse
#    full-text match.
# ---------------------------------------------------------------------------

index = build_index(units, articles=ARTICLES)
print(f"indexed {index.n_units} units, avgdl {index.avgdl:.2f}, "
      f"{index.vocabulary_size()} distinct terms")
print()

query = "spike protein binding"
print(f"query: {query!r}")
for hit in search(index, query, k=5):
    unit = index.units[hit.unit_ordinal]
    print(f"  {hit.bm25_score:7.4f}  {unit.unit_id}")
print()

# ---------------------------------------------------------------------------
# 4. Facets summarize the matched articles; filters narrow the search.
#    Filters are conjunctive across fields and disjunctive within one.
# ---------------------------------------------------------------------------

query = "transmission infection vaccine"
hits = search(index, query, k=10)
facets = compute_facets(index, hits)
print(f"query: {query!r} matches {len({h.article_id for h in hits})} articles")
print("  year facet:  ", facets.year)
print("  source facet:", facets.source)

filtered = search(index, query, k=10, filters=FilterSet(year_from=2021))
print(f"with year_from=2021: {sorted({h.article_id for h in filtered})}")
