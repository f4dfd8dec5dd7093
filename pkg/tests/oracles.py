"""Independent reference implementations the real code is tested against.

Everything here favors obviousness over speed: plain loops, no shared code
with the package beyond the analyze() tokenization contract, which both
sides must agree on by definition.
"""

from __future__ import annotations

import math
from collections import Counter

from litdex import analyze


def bm25_rank(
    unit_texts: list[str],
    query: str,
    k1: float = 0.9,
    b: float = 0.4,
    allowed: set[int] | None = None,
) -> list[tuple[int, float]]:
    """Brute-force BM25: loop over every unit and apply the formula."""
    docs = [Counter(t.term for t in analyze(text)) for text in unit_texts]
    lengths = [sum(counts.values()) for counts in docs]
    n = len(docs)
    avgdl = sum(lengths) / n if n else 0.0
    query_counts = Counter(t.term for t in analyze(query))

    df = {term: sum(1 for d in docs if term in d) for term in query_counts}
    scored: list[tuple[int, float]] = []
    for i, doc in enumerate(docs):
        if allowed is not None and i not in allowed:
            continue
        score = 0.0
        matched = False
        for term, qtf in query_counts.items():
            tf = doc.get(term, 0)
            if tf == 0:
                continue
            matched = True
            idf = math.log(1.0 + (n - df[term] + 0.5) / (df[term] + 0.5))
            denominator = tf + k1 * (1.0 - b + b * lengths[i] / (avgdl if avgdl else 1.0))
            score += qtf * idf * tf * (k1 + 1.0) / denominator
        if matched:
            scored.append((i, score))
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored


def facet_counts(article_facets: dict[str, tuple]) -> dict[str, list[tuple[str, int]]]:
    """Brute-force group-by over per-article facet tuples.

    article_facets maps article_id -> (year, authors, journal, source).
    """
    year: Counter[str] = Counter()
    authors: Counter[str] = Counter()
    journal: Counter[str] = Counter()
    source: Counter[str] = Counter()
    for _, (y, a_list, j, s) in article_facets.items():
        year[str(y) if y is not None else "unknown"] += 1
        for a in a_list:
            authors[a] += 1
        journal[j if j is not None and j.strip() else "unknown"] += 1
        source[s if s is not None and s.strip() else "unknown"] += 1

    def ranked(counter: Counter[str]) -> list[tuple[str, int]]:
        return sorted(counter.items(), key=lambda pair: (-pair[1], pair[0]))

    return {
        "year": ranked(year),
        "authors": ranked(authors),
        "journal": ranked(journal),
        "source": ranked(source),
    }


def window_spans(n_sentences: int, window: int = 10, stride: int = 5) -> list[tuple[int, int]]:
    """Closed-form window enumeration from the stop rule.

    The number of windows is 1 if n <= window else 1 + ceil((n - window) / stride),
    and window i covers [i*stride, min(i*stride + window, n)).
    """
    if n_sentences == 0:
        return [(0, 0)]
    if n_sentences <= window:
        count = 1
    else:
        count = 1 + math.ceil((n_sentences - window) / stride)
    return [(i * stride, min(i * stride + window, n_sentences)) for i in range(count)]


def cosine(u: list[float], v: list[float]) -> float:
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def cosine_matrix(rows_a: list[list[float]], rows_b: list[list[float]]) -> list[list[float]]:
    return [[cosine(u, v) for v in rows_b] for u in rows_a]


def max_aggregate(
    scored_spans: list[tuple[str, int, int, float]],
) -> dict[str, tuple[float, tuple[int, int]]]:
    """Brute-force article aggregation over (article_id, unit_ordinal,
    start_sentence, probability) records.

    Returns article_id -> (max probability, argmax (unit_ordinal, start))
    with ties going to the earliest unit ordinal, then earliest start.
    """
    best: dict[str, tuple[float, tuple[int, int]]] = {}
    for article_id, unit_ordinal, start, probability in scored_spans:
        key = (unit_ordinal, start)
        if article_id not in best:
            best[article_id] = (probability, key)
            continue
        current_p, current_key = best[article_id]
        if probability > current_p or (probability == current_p and key < current_key):
            best[article_id] = (probability, key)
    return best
