"""Unsupervised salient-sentence selection for result snippets.

Query and context tokens are embedded; each context token's salience is
its best cosine similarity to any query token.  The top-K context tokens
pick the sentences to highlight.  The built-in embedder hashes character
n-grams into deterministic sign vectors, so highlighting needs no model
backend and is reproducible everywhere.
"""

from __future__ import annotations

import hashlib
from bisect import bisect_right
from dataclasses import dataclass
from typing import Protocol, Sequence

import httpx
import numpy as np

from .corpus import SentenceSpan, segment_sentences
from .errors import EmbedderUnavailable
from .index import analyze, token_spans

__all__ = [
    "EmbeddingProvider",
    "HashNGramEmbedder",
    "ExternalEmbedder",
    "HighlightResult",
    "embed_tokens",
    "token_salience",
    "select_highlights",
]

DIMENSION = 64
NGRAM_ORDERS = (3, 4, 5)


class EmbeddingProvider(Protocol):
    kind: str

    def embed(self, tokens: Sequence[str]) -> np.ndarray: ...


@dataclass(frozen=True)
class HighlightResult:
    """One highlighted sentence within a paragraph."""

    sentence_index: int
    sentence_span: SentenceSpan
    salience: float
    top_words: tuple[tuple[str, float], ...]


def _ngram_sign_vector(gram: str) -> np.ndarray:
    # Stable 64-bit seed from the n-gram; the rng then yields a +-1 vector.
    seed = int.from_bytes(hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest(), "little")
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=DIMENSION).astype(np.float64) * 2.0 - 1.0


class HashNGramEmbedder:
    """Deterministic character n-gram hashing embedder.

    A token is wrapped in boundary markers '^' and '$', decomposed into
    character n-grams of orders 3 to 5, and embedded as the L2-normalized
    sum of per-n-gram sign vectors.  Equal tokens always map to equal
    vectors; tokens sharing n-grams land closer than disjoint ones.
    """

    kind = "hash_ngram"
    dimension = DIMENSION

    def __init__(self):
        self._gram_cache: dict[str, np.ndarray] = {}
        self._token_cache: dict[str, np.ndarray] = {}

    def _gram_vector(self, gram: str) -> np.ndarray:
        vec = self._gram_cache.get(gram)
        if vec is None:
            vec = _ngram_sign_vector(gram)
            self._gram_cache[gram] = vec
        return vec

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._token_cache.get(token)
        if vec is not None:
            return vec
        decorated = f"^{token}$"
        total = np.zeros(DIMENSION)
        for order in NGRAM_ORDERS:
            for i in range(len(decorated) - order + 1):
                total += self._gram_vector(decorated[i : i + order])
        norm = float(np.linalg.norm(total))
        vec = total / norm if norm > 0.0 else total
        self._token_cache[token] = vec
        return vec

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        if not tokens:
            return np.zeros((0, DIMENSION))
        return np.stack([self._token_vector(token) for token in tokens])


class ExternalEmbedder:
    """Client for a wire-protocol token encoder.

    Vectors are L2-normalized locally, so the backend need not normalize.
    Any transport or protocol failure raises :class:`EmbedderUnavailable`.
    """

    kind = "external"

    def __init__(self, endpoint: str, timeout: float = 10.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self._client = httpx.Client(timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        if not tokens:
            return np.zeros((0, 0))
        try:
            response = self._client.post(f"{self.endpoint}/embed", json={"tokens": list(tokens)})
            response.raise_for_status()
            payload = response.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise EmbedderUnavailable(f"embedder at {self.endpoint}: {exc}") from exc
        vectors = payload.get("vectors") if isinstance(payload, dict) else None
        if not isinstance(vectors, list) or len(vectors) != len(tokens):
            raise EmbedderUnavailable(f"embedder at {self.endpoint}: malformed vectors payload")
        try:
            matrix = np.asarray(vectors, dtype=np.float64)
        except ValueError as exc:
            raise EmbedderUnavailable(f"embedder at {self.endpoint}: non-numeric vectors") from exc
        if matrix.ndim != 2:
            raise EmbedderUnavailable(f"embedder at {self.endpoint}: expected a vector per token")
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return matrix / norms


# Shared fallback for degraded external embedding; its caches only ever
# hold deterministic values, so concurrent use is safe.
_FALLBACK = HashNGramEmbedder()


def embed_tokens(provider: EmbeddingProvider, tokens: Sequence[str]) -> np.ndarray:
    """One unit-norm vector per token, as a (len(tokens), dim) array."""
    return provider.embed(tokens)


def token_salience(query_vecs: np.ndarray, context_vecs: np.ndarray) -> np.ndarray:
    """Max cosine similarity of each context token to any query token.

    Inputs are unit-norm rows, so cosine is a dot product.  Scores are
    clipped into [0, 1]; with no query vectors all scores are 0.
    """
    n_context = context_vecs.shape[0] if context_vecs.ndim == 2 else 0
    if n_context == 0 or query_vecs.ndim != 2 or query_vecs.shape[0] == 0:
        return np.zeros(n_context)
    sims = context_vecs @ query_vecs.T
    return np.clip(sims.max(axis=1), 0.0, 1.0)


def select_highlights(
    paragraph: str,
    query: str,
    provider: EmbeddingProvider,
    k: int = 10,
    max_sentences: int = 1,
) -> tuple[list[HighlightResult], bool]:
    """Pick the most salient sentence(s) of a paragraph for a query.

    The K highest-salience context token occurrences (ties: earlier
    position wins) are attributed to their sentences; a sentence scores the
    sum of its selected tokens' saliences.  Returns up to max_sentences
    sentences with positive score, sorted by score descending then sentence
    index ascending, plus a flag that is True when an external provider
    failed and the built-in embedder answered instead.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if max_sentences < 1:
        raise ValueError(f"max_sentences must be >= 1, got {max_sentences}")

    occurrences = token_spans(paragraph)
    query_terms = list(dict.fromkeys(token.term for token in analyze(query)))
    if not occurrences or not query_terms:
        return [], False

    context_terms = list(dict.fromkeys(term for term, _, _ in occurrences))
    degraded = False
    try:
        query_vecs = provider.embed(query_terms)
        context_vecs = provider.embed(context_terms)
    except EmbedderUnavailable:
        query_vecs = _FALLBACK.embed(query_terms)
        context_vecs = _FALLBACK.embed(context_terms)
        degraded = True

    term_salience = dict(zip(context_terms, token_salience(query_vecs, context_vecs)))
    saliences = [float(term_salience[term]) for term, _, _ in occurrences]
    top = sorted(range(len(occurrences)), key=lambda i: (-saliences[i], i))[:k]

    sentences = segment_sentences(paragraph)
    if not sentences:
        return [], degraded
    starts = [span.start_char for span in sentences]
    scores = [0.0] * len(sentences)
    words: list[list[tuple[str, float]]] = [[] for _ in sentences]
    for i in sorted(top):
        term, start_char, _ = occurrences[i]
        sentence_index = bisect_right(starts, start_char) - 1
        if sentence_index < 0 or start_char >= sentences[sentence_index].end_char:
            continue
        scores[sentence_index] += saliences[i]
        words[sentence_index].append((term, saliences[i]))

    results = [
        HighlightResult(
            sentence_index=index,
            sentence_span=sentences[index],
            salience=scores[index],
            top_words=tuple(_dedupe_words(words[index])),
        )
        for index in range(len(sentences))
        if scores[index] > 0.0
    ]
    results.sort(key=lambda r: (-r.salience, r.sentence_index))
    return results[:max_sentences], degraded


def _dedupe_words(pairs: list[tuple[str, float]]) -> list[tuple[str, float]]:
    seen: set[str] = set()
    out: list[tuple[str, float]] = []
    for term, salience in sorted(pairs, key=lambda p: -p[1]):
        if term not in seen:
            seen.add(term)
            out.append((term, salience))
    return out
