"""Inverted index, BM25 scoring, faceted filtering, and persistence.

The index is built once over a list of retrieval units and is immutable
afterwards; queries, facet counting, and persistence never modify it, so a
single instance is safe to share across concurrent searches.

On-disk layout (one directory per index):

    meta.json      format version, scheme, BM25 parameters, stats, checksums
    units.jsonl    stored retrieval units, one JSON object per line
    postings.bin   length-prefixed postings: 32-bit term byte length, term
                   bytes (UTF-8), 32-bit posting count, then per posting a
                   varint-encoded delta of the unit ordinal followed by a
                   32-bit term frequency; all fixed-width integers little
                   endian
    articles.jsonl stored source articles (present when the index was built
                   with an article table, which the search service requires)
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .corpus import Article, GranularityScheme, RetrievalUnit
from .errors import IndexChecksumError, IndexLoadError, IndexVersionError

__all__ = [
    "STOPWORDS",
    "AnalyzedToken",
    "analyze",
    "token_spans",
    "FilterSet",
    "Hit",
    "FacetCounts",
    "InvertedIndex",
    "build_index",
    "search",
    "compute_facets",
    "save_index",
    "load_index",
]

FORMAT_VERSION = 1

STOPWORDS = frozenset(
    "a an and are as at be but by for if in into is it no not of on or such "
    "that the their then there these they this to was will with".split()
)

# Unicode-aware: a token is a maximal run of alphanumeric characters.
_TOKEN_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class AnalyzedToken:
    term: str
    position: int


def token_spans(text: str) -> list[tuple[str, int, int]]:
    """Analyzed tokens with their character offsets.

    Returns (term, start_char, end_char) triples for every surviving token,
    in text order.  The list index of a triple is the token's position.
    """
    out: list[tuple[str, int, int]] = []
    for match in _TOKEN_RE.finditer(text):
        term = match.group().lower()
        if term in STOPWORDS:
            continue
        out.append((term, match.start(), match.end()))
    return out


def analyze(text: str) -> list[AnalyzedToken]:
    """Lowercase, split on non-alphanumerics, and drop stopwords."""
    return [AnalyzedToken(term, i) for i, (term, _, _) in enumerate(token_spans(text))]


def _year_facet(year: int | None) -> str:
    return str(year) if year is not None else "unknown"


def _name_facet(value: str | None) -> str:
    return value if value is not None and value.strip() else "unknown"


@dataclass(frozen=True)
class FilterSet:
    """Facet constraints: conjunctive across fields, disjunctive within.

    Missing year or journal values fall into the "unknown" bucket, so
    journals={"unknown"} matches articles without a journal while any year
    range excludes articles without a year.
    """

    years: frozenset[int] = frozenset()
    year_from: int | None = None
    year_to: int | None = None
    authors: frozenset[str] = frozenset()
    journals: frozenset[str] = frozenset()
    sources: frozenset[str] = frozenset()

    def is_empty(self) -> bool:
        return not (
            self.years
            or self.year_from is not None
            or self.year_to is not None
            or self.authors
            or self.journals
            or self.sources
        )

    def _year_ok(self, year: int | None) -> bool:
        if self.years and (year is None or year not in self.years):
            return False
        if self.year_from is not None and (year is None or year < self.year_from):
            return False
        if self.year_to is not None and (year is None or year > self.year_to):
            return False
        return True

    def matches(self, unit: RetrievalUnit) -> bool:
        if not self._year_ok(unit.year):
            return False
        if self.authors and not self.authors.intersection(unit.authors):
            return False
        if self.journals and _name_facet(unit.journal) not in self.journals:
            return False
        if self.sources and _name_facet(unit.source) not in self.sources:
            return False
        return True


@dataclass(frozen=True)
class Hit:
    unit_ordinal: int
    bm25_score: float
    article_id: str
    paragraph_index: int | None = None


@dataclass(frozen=True)
class FacetCounts:
    """Per-facet (value, count) pairs, counts over distinct articles."""

    year: tuple[tuple[str, int], ...] = ()
    authors: tuple[tuple[str, int], ...] = ()
    journal: tuple[tuple[str, int], ...] = ()
    source: tuple[tuple[str, int], ...] = ()

    def as_dict(self) -> dict[str, list[list[object]]]:
        return {
            "year": [[v, c] for v, c in self.year],
            "authors": [[v, c] for v, c in self.authors],
            "journal": [[v, c] for v, c in self.journal],
            "source": [[v, c] for v, c in self.source],
        }


_FACET_FIELDS = ("year", "authors", "journal", "source")


class InvertedIndex:
    """Immutable BM25 index over retrieval units.

    Holds term postings as (unit_ordinal, term_frequency) lists sorted by
    ordinal, per-unit lengths, the stored units, facet maps from field and
    value to unit ordinals, and optionally the source article table.
    """

    def __init__(
        self,
        *,
        units: list[RetrievalUnit],
        postings: dict[str, list[tuple[int, int]]],
        doc_lengths: list[int],
        k1: float,
        b: float,
        scheme: GranularityScheme | None = None,
        built_at: str | None = None,
        articles: dict[str, Article] | None = None,
    ):
        self.units: tuple[RetrievalUnit, ...] = tuple(units)
        self.postings = postings
        self.doc_lengths: tuple[int, ...] = tuple(doc_lengths)
        self.k1 = float(k1)
        self.b = float(b)
        self.scheme = GranularityScheme(scheme) if scheme is not None else None
        self.built_at = built_at or _utc_now()
        self.articles = articles

        self.n_units = len(self.units)
        total = sum(self.doc_lengths)
        self.avgdl = total / self.n_units if self.n_units else 0.0
        # Precomputed BM25 length-normalization denominator term per unit.
        avgdl = self.avgdl or 1.0
        self._norms = tuple(
            self.k1 * (1.0 - self.b + self.b * dl / avgdl) for dl in self.doc_lengths
        )
        self.facet_units = self._build_facet_units()

    def _build_facet_units(self) -> dict[str, dict[str, set[int]]]:
        maps: dict[str, dict[str, set[int]]] = {f: {} for f in _FACET_FIELDS}
        for ordinal, unit in enumerate(self.units):
            maps["year"].setdefault(_year_facet(unit.year), set()).add(ordinal)
            for author in unit.authors:
                maps["authors"].setdefault(author, set()).add(ordinal)
            maps["journal"].setdefault(_name_facet(unit.journal), set()).add(ordinal)
            maps["source"].setdefault(_name_facet(unit.source), set()).add(ordinal)
        return maps

    def vocabulary_size(self) -> int:
        return len(self.postings)

    def allowed_ordinals(self, filters: FilterSet | None) -> set[int] | None:
        """Unit ordinals passing the filters, or None when unfiltered."""
        if filters is None or filters.is_empty():
            return None
        per_field: list[set[int]] = []
        if filters.years or filters.year_from is not None or filters.year_to is not None:
            matched: set[int] = set()
            for value, ordinals in self.facet_units["year"].items():
                if value == "unknown":
                    continue
                if filters._year_ok(int(value)):
                    matched |= ordinals
            per_field.append(matched)
        if filters.authors:
            amap = self.facet_units["authors"]
            per_field.append(set().union(*(amap.get(a, set()) for a in filters.authors)))
        if filters.journals:
            jmap = self.facet_units["journal"]
            per_field.append(set().union(*(jmap.get(j, set()) for j in filters.journals)))
        if filters.sources:
            smap = self.facet_units["source"]
            per_field.append(set().union(*(smap.get(s, set()) for s in filters.sources)))
        allowed = per_field[0]
        for other in per_field[1:]:
            allowed = allowed & other
        return allowed


def _utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def build_index(
    units: list[RetrievalUnit],
    k1: float = 0.9,
    b: float = 0.4,
    *,
    scheme: GranularityScheme | None = None,
    articles: list[Article] | None = None,
) -> InvertedIndex:
    """Build an immutable index over the given retrieval units.

    The optional article table is stored alongside the index so the search
    service can serve full articles and paragraph text.
    """
    if not units:
        raise ValueError("cannot build an index over an empty unit list")
    if k1 <= 0:
        raise ValueError(f"k1 must be positive, got {k1}")
    if not 0 <= b <= 1:
        raise ValueError(f"b must be in [0, 1], got {b}")
    seen: set[str] = set()
    for unit in units:
        if unit.unit_id in seen:
            raise ValueError(f"duplicate unit_id {unit.unit_id!r}")
        seen.add(unit.unit_id)

    postings: dict[str, list[tuple[int, int]]] = {}
    doc_lengths: list[int] = []
    for ordinal, unit in enumerate(units):
        counts = Counter(token.term for token in analyze(unit.text))
        doc_lengths.append(sum(counts.values()))
        for term, tf in counts.items():
            postings.setdefault(term, []).append((ordinal, tf))

    article_table = {a.article_id: a for a in articles} if articles is not None else None
    return InvertedIndex(
        units=list(units),
        postings=postings,
        doc_lengths=doc_lengths,
        k1=k1,
        b=b,
        scheme=scheme,
        articles=article_table,
    )


def search(
    index: InvertedIndex,
    query: str,
    k: int,
    filters: FilterSet | None = None,
) -> list[Hit]:
    """BM25 top-k retrieval over units passing the filters.

    score(q, d) = sum over distinct query terms t of
    qtf(t) * idf(t) * tf(t,d) * (k1 + 1) / (tf(t,d) + k1 * (1 - b + b * dl/avgdl))
    with idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)).  Ties break by
    ascending unit ordinal.  A query that analyzes to zero terms returns [].
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    query_counts = Counter(token.term for token in analyze(query))
    if not query_counts:
        return []
    allowed = index.allowed_ordinals(filters)

    scores: dict[int, float] = {}
    k1 = index.k1
    norms = index._norms
    for term, qtf in query_counts.items():
        plist = index.postings.get(term)
        if not plist:
            continue
        df = len(plist)
        idf = math.log(1.0 + (index.n_units - df + 0.5) / (df + 0.5))
        weight = qtf * idf * (k1 + 1.0)
        for ordinal, tf in plist:
            if allowed is not None and ordinal not in allowed:
                continue
            scores[ordinal] = scores.get(ordinal, 0.0) + weight * tf / (tf + norms[ordinal])

    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))[:k]
    return [
        Hit(
            unit_ordinal=ordinal,
            bm25_score=score,
            article_id=index.units[ordinal].article_id,
            paragraph_index=index.units[ordinal].paragraph_index,
        )
        for ordinal, score in ranked
    ]


def compute_facets(index: InvertedIndex, hits: list[Hit]) -> FacetCounts:
    """Facet value counts over the distinct articles among the hits.

    Articles are counted once regardless of how many of their units were
    hit; multi-valued authors increment every listed author.
    """
    first_unit: dict[str, RetrievalUnit] = {}
    for hit in hits:
        if hit.article_id not in first_unit:
            first_unit[hit.article_id] = index.units[hit.unit_ordinal]

    year: Counter[str] = Counter()
    authors: Counter[str] = Counter()
    journal: Counter[str] = Counter()
    source: Counter[str] = Counter()
    for unit in first_unit.values():
        year[_year_facet(unit.year)] += 1
        for author in unit.authors:
            authors[author] += 1
        journal[_name_facet(unit.journal)] += 1
        source[_name_facet(unit.source)] += 1

    def ranked(counter: Counter[str]) -> tuple[tuple[str, int], ...]:
        return tuple(sorted(counter.items(), key=lambda item: (-item[1], item[0])))

    return FacetCounts(
        year=ranked(year),
        authors=ranked(authors),
        journal=ranked(journal),
        source=ranked(source),
    )


# ---------------------------------------------------------------------------
# Persistence


def _encode_varint(value: int) -> bytes:
    if value < 0:
        raise ValueError("varints encode non-negative integers only")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def _decode_varint(buf: bytes, offset: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if offset >= len(buf):
            raise IndexLoadError("postings.bin: truncated varint")
        byte = buf[offset]
        offset += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, offset
        shift += 7
        if shift > 63:
            raise IndexLoadError("postings.bin: varint too long")


def _encode_postings(postings: dict[str, list[tuple[int, int]]]) -> bytes:
    out = bytearray()
    for term in sorted(postings):
        term_bytes = term.encode("utf-8")
        out += len(term_bytes).to_bytes(4, "little")
        out += term_bytes
        plist = postings[term]
        out += len(plist).to_bytes(4, "little")
        # first delta is the absolute ordinal, later deltas are gaps
        prev = 0
        for ordinal, tf in plist:
            out += _encode_varint(ordinal - prev)
            out += tf.to_bytes(4, "little")
            prev = ordinal
    return bytes(out)


def _decode_postings(buf: bytes, n_units: int) -> dict[str, list[tuple[int, int]]]:
    postings: dict[str, list[tuple[int, int]]] = {}
    offset = 0
    size = len(buf)
    while offset < size:
        if offset + 4 > size:
            raise IndexLoadError("postings.bin: truncated term header")
        term_len = int.from_bytes(buf[offset : offset + 4], "little")
        offset += 4
        if offset + term_len > size:
            raise IndexLoadError("postings.bin: truncated term")
        term = buf[offset : offset + term_len].decode("utf-8")
        offset += term_len
        if offset + 4 > size:
            raise IndexLoadError("postings.bin: truncated posting count")
        count = int.from_bytes(buf[offset : offset + 4], "little")
        offset += 4
        plist: list[tuple[int, int]] = []
        prev = 0
        for _ in range(count):
            delta, offset = _decode_varint(buf, offset)
            if offset + 4 > size:
                raise IndexLoadError("postings.bin: truncated term frequency")
            tf = int.from_bytes(buf[offset : offset + 4], "little")
            offset += 4
            ordinal = prev + delta
            if plist and ordinal <= plist[-1][0]:
                raise IndexLoadError(f"postings.bin: ordinals not increasing for term {term!r}")
            if ordinal >= n_units:
                raise IndexLoadError(f"postings.bin: ordinal {ordinal} out of range")
            plist.append((ordinal, tf))
            prev = ordinal
        if term in postings:
            raise IndexLoadError(f"postings.bin: duplicate term {term!r}")
        postings[term] = plist
    return postings


def _unit_to_obj(unit: RetrievalUnit) -> dict:
    return {
        "unit_id": unit.unit_id,
        "article_id": unit.article_id,
        "paragraph_index": unit.paragraph_index,
        "text": unit.text,
        "year": unit.year,
        "authors": list(unit.authors),
        "journal": unit.journal,
        "source": unit.source,
    }


def _unit_from_obj(obj: dict) -> RetrievalUnit:
    return RetrievalUnit(
        unit_id=obj["unit_id"],
        article_id=obj["article_id"],
        paragraph_index=obj["paragraph_index"],
        text=obj["text"],
        year=obj["year"],
        authors=tuple(obj["authors"]),
        journal=obj["journal"],
        source=obj["source"],
    )


def _article_to_obj(article: Article) -> dict:
    return {
        "article_id": article.article_id,
        "title": article.title,
        "abstract": article.abstract,
        "paragraphs": list(article.paragraphs),
        "year": article.year,
        "authors": list(article.authors),
        "journal": article.journal,
        "source": article.source,
    }


def _article_from_obj(obj: dict) -> Article:
    return Article(
        article_id=obj["article_id"],
        title=obj["title"],
        abstract=obj["abstract"],
        paragraphs=tuple(obj["paragraphs"]),
        year=obj["year"],
        authors=tuple(obj["authors"]),
        journal=obj["journal"],
        source=obj["source"],
    )


def _jsonl(rows: list[dict]) -> bytes:
    lines = [json.dumps(row, ensure_ascii=False, sort_keys=True, separators=(",", ":")) for row in rows]
    return ("\n".join(lines) + "\n" if lines else "").encode("utf-8")


def save_index(index: InvertedIndex, path: str | Path) -> None:
    """Persist the index into a directory (created if needed).

    Writing is deterministic for a given index, so save(load(save(x)))
    produces byte-identical files.
    """
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)

    units_blob = _jsonl([_unit_to_obj(u) for u in index.units])
    postings_blob = _encode_postings(index.postings)
    checksums = {
        "units.jsonl": hashlib.sha256(units_blob).hexdigest(),
        "postings.bin": hashlib.sha256(postings_blob).hexdigest(),
    }
    payloads = {"units.jsonl": units_blob, "postings.bin": postings_blob}
    if index.articles is not None:
        articles_blob = _jsonl([_article_to_obj(a) for a in index.articles.values()])
        checksums["articles.jsonl"] = hashlib.sha256(articles_blob).hexdigest()
        payloads["articles.jsonl"] = articles_blob

    meta = {
        "format_version": FORMAT_VERSION,
        "scheme": index.scheme.value if index.scheme is not None else None,
        "k1": index.k1,
        "b": index.b,
        "n_units": index.n_units,
        "avgdl": index.avgdl,
        "built_at": index.built_at,
        "checksums": checksums,
    }
    for name, blob in payloads.items():
        (directory / name).write_bytes(blob)
    (directory / "meta.json").write_text(
        json.dumps(meta, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def _read_payload(directory: Path, name: str, checksums: dict) -> bytes:
    file_path = directory / name
    if not file_path.is_file():
        raise IndexLoadError(f"missing index file: {name}")
    blob = file_path.read_bytes()
    expected = checksums.get(name)
    if expected is None:
        raise IndexLoadError(f"meta.json: no checksum recorded for {name}")
    actual = hashlib.sha256(blob).hexdigest()
    if actual != expected:
        raise IndexChecksumError(f"{name}: checksum mismatch (expected {expected}, got {actual})")
    return blob


def load_index(path: str | Path) -> InvertedIndex:
    """Load an index directory written by :func:`save_index`."""
    directory = Path(path)
    meta_path = directory / "meta.json"
    if not meta_path.is_file():
        raise IndexLoadError("missing index file: meta.json")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IndexLoadError(f"meta.json: unreadable ({exc})") from exc
    if not isinstance(meta, dict):
        raise IndexLoadError("meta.json: expected a JSON object")

    version = meta.get("format_version")
    if version != FORMAT_VERSION:
        raise IndexVersionError(f"unsupported index format version {version!r} (expected {FORMAT_VERSION})")

    checksums = meta.get("checksums")
    if not isinstance(checksums, dict):
        raise IndexLoadError("meta.json: missing checksums")

    units_blob = _read_payload(directory, "units.jsonl", checksums)
    postings_blob = _read_payload(directory, "postings.bin", checksums)

    try:
        units = [_unit_from_obj(json.loads(line)) for line in units_blob.decode("utf-8").splitlines() if line]
    except (KeyError, TypeError, ValueError) as exc:
        raise IndexLoadError(f"units.jsonl: malformed ({exc})") from exc
    if len(units) != meta.get("n_units"):
        raise IndexLoadError(f"meta.json: n_units {meta.get('n_units')!r} does not match {len(units)} stored units")

    postings = _decode_postings(postings_blob, len(units))
    doc_lengths = [0] * len(units)
    for plist in postings.values():
        for ordinal, tf in plist:
            doc_lengths[ordinal] += tf

    articles: dict[str, Article] | None = None
    if "articles.jsonl" in checksums:
        articles_blob = _read_payload(directory, "articles.jsonl", checksums)
        try:
            parsed = [_article_from_obj(json.loads(line)) for line in articles_blob.decode("utf-8").splitlines() if line]
        except (KeyError, TypeError, ValueError) as exc:
            raise IndexLoadError(f"articles.jsonl: malformed ({exc})") from exc
        articles = {a.article_id: a for a in parsed}

    index = InvertedIndex(
        units=units,
        postings=postings,
        doc_lengths=doc_lengths,
        k1=meta.get("k1", 0.9),
        b=meta.get("b", 0.4),
        scheme=meta.get("scheme"),
        built_at=meta.get("built_at"),
        articles=articles,
    )
    if not math.isclose(index.avgdl, float(meta.get("avgdl", index.avgdl)), rel_tol=1e-9, abs_tol=1e-9):
        raise IndexLoadError("meta.json: avgdl does not match stored postings")
    return index
