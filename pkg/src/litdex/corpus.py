"""Corpus ingestion and retrieval-unit expansion.

Articles arrive as JSONL, one object per line.  Before indexing, each
article is expanded into one or more retrievable units according to a
granularity scheme; retrieval quality differences between schemes come
almost entirely from how much text each unit carries.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import CorpusError

__all__ = [
    "Article",
    "GranularityScheme",
    "RetrievalUnit",
    "SentenceSpan",
    "parse_corpus",
    "expand_granularity",
    "segment_sentences",
]


class GranularityScheme(str, enum.Enum):
    """How an article is cut into retrievable units."""

    ABSTRACT_ONLY = "abstract"
    FULL_TEXT_MONOLITHIC = "monolithic"
    PARAGRAPH_LEVEL = "paragraph"


@dataclass(frozen=True)
class Article:
    """One scientific article as parsed from the corpus file."""

    article_id: str
    title: str
    source: str
    abstract: str = ""
    paragraphs: tuple[str, ...] = ()
    year: int | None = None
    authors: tuple[str, ...] = ()
    journal: str | None = None


@dataclass(frozen=True)
class RetrievalUnit:
    """One indexable unit of text plus a snapshot of its article's facets."""

    unit_id: str
    article_id: str
    text: str
    paragraph_index: int | None = None
    year: int | None = None
    authors: tuple[str, ...] = ()
    journal: str | None = None
    source: str = ""


@dataclass(frozen=True)
class SentenceSpan:
    """Character range [start_char, end_char) of one sentence."""

    start_char: int
    end_char: int


def _require(condition: bool, message: str, line: int) -> None:
    if not condition:
        raise CorpusError(message, line=line)


def _string_list(value: object, field: str, line: int) -> tuple[str, ...]:
    _require(isinstance(value, list), f"field {field!r} must be a list of strings", line)
    for item in value:  # type: ignore[union-attr]
        _require(isinstance(item, str), f"field {field!r} must contain only strings", line)
    return tuple(value)  # type: ignore[arg-type]


def _article_from_obj(obj: object, line: int) -> Article:
    _require(isinstance(obj, dict), "each line must be a JSON object", line)
    assert isinstance(obj, dict)

    article_id = obj.get("article_id")
    _require(isinstance(article_id, str) and article_id != "", "field 'article_id' must be a non-empty string", line)

    title = obj.get("title")
    _require(isinstance(title, str), "field 'title' must be a string", line)

    source = obj.get("source")
    _require(isinstance(source, str), "field 'source' must be a string", line)

    abstract = obj.get("abstract", "")
    _require(isinstance(abstract, str), "field 'abstract' must be a string", line)

    raw_paragraphs = obj.get("paragraphs", [])
    paragraphs = _string_list(raw_paragraphs, "paragraphs", line)
    # Whitespace-only paragraphs carry no indexable text; drop them here so
    # every downstream paragraph index refers to a real paragraph.
    paragraphs = tuple(p for p in paragraphs if p.strip())

    year = obj.get("year")
    if year is not None:
        _require(isinstance(year, int) and not isinstance(year, bool), "field 'year' must be an integer or null", line)

    authors = _string_list(obj.get("authors", []), "authors", line)
    authors = tuple(a.strip() for a in authors if a.strip())

    journal = obj.get("journal")
    if journal is not None:
        _require(isinstance(journal, str), "field 'journal' must be a string or null", line)

    return Article(
        article_id=article_id,
        title=title,
        source=source,
        abstract=abstract,
        paragraphs=paragraphs,
        year=year,
        authors=authors,
        journal=journal,
    )


def parse_corpus(path: str | Path) -> list[Article]:
    """Parse a JSONL corpus file into articles.

    Blank lines are skipped.  Malformed JSON, schema violations, and
    duplicate article ids raise :class:`CorpusError` with the offending
    line number.
    """
    articles: list[Article] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"malformed JSON: {exc.msg}", line=lineno) from exc
            article = _article_from_obj(obj, lineno)
            if article.article_id in seen:
                raise CorpusError(f"duplicate article_id {article.article_id!r}", line=lineno)
            seen.add(article.article_id)
            articles.append(article)
    return articles


def _joined(parts: Iterable[str]) -> str:
    return "\n".join(p for p in parts if p)


def expand_granularity(article: Article, scheme: GranularityScheme) -> list[RetrievalUnit]:
    """Expand one article into retrievable units under the given scheme.

    Abstract-only yields a single title+abstract unit.  Monolithic yields a
    single unit holding all of the article's text.  Paragraph-level yields
    the title+abstract unit plus one unit per paragraph, each repeating the
    title and abstract so paragraph units stay self-contained; an article
    with n paragraphs therefore yields n + 1 units.
    """
    scheme = GranularityScheme(scheme)
    common = dict(
        article_id=article.article_id,
        year=article.year,
        authors=article.authors,
        journal=article.journal,
        source=article.source,
    )
    if scheme is GranularityScheme.ABSTRACT_ONLY:
        return [
            RetrievalUnit(
                unit_id=f"{article.article_id}#ta",
                text=_joined((article.title, article.abstract)),
                paragraph_index=None,
                **common,
            )
        ]
    if scheme is GranularityScheme.FULL_TEXT_MONOLITHIC:
        return [
            RetrievalUnit(
                unit_id=f"{article.article_id}#full",
                text=_joined((article.title, article.abstract, *article.paragraphs)),
                paragraph_index=None,
                **common,
            )
        ]
    units = [
        RetrievalUnit(
            unit_id=f"{article.article_id}#ta",
            text=_joined((article.title, article.abstract)),
            paragraph_index=None,
            **common,
        )
    ]
    for i, paragraph in enumerate(article.paragraphs):
        units.append(
            RetrievalUnit(
                unit_id=f"{article.article_id}#p{i}",
                text=_joined((article.title, article.abstract, paragraph)),
                paragraph_index=i,
                **common,
            )
        )
    return units


# Sentence segmentation is rule based: a terminator ends a sentence only
# when followed by whitespace and then an uppercase letter, a digit, or an
# opening quote or bracket.  A short abbreviation guard list suppresses the
# most common false splits in scientific prose.
_TERMINATORS = frozenset(".?!")
_OPENERS = frozenset("\"'“‘([{«")
_ABBREVIATIONS = ("et al", "e.g", "i.e", "fig", "dr", "vs", "approx", "no")


def _is_abbreviation(text: str, dot_index: int) -> bool:
    lowered = text[:dot_index].lower()
    for abbrev in _ABBREVIATIONS:
        if not lowered.endswith(abbrev):
            continue
        before = dot_index - len(abbrev) - 1
        if before < 0 or not text[before].isalnum():
            return True
    return False


def _trimmed_span(text: str, start: int, end: int) -> SentenceSpan | None:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if start == end:
        return None
    return SentenceSpan(start_char=start, end_char=end)


def segment_sentences(text: str) -> list[SentenceSpan]:
    """Split text into sentence character spans.

    Spans are sorted, non-overlapping, and trimmed of edge whitespace;
    joining the trimmed spans with the whitespace between them restores
    the input.  Whitespace-only text yields no spans.
    """
    n = len(text)
    breaks: list[int] = []
    for i, ch in enumerate(text):
        if ch not in _TERMINATORS:
            continue
        j = i + 1
        if j >= n or not text[j].isspace():
            continue
        while j < n and text[j].isspace():
            j += 1
        if j >= n:
            continue
        follower = text[j]
        if not (follower.isupper() or follower.isdigit() or follower in _OPENERS):
            continue
        if ch == "." and _is_abbreviation(text, i):
            continue
        breaks.append(i + 1)

    spans: list[SentenceSpan] = []
    prev = 0
    for boundary in [*breaks, n]:
        span = _trimmed_span(text, prev, boundary)
        if span is not None:
            spans.append(span)
        prev = boundary
    return spans
