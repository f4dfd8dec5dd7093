"""Shared fixtures: a small hand-written corpus and a built index."""

from __future__ import annotations

import json

import pytest

from litdex import Article, GranularityScheme, build_index, expand_granularity

DESK_ARTICLES = [
    Article(
        article_id="a1",
        title="Coronavirus transmission dynamics",
        source="pmc",
        abstract="How the virus spreads between hosts.",
        paragraphs=(
            "The incubation period lasted five days in most cases. Community spread was rapid.",
            "Hand washing reduces transmission risk. Masks help in crowded rooms.",
        ),
        year=2020,
        authors=("Liu, A.", "Ng, B."),
        journal="J Virol",
    ),
    Article(
        article_id="a2",
        title="Bat reservoir ecology",
        source="biorxiv",
        abstract="Bats host many coronaviruses without symptoms.",
        paragraphs=(),
        year=2019,
        authors=("Cho, C.",),
        journal=None,
    ),
    Article(
        article_id="a3",
        title="Vaccine trial outcomes",
        source="medrxiv",
        abstract="A phase two vaccine trial with antibody measurements.",
        paragraphs=(
            "Antibody levels rose after the second dose. Side effects were mild.",
            "The trial enrolled patients across nine sites. Follow up lasted a year.",
            "Efficacy against transmission was not measured directly.",
        ),
        year=2021,
        authors=("Ng, B.", "Das, D."),
        journal="Lancet",
    ),
    Article(
        article_id="a4",
        title="Viral genome sequencing methods",
        source="pmc",
        abstract="",
        paragraphs=("Nanopore sequencing recovered complete genomes from swabs.",),
        year=None,
        authors=(),
        journal="Nature Med",
    ),
]


def corpus_line(article: Article) -> dict:
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


@pytest.fixture()
def desk_articles() -> list[Article]:
    return list(DESK_ARTICLES)


@pytest.fixture()
def desk_corpus_path(tmp_path, desk_articles):
    path = tmp_path / "corpus.jsonl"
    lines = [json.dumps(corpus_line(a), ensure_ascii=False) for a in desk_articles]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture()
def desk_index(desk_articles):
    units = [
        unit
        for article in desk_articles
        for unit in expand_granularity(article, GranularityScheme.PARAGRAPH_LEVEL)
    ]
    return build_index(units, scheme=GranularityScheme.PARAGRAPH_LEVEL, articles=desk_articles)
