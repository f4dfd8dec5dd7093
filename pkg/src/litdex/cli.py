"""Operator command line: build indexes, search, compare schemes, serve.

Exit codes: 0 success, 1 user or input error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .corpus import Article, GranularityScheme, expand_granularity, parse_corpus
from .errors import IndexLoadError, LitdexError
from .index import FilterSet, InvertedIndex, build_index, load_index, save_index, search
from .pipeline import SearchOptions, run_search
from .rerank import ExternalScorer, LexicalScorer

__all__ = ["main"]

_SCHEME_CHOICES = [s.value for s in GranularityScheme]


class _UserError(LitdexError):
    """A problem the operator can fix; exits with code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 by default; we reserve 2 for bugs
        self.print_usage(sys.stderr)
        raise _UserError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="litdex", description="Search over scientific-article corpora.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="build an index from a JSONL corpus")
    p_build.add_argument("--input", required=True, help="corpus JSONL file")
    p_build.add_argument("--scheme", default=GranularityScheme.PARAGRAPH_LEVEL.value, choices=_SCHEME_CHOICES)
    p_build.add_argument("--out", required=True, help="index output directory")
    p_build.add_argument("--k1", type=float, default=0.9)
    p_build.add_argument("--b", type=float, default=0.4)

    p_search = sub.add_parser("search", help="run a query against a built index")
    p_search.add_argument("--index", required=True, help="index directory")
    p_search.add_argument("query")
    p_search.add_argument("--k", type=int, default=96, help="first-stage candidate depth")
    p_search.add_argument("--max-results", type=int, default=None)
    p_search.add_argument("--rerank", action=argparse.BooleanOptionalAction, default=True)
    p_search.add_argument("--json", action="store_true", help="print the service JSON body (minus timing)")
    p_search.add_argument("--scorer", default="lexical", choices=["lexical", "external"])
    p_search.add_argument("--scorer-endpoint", default="")
    p_search.add_argument("--year-from", type=int, default=None)
    p_search.add_argument("--year-to", type=int, default=None)
    p_search.add_argument("--journal", action="append", default=[], help="repeatable")
    p_search.add_argument("--source", action="append", default=[], help="repeatable")
    p_search.add_argument("--author", action="append", default=[], help="repeatable")

    p_compare = sub.add_parser("compare-granularity", help="contrast the three granularity schemes")
    p_compare.add_argument("--input", required=True, help="corpus JSONL file")
    p_compare.add_argument("--queries", required=True, help="queries file, one per line, # comments")
    p_compare.add_argument("--k", type=int, default=10, help="articles per query to compare")
    p_compare.add_argument("--json", action="store_true", help="print the report as JSON")

    p_serve = sub.add_parser("serve", help="run the HTTP search service")
    p_serve.add_argument("--config", default=None, help="TOML config file (env LITDEX_* overrides)")

    return parser


def cmd_build(args: argparse.Namespace) -> int:
    try:
        articles = parse_corpus(args.input)
    except OSError as exc:
        raise _UserError(f"cannot read {args.input}: {exc}") from exc
    if not articles:
        raise _UserError(f"{args.input}: corpus contains no articles")
    scheme = GranularityScheme(args.scheme)
    units = [unit for article in articles for unit in expand_granularity(article, scheme)]
    try:
        index = build_index(units, k1=args.k1, b=args.b, scheme=scheme, articles=articles)
    except ValueError as exc:
        raise _UserError(str(exc)) from exc
    try:
        save_index(index, args.out)
    except OSError as exc:
        raise _UserError(f"cannot write {args.out}: {exc}") from exc
    print(f"indexed {len(articles)} articles as {index.n_units} units ({scheme.value} scheme)")
    print(f"avgdl {index.avgdl:.2f}, vocabulary {index.vocabulary_size()} terms")
    print(f"wrote {args.out}")
    return 0


def _load_index_arg(path: str) -> InvertedIndex:
    try:
        return load_index(path)
    except IndexLoadError as exc:
        raise _UserError(f"cannot load index {path}: {exc}") from exc


def cmd_search(args: argparse.Namespace) -> int:
    index = _load_index_arg(args.index)
    if args.scorer == "external":
        if not args.scorer_endpoint:
            raise _UserError("--scorer-endpoint is required with --scorer external")
        scorer = ExternalScorer(args.scorer_endpoint)
    else:
        scorer = LexicalScorer()
    max_results = args.max_results if args.max_results is not None else min(20, max(args.k, 1))
    options = SearchOptions(
        query=args.query,
        filters=FilterSet(
            year_from=args.year_from,
            year_to=args.year_to,
            journals=frozenset(args.journal),
            sources=frozenset(args.source),
            authors=frozenset(args.author),
        ),
        k_first_stage=args.k,
        max_results=max_results,
        rerank=args.rerank,
    )
    try:
        body = run_search(index, options, scorer)
    except ValueError as exc:
        raise _UserError(str(exc)) from exc

    if args.json:
        body.pop("timing")
        print(json.dumps(body, ensure_ascii=False))
        return 0

    if body["degraded"]:
        print("note: external backend unavailable, degraded to deterministic fallbacks", file=sys.stderr)
    results = body["results"]
    if not results:
        print("no results")
        return 0
    width = max(len(r["article_id"]) for r in results)
    for rank, item in enumerate(results, start=1):
        year = item["year"] if item["year"] is not None else "----"
        print(f"{rank:3d}  {item['score']:8.4f}  {item['article_id']:<{width}}  {year}  {item['title']}")
    return 0


@dataclass
class _SchemeRun:
    scheme: GranularityScheme
    index: InvertedIndex


def _jaccard(a: set[str], b: set[str]) -> float:
    if not a and not b:
        return 1.0
    union = a | b
    return len(a & b) / len(union)


def _full_text_length(article: Article) -> int:
    return sum(len(p) for p in article.paragraphs)


def _top_articles(index: InvertedIndex, query: str, k: int) -> list[str]:
    hits = search(index, query, max(index.n_units, 1))
    out: list[str] = []
    seen: set[str] = set()
    for hit in hits:
        if hit.article_id in seen:
            continue
        seen.add(hit.article_id)
        out.append(hit.article_id)
        if len(out) == k:
            break
    return out


def cmd_compare_granularity(args: argparse.Namespace) -> int:
    try:
        articles = parse_corpus(args.input)
    except OSError as exc:
        raise _UserError(f"cannot read {args.input}: {exc}") from exc
    if not articles:
        raise _UserError(f"{args.input}: corpus contains no articles")
    try:
        raw = Path(args.queries).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UserError(f"cannot read {args.queries}: {exc}") from exc
    queries = [line.strip() for line in raw.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not queries:
        raise _UserError(f"{args.queries}: no queries found")
    if args.k < 1:
        raise _UserError(f"--k must be >= 1, got {args.k}")

    by_id = {a.article_id: a for a in articles}
    runs: list[_SchemeRun] = []
    with tempfile.TemporaryDirectory(prefix="litdex-compare-") as tmp:
        for scheme in GranularityScheme:
            units = [unit for article in articles for unit in expand_granularity(article, scheme)]
            index = build_index(units, scheme=scheme, articles=articles)
            path = Path(tmp) / scheme.value
            save_index(index, path)
            runs.append(_SchemeRun(scheme=scheme, index=load_index(path)))

        report: dict = {"k": args.k, "queries": []}
        for query in queries:
            tops = {run.scheme.value: _top_articles(run.index, query, args.k) for run in runs}
            lengths = {
                name: (
                    sum(_full_text_length(by_id[a]) for a in ids) / len(ids) if ids else 0.0
                )
                for name, ids in tops.items()
            }
            names = [s.value for s in GranularityScheme]
            overlaps = {
                f"{one}/{two}": _jaccard(set(tops[one]), set(tops[two]))
                for i, one in enumerate(names)
                for two in names[i + 1 :]
            }
            report["queries"].append(
                {
                    "query": query,
                    "top_articles": tops,
                    "overlap": overlaps,
                    "mean_full_text_length": lengths,
                }
            )

    if args.json:
        print(json.dumps(report, ensure_ascii=False, indent=2))
        return 0

    for entry in report["queries"]:
        print(f"query: {entry['query']}")
        for name, ids in entry["top_articles"].items():
            mean_len = entry["mean_full_text_length"][name]
            shown = ", ".join(ids) if ids else "(none)"
            print(f"  {name:<11} mean_len {mean_len:9.1f}  top: {shown}")
        pairs = "  ".join(f"{pair} {value:.3f}" for pair, value in entry["overlap"].items())
        print(f"  overlap: {pairs}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app, load_config

    try:
        config = load_config(args.config)
    except OSError as exc:
        raise _UserError(f"cannot read config: {exc}") from exc

    # fail fast on an unusable port before uvicorn takes over the process
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((config.host, config.port))
    except OSError as exc:
        raise _UserError(f"cannot bind {config.host}:{config.port}: {exc}") from exc
    finally:
        probe.close()

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "build":
            return cmd_build(args)
        if args.command == "search":
            return cmd_search(args)
        if args.command == "compare-granularity":
            return cmd_compare_granularity(args)
        return cmd_serve(args)
    except LitdexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
