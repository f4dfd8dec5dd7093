"""Run the HTTP search service against a freshly built index.

Walk-through:

 1. write a small corpus to disk and build an index directory for it,
 2. start the service in-process on a free port,
 3. query /api/search with filters and read the JSON response,
 4. point the service at a dead scorer endpoint and watch it degrade
    gracefully instead of failing.

Run from the repository root:

    python3 demos/03_search_service.py
"""

import json
import socket
import tempfile
import threading
import time
from pathlib import Path

import httpx
import uvicorn

from litdex import GranularityScheme, build_index, expand_granularity, parse_corpus, save_index
from litdex.service import ServiceConfig, create_app

CORPUS_LINES = [
    {
        "article_id": "spike-2020",
        "title": "Spike protein binding in coronaviruses",
        "source": "pmc",
        "abstract": "We characterize spike protein binding affinity across strains.",
        "paragraphs": [
            "Binding assays show the spike protein attaches to the ACE2 receptor.",
            "Mutations in the receptor binding domain change infection rates.",
        ],
        "year": 2020,
        "authors": ["Liu, A.", "Ng, B."],
        "journal": "J Virol",
    },
    {
        "article_id": "vaccine-2021",
        "title": "Vaccine trial outcomes",
        "source": "pmc",
        "abstract": "Phase three trial results for two vaccine candidates.",
        "paragraphs": ["Both candidates elicited strong antibody responses."],
        "year": 2021,
        "authors": ["Ng, B."],
        "journal": "Lancet",
    },
]


def serve_in_thread(app) -> tuple[uvicorn.Server, str]:
    """Start uvicorn on a free port; return the server and its base URL."""
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()

    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port, log_level="warning"))
    threading.Thread(target=server.run, daemon=True).start()
    while not server.started:
        time.sleep(0.05)
    return server, f"http://127.0.0.1:{port}"


with tempfile.TemporaryDirectory() as tmp:
    # -----------------------------------------------------------------------
    # 1. Corpus file -> index directory, exactly what `litdex build` does.
    # -----------------------------------------------------------------------
    corpus_path = Path(tmp) / "corpus.jsonl"
    corpus_path.write_text(
        "\n".join(json.dumps(line) for line in CORPUS_LINES) + "\n", encoding="utf-8"
    )
    articles = parse_corpus(corpus_path)
    units = [u for a in articles for u in expand_granularity(a, GranularityScheme.PARAGRAPH_LEVEL)]
    index_dir = Path(tmp) / "idx"
    save_index(build_index(units, scheme=GranularityScheme.PARAGRAPH_LEVEL, articles=articles), index_dir)
    print(f"index written to {index_dir}")

    # -----------------------------------------------------------------------
    # 2. The service loads the index once at startup and serves read-only
    #    traffic.  In production you would run `litdex serve --config ...`;
    #    in-process here to keep the demo self-contained.
    # -----------------------------------------------------------------------
    server, base = serve_in_thread(create_app(ServiceConfig(index_path=str(index_dir))))
    print(f"service up at {base}")
    print(json.dumps(httpx.get(f"{base}/healthz").json(), indent=2))
    print()

    # -----------------------------------------------------------------------
    # 3. Search with a year filter.  The body carries ranked results with
    #    per-result highlights, facet counts, and stage timings.
    # -----------------------------------------------------------------------
    body = httpx.get(
        f"{base}/api/search",
        params={"q": "spike protein binding", "year_from": 2020, "year_to": 2020},
    ).json()
    top = body["results"][0]
    print(f"top hit: {top['article_id']} (score {top['score']:.4f})")
    print(f"  paragraph: {top['paragraph']!r}")
    if top["highlight"] is not None:
        h = top["highlight"]
        print(f"  highlight: {top['paragraph'][h['start_char']:h['end_char']]!r}")
    print(f"  facets.year: {body['facets']['year']}")
    print(f"  timing: {body['timing']}")
    print(f"  degraded: {body['degraded']}")
    server.should_exit = True
    print()

    # -----------------------------------------------------------------------
    # 4. Degraded mode: configure an external scorer whose endpoint is not
    #    listening.  The service answers 200 anyway, flags the response,
    #    and scores with the deterministic lexical fallback.
    # -----------------------------------------------------------------------
    dead = socket.socket()
    dead.bind(("127.0.0.1", 0))
    dead_port = dead.getsockname()[1]
    dead.close()  # nothing listens there now

    config = ServiceConfig(
        index_path=str(index_dir),
        scorer="external",
        scorer_endpoint=f"http://127.0.0.1:{dead_port}",
        request_timeout_s=1.0,
    )
    server, base = serve_in_thread(create_app(config))
    body = httpx.get(f"{base}/api/search", params={"q": "vaccine antibody"}).json()
    print(f"scorer endpoint down -> degraded: {body['degraded']}, "
          f"results still ranked: {[r['article_id'] for r in body['results']]}")
    server.should_exit = True
