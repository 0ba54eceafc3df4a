#!/usr/bin/env python3
"""Record stub-mode wire transcripts from the reference implementation.

Each fixture freezes the exact response bytes the service must produce for a
request, in compact JSON with shortest-roundtrip doubles. The recorder
asserts every float stays inside the formatting window where CPython repr and
JS number printing agree (no exponent form, no integral floats), so the
frozen bytes are achievable from both runtimes.

Usage: python3 scripts/record_stub_transcripts.py [out_path]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from hopforge.scorers import (
    StubEmbedder,
    StubEvidenceScorer,
    StubParagraphScorer,
    document_text,
    serialize_evidence_input,
    serialize_reranker_input,
    serialize_retriever_query,
)


def js_number(x: object) -> str:
    if isinstance(x, bool):
        raise TypeError("no booleans on this wire")
    if isinstance(x, int):
        return str(x)
    s = repr(float(x))
    assert "e" not in s and "E" not in s, f"exponent form diverges: {s}"
    assert not s.endswith(".0"), f"integral float diverges: {s}"
    return s


def js_stringify(obj: object) -> str:
    """Byte-for-byte JSON.stringify for the payload shapes used here."""
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (int, float)):
        return js_number(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(js_stringify(v) for v in obj) + "]"
    if isinstance(obj, dict):
        return "{" + ",".join(
            f"{json.dumps(k, ensure_ascii=False)}:{js_stringify(v)}"
            for k, v in obj.items()
        ) + "}"
    raise TypeError(f"unsupported payload type {type(obj)!r}")


def embed_response(dim: int, texts: list[str]) -> dict:
    emb = StubEmbedder(dim=dim)
    return {"dim": dim, "vectors": [emb.embed(t).tolist() for t in texts]}


def paragraph_response(inputs: list[str]) -> dict:
    scorer = StubParagraphScorer()
    return {
        "scores": [
            {"p": s.p, "s_p": list(s.s_p)} for s in scorer.score_paragraphs(inputs)
        ]
    }


def evidence_response(inputs: list[str]) -> dict:
    scorer = StubEvidenceScorer()
    return {
        "scores": [
            {"e": r.e, "s_e": list(r.s_e)}
            for r in (scorer.score_evidence(s) for s in inputs)
        ]
    }


def main() -> None:
    out_path = Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures/stub_transcripts.json")

    rerank_two = serialize_reranker_input(
        "who wrote it?", "Book", ["First sentence here.", "Second one."]
    )
    rerank_one = serialize_reranker_input("where is it?", "Atlas", ["On the shelf."])
    rerank_nine = serialize_reranker_input(
        "which page?", "Ledger", [f"Entry number {i} follows." for i in range(9)]
    )
    rerank_unicode = serialize_reranker_input(
        "qui l'a écrit ?", "Libro", ["Première phrase ici.", "第二句在这里。"]
    )
    rerank_pipes = serialize_reranker_input(
        "what splits?", "Guide", ["Left part | right part stays one sentence."]
    )
    deep_query = serialize_retriever_query(
        "what lies beyond?",
        [("Chain 0 Doc 0", "Gold fact 0 0 carries on."), ("Chain 0 Doc 1", "Gold fact 0 1 carries on.")],
    )
    rerank_deep = serialize_reranker_input(
        deep_query, "Chain 0 Doc 2", ["Gold fact 0 2 carries on.", "Padding remark."]
    )

    evid_one = serialize_evidence_input(
        "who wrote it?", [("Book", "First sentence here.")]
    )
    evid_two = serialize_evidence_input(
        "who wrote it?",
        [("Book", "First sentence here."), ("Book", "Second one.")],
    )
    evid_nine = serialize_evidence_input(
        "which page?", [("Ledger", f"Entry number {i} follows.") for i in range(9)]
    )
    evid_unicode = serialize_evidence_input(
        "qui l'a écrit ?", [("Libro", "Première phrase ici."), ("Libro", "第二句在这里。")]
    )
    evid_chain = serialize_evidence_input(
        "what lies beyond?",
        [
            ("Chain 0 Doc 0", "Gold fact 0 0 carries on."),
            ("Chain 0 Doc 1", "Gold fact 0 1 carries on."),
        ],
    )

    fixtures = [
        {
            "name": "embed single",
            "server": {"stub_dim": 64},
            "route": "/embed",
            "request": {"texts": ["hello"]},
        },
        {
            "name": "embed unicode batch",
            "server": {"stub_dim": 64},
            "route": "/embed",
            "request": {"texts": ["café crème", "中文段落文本", "mixed ascii 😀 emoji"]},
        },
        {
            "name": "embed empty string",
            "server": {"stub_dim": 64},
            "route": "/embed",
            "request": {"texts": [""]},
        },
        {
            "name": "embed long text",
            "server": {"stub_dim": 64},
            "route": "/embed",
            "request": {"texts": ["the quick brown fox jumps over the lazy dog " * 5]},
        },
        {
            "name": "embed retriever query",
            "server": {"stub_dim": 64},
            "route": "/embed",
            "request": {"texts": [serialize_retriever_query("Q?", [("T", "A. B.")])]},
        },
        {
            "name": "embed dim8 pair",
            "server": {"stub_dim": 8},
            "route": "/embed",
            "request": {"texts": ["alpha", "beta"]},
        },
        {
            "name": "embed dim8 document",
            "server": {"stub_dim": 8},
            "route": "/embed",
            "request": {"texts": [document_text("Chain 0 Doc 1", "Gold fact 0 1 carries on.")]},
        },
        {
            "name": "rerank two sentences",
            "server": {"stub_dim": 64},
            "route": "/score_paragraph",
            "request": {"inputs": [rerank_two]},
        },
        {
            "name": "rerank one sentence",
            "server": {"stub_dim": 64},
            "route": "/score_paragraph",
            "request": {"inputs": [rerank_one]},
        },
        {
            "name": "rerank nine sentences",
            "server": {"stub_dim": 64},
            "route": "/score_paragraph",
            "request": {"inputs": [rerank_nine]},
        },
        {
            "name": "rerank batch with duplicate",
            "server": {"stub_dim": 64},
            "route": "/score_paragraph",
            "request": {"inputs": [rerank_one, rerank_two, rerank_one, rerank_nine]},
        },
        {
            "name": "rerank unicode",
            "server": {"stub_dim": 64},
            "route": "/score_paragraph",
            "request": {"inputs": [rerank_unicode]},
        },
        {
            "name": "rerank deep query",
            "server": {"stub_dim": 64},
            "route": "/score_paragraph",
            "request": {"inputs": [rerank_deep, rerank_pipes]},
        },
        {
            "name": "rerank pipes in sentence",
            "server": {"stub_dim": 64},
            "route": "/score_paragraph",
            "request": {"inputs": [rerank_pipes]},
        },
        {
            "name": "evidence one sentence",
            "server": {"stub_dim": 64},
            "route": "/score_evidence",
            "request": {"inputs": [evid_one]},
        },
        {
            "name": "evidence two sentences",
            "server": {"stub_dim": 64},
            "route": "/score_evidence",
            "request": {"inputs": [evid_two]},
        },
        {
            "name": "evidence nine sentences",
            "server": {"stub_dim": 64},
            "route": "/score_evidence",
            "request": {"inputs": [evid_nine]},
        },
        {
            "name": "evidence batch with duplicate",
            "server": {"stub_dim": 64},
            "route": "/score_evidence",
            "request": {"inputs": [evid_one, evid_two, evid_one]},
        },
        {
            "name": "evidence unicode",
            "server": {"stub_dim": 64},
            "route": "/score_evidence",
            "request": {"inputs": [evid_unicode]},
        },
        {
            "name": "evidence chain pair",
            "server": {"stub_dim": 64},
            "route": "/score_evidence",
            "request": {"inputs": [evid_chain]},
        },
    ]
    assert len(fixtures) == 20, len(fixtures)

    for fx in fixtures:
        if fx["route"] == "/embed":
            payload = embed_response(fx["server"]["stub_dim"], fx["request"]["texts"])
        elif fx["route"] == "/score_paragraph":
            payload = paragraph_response(fx["request"]["inputs"])
        else:
            payload = evidence_response(fx["request"]["inputs"])
        fx["response_body"] = js_stringify(payload)

    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(
        json.dumps(fixtures, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(fixtures)} transcripts to {out_path}")


if __name__ == "__main__":
    main()
