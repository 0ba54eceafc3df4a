#!/usr/bin/env python3
"""Run the retrieval pipeline twice, once with in-process stub scorers and
once against a stub-mode scorer service, and demand record-for-record
equality: same packed contexts, same evidence history, same floats.

Usage: HOPFORGE_SCORER_URL=http://127.0.0.1:PORT python3 scripts/pipeline_conformance.py

Exit code 0 and a "records-identical" line on success.
"""

from __future__ import annotations

import json
import os
import sys

from hopforge.corpus import ingest
from hopforge.evidence import state_record
from hopforge.index import ExactIndex, build_index
from hopforge.pipeline import IteratorPipeline, PipelineConfig
from hopforge.scorers import (
    StubEmbedder,
    StubEvidenceScorer,
    StubParagraphScorer,
    scorers_from_env,
)

DIM = 32


def corpus_docs() -> list[dict]:
    docs = []
    for i in range(8):
        docs.append(
            {
                "id": f"d{i}",
                "title": f"Topic {i}",
                "paras": [
                    {
                        "text": (
                            f"Opening sentence number {i} runs for enough words to stay. "
                            f"Closing sentence number {i} also runs for enough words here."
                        ),
                        "links": [],
                    }
                ],
            }
        )
    return docs


def run(pipeline: IteratorPipeline, questions: list[str]) -> list[dict]:
    records = []
    for q in questions:
        res = pipeline.run_query(q)
        records.append(
            {
                "record": res.to_record(),
                "final_t": res.final.t,
                "final_e": res.final.e,
                "history": [state_record(s) for s in res.history],
            }
        )
    return records


def main() -> int:
    url = os.environ.get("HOPFORGE_SCORER_URL")
    if not url:
        print("HOPFORGE_SCORER_URL is not set", file=sys.stderr)
        return 2

    store = ingest(corpus_docs())
    embedder = StubEmbedder(dim=DIM)
    index = ExactIndex(build_index(store, embedder))
    config = PipelineConfig(t_max=2, k=3, workers=2)
    questions = [f"What does topic {i} say?" for i in range(4)]

    local = IteratorPipeline(
        store, index, embedder, StubParagraphScorer(), StubEvidenceScorer(), config
    )
    local_records = run(local, questions)

    triple = scorers_from_env(dim=DIM)  # env URL is set: remote client triple
    remote = IteratorPipeline(
        store, index, triple.embedder, triple.paragraph, triple.evidence, config
    )
    remote_records = run(remote, questions)

    local_json = json.dumps(local_records, sort_keys=True)
    remote_json = json.dumps(remote_records, sort_keys=True)
    if local_json != remote_json:
        for i, (a, b) in enumerate(zip(local_records, remote_records)):
            if a != b:
                print(f"mismatch on question {i}:", file=sys.stderr)
                print(f"  local:  {json.dumps(a, sort_keys=True)}", file=sys.stderr)
                print(f"  remote: {json.dumps(b, sort_keys=True)}", file=sys.stderr)
        return 1

    print(f"records-identical {len(questions)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
