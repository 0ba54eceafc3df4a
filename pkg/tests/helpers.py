"""Shared test fixtures: a synthetic corpus with planted retrieval chains.

Each chain is a sequence of gold paragraphs reachable only through the
ChainOracleEmbedder: the query built from (question + golds so far) is the
one-hot vector of the next gold, so exact search returns it top-1. Filler
paragraph ids sort lexicographically before gold ids, which pins down the
zero-score tie-break and keeps foreign golds out of every chain's hops.
"""

from __future__ import annotations

from dataclasses import dataclass

from hopforge.corpus import CorpusStore, ingest
from hopforge.scorers import (
    ChainOracleEmbedder,
    OracleEvidenceScorer,
    OracleParagraphScorer,
)


@dataclass
class Chain:
    question: str
    para_ids: list[str]  # gold paragraph ids in hop order
    gold_sentences: set[tuple[str, str]]  # (title, sentence text)


@dataclass
class ChainWorld:
    store: CorpusStore
    chains: list[Chain]
    embedder: ChainOracleEmbedder
    paragraph_scorer: OracleParagraphScorer
    evidence_scorer: OracleEvidenceScorer


def _gold_doc(chain_idx: int, hop: int) -> dict:
    title = f"Chain {chain_idx} Doc {hop}"
    gold = f"Gold fact {chain_idx} {hop} carries this chain one step further along."
    padding = f"Unrelated remark number {hop} sits beside the useful sentence here."
    return {
        "id": f"m_chain{chain_idx:02d}_h{hop}",
        "title": title,
        "paras": [{"text": f"{gold} {padding}", "links": []}],
    }


def _filler_doc(j: int) -> dict:
    return {
        "id": f"a_filler_{j:03d}",
        "title": f"Filler {j}",
        "paras": [
            {
                "text": f"Filler text number {j} with plenty of ordinary words inside.",
                "links": [],
            }
        ],
    }


def build_chain_world(n_chains: int = 20, total_paragraphs: int = 200) -> ChainWorld:
    """n_chains planted chains cycling through lengths 1..4, padded with
    filler paragraphs up to total_paragraphs."""
    docs = []
    chains: list[Chain] = []
    for i in range(n_chains):
        hops = (i % 4) + 1
        question = f"What lies at the end of chain {i}?"
        para_ids = []
        gold_sentences = set()
        for h in range(hops):
            doc = _gold_doc(i, h)
            docs.append(doc)
            para_ids.append(f"{doc['id']}_0")
            gold_text = doc["paras"][0]["text"].split(" Unrelated")[0]
            gold_sentences.add((doc["title"], gold_text))
        chains.append(Chain(question, para_ids, gold_sentences))
    n_fill = total_paragraphs - sum(len(c.para_ids) for c in chains)
    assert n_fill >= 0, "too many gold paragraphs for the requested corpus size"
    docs.extend(_filler_doc(j) for j in range(n_fill))

    store = ingest(docs)
    assert len(store) == total_paragraphs
    gold_map = {c.question: c.gold_sentences for c in chains}
    embedder = ChainOracleEmbedder(
        chains={c.question: c.para_ids for c in chains},
        paragraphs=[store.get(pid) for pid in store.para_ids()],
    )
    return ChainWorld(
        store=store,
        chains=chains,
        embedder=embedder,
        paragraph_scorer=OracleParagraphScorer(gold_map),
        evidence_scorer=OracleEvidenceScorer(gold_map),
    )
