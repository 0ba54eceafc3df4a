"""Builders for retrieval, reranker, and evidence-set training data.

An n-hop reasoning path expands into n single-hop retrieval samples whose
queries accumulate the gold paragraphs in path order. Negatives come from
path annotations when provided, otherwise they are mined from documents
hyperlinked by the gold paragraphs (their first retained paragraphs),
padding with random paragraphs when mining falls short.

Reranker and evidence-set samples come in shared-normalization pairs: two
instances identical except for the scored paragraph (or evidence set), linked
by pair_id so a training loader can place them in the same batch.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import CorpusStore, Paragraph, split_sentences
from .scorers import (
    serialize_evidence_input,
    serialize_reranker_input,
    serialize_retriever_query,
)
from .textutil import stable_seed

log = logging.getLogger(__name__)

MAX_HOPS = 4
MIN_NEGATIVES = 2


@dataclass(frozen=True)
class PathParagraph:
    para_id: str
    title: str
    text: str
    sentences: list[str]
    gold_sents: tuple[int, ...] = ()

    @classmethod
    def from_text(
        cls, para_id: str, title: str, text: str, gold_sents: Sequence[int] = ()
    ) -> "PathParagraph":
        sents = [text[a:b] for a, b in split_sentences(text)]
        return cls(para_id, title, text, sents, tuple(gold_sents))

    @classmethod
    def from_paragraph(
        cls, para: Paragraph, gold_sents: Sequence[int] = ()
    ) -> "PathParagraph":
        return cls(
            para.para_id, para.title, para.text, para.sentences(), tuple(gold_sents)
        )


@dataclass(frozen=True)
class ReasoningPath:
    """A question with its gold paragraphs in learnable order."""

    question_id: str
    question: str
    golds: list[PathParagraph]
    negatives: list[PathParagraph] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not 1 <= len(self.golds) <= MAX_HOPS:
            raise ValueError(f"path needs 1..{MAX_HOPS} gold paragraphs")


@dataclass(frozen=True)
class RetrievalSample:
    query: str
    pos_para_id: str
    neg_para_ids: list[str]
    pair_id: str

    def __post_init__(self) -> None:
        if self.pos_para_id in self.neg_para_ids:
            raise ValueError("positive paragraph listed among negatives")


@dataclass(frozen=True)
class SharedNormPair:
    pair_id: str
    query: str
    pos_input: str
    neg_input: str
    kind: str  # "paragraph" or "evidence"
    pos_label: float = 1.0
    neg_label: float = 0.0


def expand_path(path: ReasoningPath) -> list[RetrievalSample]:
    """n-hop path -> n samples; sample t retrieves gold t given golds 0..t-1."""
    samples = []
    for t, gold in enumerate(path.golds):
        query = serialize_retriever_query(
            path.question, [(g.title, g.text) for g in path.golds[:t]]
        )
        samples.append(
            RetrievalSample(
                query=query,
                pos_para_id=gold.para_id,
                neg_para_ids=[n.para_id for n in path.negatives],
                pair_id=f"{path.question_id}#h{t}",
            )
        )
    return samples


def mine_adversarial_negatives(
    path: ReasoningPath,
    store: CorpusStore,
    rng: random.Random | None = None,
    min_count: int = MIN_NEGATIVES,
) -> list[Paragraph]:
    """First paragraphs of documents hyperlinked from the golds, excluding
    every gold document; padded with random non-gold paragraphs if short."""
    rng = rng or random.Random(stable_seed(path.question_id, "negatives"))
    gold_docs = {g.para_id.rsplit("_", 1)[0] for g in path.golds}
    gold_ids = {g.para_id for g in path.golds}
    mined: list[Paragraph] = []
    seen: set[str] = set()
    for gold in path.golds:
        if gold.para_id not in store:
            continue
        for neighbor in store.hyperlink_neighbors(gold.para_id):
            if neighbor.doc_id in gold_docs or neighbor.para_id in gold_ids:
                continue
            if neighbor.para_id in seen:
                continue
            seen.add(neighbor.para_id)
            mined.append(neighbor)
    if len(mined) < min_count:
        pool = [
            pid
            for pid in store.para_ids()
            if pid not in gold_ids and pid not in seen
        ]
        need = min_count - len(mined)
        pad = rng.sample(pool, min(need, len(pool)))
        log.info(
            "%s: only %d mined negatives, padding with %d random",
            path.question_id,
            len(mined),
            len(pad),
        )
        mined.extend(store.get(pid) for pid in pad)
    return mined


def attach_negatives(
    sample: RetrievalSample,
    path: ReasoningPath,
    store: CorpusStore,
    rng: random.Random | None = None,
) -> RetrievalSample:
    """Ensure the sample carries at least two adversarial negatives."""
    if len(sample.neg_para_ids) >= MIN_NEGATIVES:
        return sample
    mined = mine_adversarial_negatives(path, store, rng)
    neg_ids = [p.para_id for p in mined if p.para_id != sample.pos_para_id]
    return replace(sample, neg_para_ids=neg_ids)


def with_mined_negatives(
    path: ReasoningPath, store: CorpusStore, rng: random.Random | None = None
) -> ReasoningPath:
    """Path copy whose negatives are mined from the corpus if not annotated."""
    if len(path.negatives) >= MIN_NEGATIVES:
        return path
    mined = [
        PathParagraph.from_paragraph(p)
        for p in mine_adversarial_negatives(path, store, rng)
    ]
    return replace(path, negatives=list(path.negatives) + mined)


def retrieval_loss(
    qvec: np.ndarray, pos: np.ndarray, negs: Sequence[np.ndarray]
) -> tuple[float, float]:
    """Softmax probability of the positive among {positive} + negatives, and
    its negative log likelihood. Computed with the max-logit shift."""
    q = np.asarray(qvec, dtype=np.float64)
    logits = [float(q @ np.asarray(pos, dtype=np.float64))]
    logits += [float(q @ np.asarray(n, dtype=np.float64)) for n in negs]
    m = max(logits)
    exps = [math.exp(x - m) for x in logits]
    total = sum(exps)
    prob = exps[0] / total
    loss = -(logits[0] - m - math.log(total))
    return prob, loss


def _reranker_depth(n_hops: int, rng: random.Random) -> int:
    # 2-hop data trains at a random depth; deeper data always at full depth
    if n_hops == 2:
        return rng.choice([1, 2])
    return n_hops


def build_reranker_samples(
    path: ReasoningPath, rng: random.Random | None = None
) -> list[SharedNormPair]:
    """One shared-normalization pair per path at the drawn hop depth."""
    rng = rng or random.Random(stable_seed(path.question_id, "reranker"))
    if not path.negatives:
        raise ValueError("path needs negatives; call with_mined_negatives first")
    depth = _reranker_depth(len(path.golds), rng)
    query = serialize_retriever_query(
        path.question, [(g.title, g.text) for g in path.golds[: depth - 1]]
    )
    pos_para = path.golds[depth - 1]
    neg_para = rng.choice(path.negatives)
    return [
        SharedNormPair(
            pair_id=f"{path.question_id}#r{depth}",
            query=query,
            pos_input=serialize_reranker_input(
                query, pos_para.title, pos_para.sentences
            ),
            neg_input=serialize_reranker_input(
                query, neg_para.title, neg_para.sentences
            ),
            kind="paragraph",
        )
    ]


def build_evidence_samples(
    path: ReasoningPath,
    rng: random.Random | None = None,
    from_positive_prob: float = 0.5,
) -> list[SharedNormPair]:
    """A fully-evidential set (all gold sentences, label 1) paired with the
    same set after ≥1 gold sentence is swapped out (label 0).

    The replacement sentence comes from a gold paragraph's non-gold sentences
    with probability ``from_positive_prob``, otherwise from a negative
    paragraph.
    """
    rng = rng or random.Random(stable_seed(path.question_id, "evidence"))
    golds = [
        (g.title, g.sentences[i]) for g in path.golds for i in g.gold_sents
    ]
    if not golds:
        raise ValueError("path carries no gold sentence labels")
    if len(golds) > 9:
        raise ValueError("gold sentences exceed the 9-sentence evidence cap")

    swapped = list(golds)
    victim = rng.randrange(len(swapped))
    replacement = None
    if rng.random() < from_positive_prob:
        pool = [
            (g.title, s)
            for g in path.golds
            for i, s in enumerate(g.sentences)
            if i not in g.gold_sents
        ]
        if pool:
            replacement = rng.choice(pool)
    if replacement is None:
        if not path.negatives:
            raise ValueError("path needs negatives; call with_mined_negatives first")
        neg = rng.choice(path.negatives)
        replacement = (neg.title, rng.choice(neg.sentences))
    swapped[victim] = replacement

    return [
        SharedNormPair(
            pair_id=f"{path.question_id}#e0",
            query=path.question,
            pos_input=serialize_evidence_input(path.question, golds),
            neg_input=serialize_evidence_input(path.question, swapped),
            kind="evidence",
        )
    ]


def write_retrieval_samples(
    samples: Sequence[RetrievalSample], path: str | Path
) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in samples:
            f.write(
                json.dumps(
                    {
                        "query": s.query,
                        "pos_para_id": s.pos_para_id,
                        "neg_para_ids": s.neg_para_ids,
                        "pair_id": s.pair_id,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def write_sharednorm_pairs(
    pairs: Sequence[SharedNormPair], path: str | Path
) -> None:
    """Two lines per pair, linked by pair_id, plus a batching sidecar telling
    the loader that pair members must share a batch (in-batch negatives)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        for p in pairs:
            for inp, label in ((p.pos_input, p.pos_label), (p.neg_input, p.neg_label)):
                f.write(
                    json.dumps(
                        {
                            "query": p.query,
                            "input": inp,
                            "label": label,
                            "pair_id": p.pair_id,
                            "kind": p.kind,
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )
    meta = {
        "batching": "shared_normalization",
        "pair_key": "pair_id",
        "in_batch_negatives": True,
    }
    with open(path.with_suffix(path.suffix + ".meta.json"), "w", encoding="utf-8") as f:
        json.dump(meta, f)
