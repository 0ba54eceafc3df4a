"""Hop-loop orchestration: retrieve, rerank, pool, evidence-score, re-query.

Each hop retrieves k paragraphs for the current serialized query, reranks
them, pools top sentences with the prior evidence set, scores the pooled set,
and commits a new set. The query for hop t > 0 appends the paragraphs of the
top-5 evidence sentences from hop t-1. After t_max hops the best-scoring
hop's set is selected and its paragraph fragments are packed into a context.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .context import Fragment, PackedContext, order_fragments, pack, recover_fragments
from .corpus import CorpusStore
from .evidence import (
    DEFAULT_THRESHOLD,
    EvidenceSetState,
    commit,
    finalize,
    select_next,
    write_trace,
)
from .fusion import DEFAULT_W, RankedSentence, ScoredParagraph, rank_hop
from .scorers import (
    serialize_reranker_input,
    serialize_retriever_query,
    serialize_evidence_input,
)

log = logging.getLogger(__name__)

NEXT_QUERY_SENTENCES = 5  # paragraphs of this many top sentences feed hop t+1


class PipelineError(RuntimeError):
    """A query aborted after a scorer call failed twice."""

    def __init__(self, message: str, history: list[EvidenceSetState] | None = None):
        super().__init__(message)
        self.history = history or []


@dataclass
class PipelineConfig:
    t_max: int = 4
    k: int = 150  # 25 suits in-domain evaluation, 60 suits RATD builds
    w: float = DEFAULT_W
    threshold: float = DEFAULT_THRESHOLD
    budget: int = 512
    rerank_pool: int = 9  # reranked sentences offered to the evidence pool per hop
    workers: int = 4

    def __post_init__(self) -> None:
        for name in ("t_max", "k", "budget", "rerank_pool", "workers"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class HopState:
    t: int
    query: str
    retrieved: list[tuple[str, float]]
    reranked: list[RankedSentence]
    evidence: EvidenceSetState


@dataclass
class QueryResult:
    question: str
    packed: PackedContext
    final: EvidenceSetState
    history: list[EvidenceSetState]
    hops: list[HopState] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "question": self.question,
            "context": self.packed.context,
            "fragments": [
                {"title": f.title, "text": f.text, "order_score": f.order_score}
                for f in self.packed.fragments
            ],
            "token_count": self.packed.token_count,
        }


def _call_with_retry(what: str, fn: Callable, *args):
    try:
        return fn(*args)
    except Exception as first:
        log.warning("%s failed (%s), retrying once", what, first)
        try:
            return fn(*args)
        except Exception as second:
            raise PipelineError(f"{what} failed twice: {second}") from second


def _next_hop_paragraphs(
    state: EvidenceSetState, store: CorpusStore
) -> list[tuple[str, str]]:
    """(title, text) of the paragraphs behind the top-5 evidence sentences."""
    pairs: list[tuple[str, str]] = []
    seen: set[str] = set()
    for s in state.sentences[:NEXT_QUERY_SENTENCES]:
        if s.para_id in seen:
            continue
        seen.add(s.para_id)
        para = store.get(s.para_id)
        pairs.append((para.title, para.text))
    return pairs


class IteratorPipeline:
    def __init__(
        self,
        store: CorpusStore,
        index,  # ExactIndex or HNSWIndex
        embedder,
        paragraph_scorer,
        evidence_scorer,
        config: PipelineConfig | None = None,
    ):
        self.store = store
        self.index = index
        self.embedder = embedder
        self.paragraph_scorer = paragraph_scorer
        self.evidence_scorer = evidence_scorer
        self.config = config or PipelineConfig()

    def run_query(
        self,
        question: str,
        initial_paragraph: str | None = None,
        trace_path: str | Path | None = None,
    ) -> QueryResult:
        cfg = self.config
        history: list[EvidenceSetState] = []
        hops: list[HopState] = []
        state: EvidenceSetState | None = None
        try:
            for t in range(cfg.t_max):
                hop_paras = (
                    [] if state is None else _next_hop_paragraphs(state, self.store)
                )
                query = serialize_retriever_query(question, hop_paras)
                qvec = _call_with_retry(
                    f"embed_query hop {t}", self.embedder.embed_query, query
                )
                retrieved = self.index.search(qvec, cfg.k)
                if not retrieved:
                    raise PipelineError("retrieval returned nothing (empty index?)")
                inputs = []
                paras = []
                for pid, _ in retrieved:
                    para = self.store.get(pid)
                    inputs.append(
                        serialize_reranker_input(query, para.title, para.sentences())
                    )
                    paras.append(para)
                scores = _call_with_retry(
                    f"score_paragraphs hop {t}",
                    self.paragraph_scorer.score_paragraphs,
                    inputs,
                )
                scored = [
                    ScoredParagraph(
                        para_id=para.para_id,
                        title=para.title,
                        sentences=para.sentences(),
                        p=sc.p,
                        s_p=sc.s_p,
                    )
                    for para, sc in zip(paras, scores)
                ]
                ranked_sents, _ = rank_hop(scored, cfg.w)
                candidates = select_next(state, ranked_sents, pool_top=cfg.rerank_pool)
                ev_input = serialize_evidence_input(
                    question, [(c.title, c.text) for c in candidates]
                )
                ev_score = _call_with_retry(
                    f"score_evidence hop {t}",
                    self.evidence_scorer.score_evidence,
                    ev_input,
                )
                state = commit(t, candidates, ev_score, cfg.threshold)
                history.append(state)
                hops.append(
                    HopState(
                        t=t,
                        query=query,
                        retrieved=retrieved,
                        reranked=ranked_sents,
                        evidence=state,
                    )
                )
        except PipelineError as exc:
            exc.history = history
            if trace_path is not None:
                write_trace(history, trace_path)  # partial trace for post-mortem
            raise

        final = finalize(history)
        if trace_path is not None:
            write_trace(history, trace_path)
        packed = self._assemble(question, final, initial_paragraph)
        return QueryResult(
            question=question, packed=packed, final=final, history=history, hops=hops
        )

    def _assemble(
        self,
        question: str,
        final: EvidenceSetState,
        initial_paragraph: str | None,
    ) -> PackedContext:
        by_para: dict[str, list] = {}
        for s in final.sentences:
            by_para.setdefault(s.para_id, []).append(s)
        fragments: list[Fragment] = []
        for para_id, sents in by_para.items():
            para = self.store.get(para_id)
            selected = {s.sent_idx: s.s_e for s in sents}
            fragments.extend(recover_fragments(para, selected, sents[0].p))
        ordered = order_fragments(fragments)
        return pack(ordered, budget=self.config.budget, initial_paragraph=initial_paragraph)

    def run_batch(
        self,
        lines: Sequence[str],
        out_path: str | Path | None = None,
    ) -> list[dict]:
        """Process JSONL question records, preserving input order.

        Each line holds {"question": str, "initial_paragraph"?: str}. A bad
        line or an aborted query yields an error record; the batch continues.
        """

        def one(numbered: tuple[int, str]) -> dict:
            n, line = numbered
            try:
                rec = json.loads(line)
                question = rec["question"]
            except (json.JSONDecodeError, TypeError, KeyError) as exc:
                log.error("line %d: malformed input (%s)", n, exc)
                return {"line": n, "error": f"malformed input: {exc}"}
            try:
                result = self.run_query(question, rec.get("initial_paragraph"))
                log.info("line %d: ok (%d hops)", n, len(result.history))
                return result.to_record()
            except PipelineError as exc:
                log.error("line %d: %s", n, exc)
                return {"line": n, "question": question, "error": str(exc)}

        numbered = [(i, line) for i, line in enumerate(lines) if line.strip()]
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            records = list(pool.map(one, numbered))
        if out_path is not None:
            with open(out_path, "w", encoding="utf-8") as f:
                for rec in records:
                    f.write(json.dumps(rec, ensure_ascii=False) + "\n")
        return records
