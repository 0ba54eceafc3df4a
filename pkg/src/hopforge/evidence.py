"""Per-hop evidence set: pooling, thresholded commit, final hop selection.

The set carries at most 9 sentences into scoring and at most 5 out of a
commit. Selection ranks by the combined score 0.5*p + 0.5*s_e; sentences
must beat a threshold (strict >) to stay, except that the top 2 survive
regardless so the set never collapses.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .fusion import RankedSentence
from .scorers import MAX_EVIDENCE_SENTENCES, EvidenceScore

DEFAULT_THRESHOLD = 0.1
MAX_COMMIT = 5
MIN_COMMIT = 2


@dataclass(frozen=True)
class EvidenceSentence:
    para_id: str
    sent_idx: int
    title: str
    text: str
    p: float
    s_e: float
    combined: float  # 0.5*p + 0.5*s_e


@dataclass(frozen=True)
class EvidenceCandidate:
    """A sentence pooled for evidence scoring; ``available`` is the score it
    entered the pool with (fused s for new sentences, last combined for
    carried-over ones)."""

    para_id: str
    sent_idx: int
    title: str
    text: str
    p: float
    available: float


@dataclass
class EvidenceSetState:
    t: int
    sentences: list[EvidenceSentence]
    e: float

    def keys(self) -> set[tuple[str, int]]:
        return {(s.para_id, s.sent_idx) for s in self.sentences}


def select_next(
    prior: EvidenceSetState | None,
    reranked: Sequence[RankedSentence],
    pool_top: int = MAX_EVIDENCE_SENTENCES,
    cap: int = MAX_EVIDENCE_SENTENCES,
) -> list[EvidenceCandidate]:
    """Pool prior-set sentences with the hop's top reranked sentences.

    Duplicates by (para_id, sent_idx) keep the higher available score. The
    pool is capped by descending available score.
    """
    by_key: dict[tuple[str, int], EvidenceCandidate] = {}

    def offer(cand: EvidenceCandidate) -> None:
        key = (cand.para_id, cand.sent_idx)
        held = by_key.get(key)
        if held is None or cand.available > held.available:
            by_key[key] = cand

    if prior is not None:
        for s in prior.sentences:
            offer(
                EvidenceCandidate(
                    para_id=s.para_id,
                    sent_idx=s.sent_idx,
                    title=s.title,
                    text=s.text,
                    p=s.p,
                    available=s.combined,
                )
            )
    for r in list(reranked)[:pool_top]:
        offer(
            EvidenceCandidate(
                para_id=r.para_id,
                sent_idx=r.sent_idx,
                title=r.title,
                text=r.text,
                p=r.p,
                available=r.s,
            )
        )
    pooled = sorted(
        by_key.values(), key=lambda c: (-c.available, c.para_id, c.sent_idx)
    )
    return pooled[:cap]


def commit(
    t: int,
    candidates: Sequence[EvidenceCandidate],
    score: EvidenceScore,
    threshold: float = DEFAULT_THRESHOLD,
) -> EvidenceSetState:
    """Rank candidates by 0.5*p + 0.5*s_e and keep the qualifying top slice."""
    if not candidates:
        raise ValueError("commit requires at least one candidate")
    if len(score.s_e) != len(candidates):
        raise ValueError(
            f"{len(score.s_e)} sentence scores for {len(candidates)} candidates"
        )
    scored = [
        EvidenceSentence(
            para_id=c.para_id,
            sent_idx=c.sent_idx,
            title=c.title,
            text=c.text,
            p=c.p,
            s_e=s_e,
            combined=0.5 * c.p + 0.5 * s_e,
        )
        for c, s_e in zip(candidates, score.s_e)
    ]
    scored.sort(key=lambda s: (-s.combined, s.para_id, s.sent_idx))
    kept = [s for s in scored if s.combined > threshold][:MAX_COMMIT]
    if len(kept) < MIN_COMMIT:
        kept = scored[:MIN_COMMIT]
    return EvidenceSetState(t=t, sentences=kept, e=score.e)


def finalize(history: Sequence[EvidenceSetState]) -> EvidenceSetState:
    """The state with maximal e; ties go to the earliest hop."""
    if not history:
        raise ValueError("finalize requires a non-empty history")
    best = history[0]
    for state in history[1:]:
        if state.e > best.e:
            best = state
    return best


def state_record(state: EvidenceSetState) -> dict:
    return {
        "hop": state.t,
        "e": state.e,
        "sentences": [
            {
                "para_id": s.para_id,
                "sent_idx": s.sent_idx,
                "p": s.p,
                "s_e": s.s_e,
                "combined": s.combined,
            }
            for s in state.sentences
        ],
    }


def write_trace(history: Sequence[EvidenceSetState], path: str | Path) -> None:
    """One JSONL line per hop for offline inspection."""
    with open(path, "w", encoding="utf-8") as f:
        for state in history:
            f.write(json.dumps(state_record(state)) + "\n")
