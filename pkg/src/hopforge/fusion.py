"""Score fusion and per-hop ranking of reranked paragraphs and sentences."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_W = 0.5


def fuse(p: float, s_p: float, w: float = DEFAULT_W) -> float:
    """Weighted sentence score w*p + (1-w)*s_p."""
    for name, val in (("p", p), ("s_p", s_p), ("w", w)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name}={val} outside [0, 1]")
    return w * p + (1.0 - w) * s_p


@dataclass(frozen=True)
class ScoredParagraph:
    """One retrieved paragraph after reranking."""

    para_id: str
    title: str
    sentences: list[str]
    p: float
    s_p: list[float]

    def __post_init__(self) -> None:
        if len(self.sentences) != len(self.s_p):
            raise ValueError(
                f"{self.para_id}: {len(self.sentences)} sentences vs "
                f"{len(self.s_p)} sentence scores"
            )


@dataclass(frozen=True)
class RankedSentence:
    para_id: str
    sent_idx: int
    title: str
    text: str
    p: float
    s_p: float
    s: float  # fused


def rank_hop(
    paragraphs: list[ScoredParagraph], w: float = DEFAULT_W
) -> tuple[list[RankedSentence], list[ScoredParagraph]]:
    """Rank one hop's sentences by fused score and paragraphs by p.

    Ties break on (para_id, sent_idx) so output is a pure function of the
    input set, independent of input order.
    """
    sentences = [
        RankedSentence(
            para_id=para.para_id,
            sent_idx=i,
            title=para.title,
            text=text,
            p=para.p,
            s_p=para.s_p[i],
            s=fuse(para.p, para.s_p[i], w),
        )
        for para in paragraphs
        for i, text in enumerate(para.sentences)
    ]
    sentences.sort(key=lambda r: (-r.s, r.para_id, r.sent_idx))
    ranked_paras = sorted(paragraphs, key=lambda pa: (-pa.p, pa.para_id))
    return sentences, ranked_paras
