"""Fragment recovery, ordering, token-budgeted packing, QA input rendering.

The QA input format is fixed: ``question? \\n`` optionally followed by
multi-choice options and/or a context string, where the separator is the
literal two-character sequence backslash-n, never a real newline. Titled
fragments render as "Title: Sentence 1. Sentence 2."
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Callable, Sequence

from .corpus import Paragraph
from .textutil import count_tokens

DEFAULT_BUDGET = 512
SEP = "\\n"


@dataclass(frozen=True)
class Fragment:
    """A contiguous sentence run recovered around selected sentences."""

    title: str
    text: str
    para_id: str
    order_score: float  # 0.5*p + 0.5*s_max
    start_idx: int
    end_idx: int  # inclusive


@dataclass(frozen=True)
class PackedContext:
    context: str
    fragment_count: int
    token_count: int
    fragments: tuple[Fragment, ...] = ()  # the included fragments, in order


def recover_fragments(
    paragraph: Paragraph, selected: dict[int, float], p: float
) -> list[Fragment]:
    """Expand each selected sentence by one adjacent sentence on both sides,
    merging windows that overlap or touch into single fragments.

    ``selected`` maps sentence index to that sentence's evidence score; a
    fragment's s_max is the best score among its selected sentences.
    """
    n = len(paragraph.sentence_spans)
    for idx in selected:
        if not 0 <= idx < n:
            raise IndexError(f"sentence index {idx} out of range for {paragraph.para_id}")
    windows = sorted((max(0, i - 1), min(n - 1, i + 1)) for i in selected)
    merged: list[list[int]] = []
    for a, b in windows:
        if merged and a <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    fragments: list[Fragment] = []
    for a, b in merged:
        s_max = max(score for idx, score in selected.items() if a <= idx <= b)
        text = " ".join(paragraph.sentence(j) for j in range(a, b + 1))
        fragments.append(
            Fragment(
                title=paragraph.title,
                text=text,
                para_id=paragraph.para_id,
                order_score=0.5 * p + 0.5 * s_max,
                start_idx=a,
                end_idx=b,
            )
        )
    return fragments


def order_fragments(fragments: Sequence[Fragment]) -> list[Fragment]:
    return sorted(fragments, key=lambda f: (-f.order_score, f.para_id, f.start_idx))


def render_fragment(fragment: Fragment) -> str:
    return f"{fragment.title}: {fragment.text}"


def pack(
    fragments: Sequence[Fragment],
    budget: int = DEFAULT_BUDGET,
    initial_paragraph: str | None = None,
    counter: Callable[[str], int] = count_tokens,
) -> PackedContext:
    """Greedily append whole rendered fragments while the budget holds.

    A fragment that would overflow is skipped entirely, never truncated;
    later, smaller fragments may still fit.
    """
    context = ""
    if initial_paragraph is not None:
        if counter(initial_paragraph) > budget:
            raise ValueError("initial paragraph alone exceeds the token budget")
        context = initial_paragraph
    included: list[Fragment] = []
    for frag in fragments:
        rendered = render_fragment(frag)
        tentative = f"{context} {rendered}" if context else rendered
        if counter(tentative) <= budget:
            context = tentative
            included.append(frag)
    return PackedContext(
        context=context,
        fragment_count=len(included),
        token_count=counter(context),
        fragments=tuple(included),
    )


def render_qa_input(
    question: str,
    options: Sequence[str | tuple[str, str]] | None = None,
    context: str | None = None,
) -> str:
    """One of the four fixed QA input forms.

    open domain   : "question? \\n"
    reading comp. : "question? \\n context"
    multi-choice  : "question? \\n (A) a (B) b"
    both          : "question? \\n (A) a (B) b \\n context"
    """
    out = f"{question} {SEP}"
    if options:
        lettered: list[tuple[str, str]] = []
        for i, opt in enumerate(options):
            if isinstance(opt, tuple):
                lettered.append(opt)
            else:
                if i >= len(string.ascii_uppercase):
                    raise ValueError("more options than letters")
                lettered.append((string.ascii_uppercase[i], opt))
        letters = [letter for letter, _ in lettered]
        if len(set(letters)) != len(letters):
            raise ValueError(f"duplicate option letters: {letters}")
        out += "".join(f" ({letter}) {text}" for letter, text in lettered)
        if context is not None:
            out += f" {SEP}"
    if context is not None:
        out += f" {context}"
    return out
