"""QA training-sample builders: retrieval-augmented, gold+distractor,
unanswerable, open-domain, synthetic numeric, and masked-span prediction.

Every sample uses the fixed input format from context.render_qa_input and a
plain-string target. Dataset tags carry a variant suffix (_ratd,
_goldplusdistractors, _noanswer, _opendomain) on top of the caller's base
name so downstream manifests can tell variants apart.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Callable, Sequence

from .context import PackedContext, render_fragment, render_qa_input
from .textutil import count_tokens, digit_tokenize, word_count
from .train_builder import PathParagraph

__all__ = [
    "QASample",
    "digit_tokenize",
    "emit_ratd",
    "emit_opendomain",
    "build_goldplusdistractors",
    "build_unanswerable",
    "gen_synthetic_numeric",
    "build_selfsupervised",
    "write_qa_samples",
    "NO_ANSWER",
    "SYNTHETIC_KINDS",
]

NO_ANSWER = "<No Answer>"
BUDGET = 512
TITLE_WITHHOLD_PROB = 0.1

SYNTHETIC_KINDS = (
    "signed-arith",
    "date-diff",
    "min-max-avg",
    "percent",
    "yn-nums",
    "yn-dates",
    "date-min-max",
    "arg-min-max",
)

_VAR_NAMES = "xyzabcdefgh"
_DATE_LO = date(1700, 1, 1)
_DATE_HI = date(2020, 12, 31)


@dataclass(frozen=True)
class QASample:
    input: str
    target: str
    dataset: str
    group: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.target:
            raise ValueError("target must be non-empty")


def emit_ratd(
    question: str,
    answer: str,
    packed: PackedContext,
    variant: str = "full",
    dataset: str = "ratd",
    group: str = "group2",
) -> QASample:
    """RC-form sample whose context came out of the retrieval pipeline.

    The max4paras variant keeps only the first 4 fragments after ordering.
    """
    if variant == "full":
        context = packed.context
        tag = f"{dataset}_ratd"
    elif variant == "max4paras":
        context = " ".join(render_fragment(f) for f in packed.fragments[:4])
        tag = f"{dataset}_ratd_max4paras"
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if not context:
        raise ValueError("empty context")
    return QASample(
        input=render_qa_input(question, context=context),
        target=answer,
        dataset=tag,
        group=group,
    )


def emit_opendomain(
    question: str,
    answer: str,
    options: Sequence[str] | None = None,
    dataset: str = "qa",
    group: str = "group1",
) -> QASample:
    return QASample(
        input=render_qa_input(question, options=options),
        target=answer,
        dataset=f"{dataset}_opendomain",
        group=group,
    )


# --------------------------------------------------------------------------
# gold + distractor contexts


@dataclass
class _Part:
    title: str
    sentences: list[str]
    selected: set[int]
    is_gold: bool
    gold_sents: set[int]
    withheld: bool = False

    def render(self) -> str:
        text = " ".join(self.sentences[i] for i in sorted(self.selected))
        return text if self.withheld else f"{self.title}: {text}"

    def words(self) -> int:
        return sum(word_count(self.sentences[i]) for i in self.selected)


def _gold_parts(golds: Sequence[PathParagraph]) -> list[_Part]:
    parts = []
    for g in golds:
        selected = set(g.gold_sents) if g.gold_sents else set(range(len(g.sentences)))
        parts.append(
            _Part(
                title=g.title,
                sentences=list(g.sentences),
                selected=selected,
                is_gold=True,
                gold_sents=set(g.gold_sents),
            )
        )
    return parts


def _matched_negative_parts(
    negatives: Sequence[PathParagraph], target_words: float
) -> list[_Part]:
    # prefix of sentences reaching ~target length, whole sentences only
    parts = []
    for n in negatives:
        selected: set[int] = set()
        words = 0
        for i, s in enumerate(n.sentences):
            if selected and words >= 0.8 * target_words:
                break
            if selected and words + word_count(s) > 1.2 * target_words:
                break
            selected.add(i)
            words += word_count(s)
        parts.append(
            _Part(
                title=n.title,
                sentences=list(n.sentences),
                selected=selected,
                is_gold=False,
                gold_sents=set(),
            )
        )
    return parts


def _render_context(parts: Sequence[_Part]) -> str:
    return " ".join(p.render() for p in parts if p.selected)


def _assemble(
    question: str,
    parts: list[_Part],
    rng: random.Random,
    budget: int,
    withhold_prob: float,
    fill: bool,
) -> tuple[str, list[_Part]]:
    for p in parts:
        p.withheld = rng.random() < withhold_prob
    rng.shuffle(parts)

    def total(ps: Sequence[_Part]) -> int:
        return count_tokens(render_qa_input(question, context=_render_context(ps)))

    kept: list[_Part] = [p for p in parts if p.is_gold]
    if total(kept) > budget:
        raise ValueError("gold sentences alone exceed the token budget")
    for p in parts:
        if p.is_gold:
            continue
        if total(kept + [p]) <= budget:
            kept.append(p)
    order = {id(p): i for i, p in enumerate(parts)}
    kept.sort(key=lambda p: order[id(p)])  # keep the shuffled order

    if fill:
        pool = [
            (p, i)
            for p in kept
            for i in range(len(p.sentences))
            if i not in p.selected
        ]
        rng.shuffle(pool)
        for p, i in pool:
            p.selected.add(i)
            if total(kept) > budget:
                p.selected.discard(i)
    return _render_context(kept), kept


def build_goldplusdistractors(
    question: str,
    answer: str,
    golds: Sequence[PathParagraph],
    negatives: Sequence[PathParagraph],
    rng: random.Random,
    budget: int = BUDGET,
    withhold_prob: float = TITLE_WITHHOLD_PROB,
    dataset: str = "qa",
    group: str = "group1",
) -> QASample:
    """Context = gold sentences plus length-matched distractor paragraphs,
    shuffled, each title withheld with probability 0.1, filled with extra
    sentences toward the 512-token budget (never splitting a sentence)."""
    if not golds:
        raise ValueError("need at least one gold paragraph")
    gold_parts = _gold_parts(golds)
    mean_words = sum(p.words() for p in gold_parts) / len(gold_parts)
    parts = gold_parts + _matched_negative_parts(negatives, mean_words)
    context, kept = _assemble(question, parts, rng, budget, withhold_prob, fill=True)
    return QASample(
        input=render_qa_input(question, context=context),
        target=answer,
        dataset=f"{dataset}_goldplusdistractors",
        group=group,
        meta={
            "titles_total": len(kept),
            "titles_withheld": sum(1 for p in kept if p.withheld),
        },
    )


def build_unanswerable(
    question: str,
    golds: Sequence[PathParagraph],
    negatives: Sequence[PathParagraph],
    rng: random.Random,
    budget: int = BUDGET,
    withhold_prob: float = TITLE_WITHHOLD_PROB,
    dataset: str = "qa",
    group: str = "group1",
) -> QASample:
    """Gold+distractor context with 1..all gold sentences removed (count drawn
    uniformly), so the answer is provably absent; target is the fixed
    no-answer label."""
    if not golds or not any(g.gold_sents for g in golds):
        raise ValueError("need at least one labeled gold sentence")
    gold_parts = _gold_parts(golds)
    mean_words = sum(p.words() for p in gold_parts) / len(gold_parts)

    gold_slots = [
        (p, i) for p in gold_parts for i in sorted(p.selected) if i in p.gold_sents
    ]
    n_drop = rng.randint(1, len(gold_slots))
    for p, i in rng.sample(gold_slots, n_drop):
        p.selected.discard(i)

    parts = gold_parts + _matched_negative_parts(negatives, mean_words)
    context, kept = _assemble(question, parts, rng, budget, withhold_prob, fill=False)
    return QASample(
        # everything dropped and no distractors: bare open-domain form
        input=render_qa_input(question, context=context if context else None),
        target=NO_ANSWER,
        dataset=f"{dataset}_noanswer",
        group=group,
        meta={"gold_sentences_dropped": n_drop, "gold_sentences_total": len(gold_slots)},
    )


# --------------------------------------------------------------------------
# synthetic numeric


def _rand_int(rng: random.Random) -> int:
    return rng.randint(-999, 9999)


def _rand_date(rng: random.Random) -> date:
    span = (_DATE_HI - _DATE_LO).days
    return _DATE_LO + timedelta(days=rng.randrange(span + 1))


def _assignments(pairs: Sequence[tuple[str, object]]) -> str:
    return " ".join(f"{name}={value};" for name, value in pairs)


def _make_sample(
    kind: str, question: str, target: str, pairs: list[tuple[str, object]], group: str
) -> QASample:
    return QASample(
        input=render_qa_input(question, context=_assignments(pairs)),
        target=target,
        dataset=f"synthetic_num_{kind.replace('-', '_')}",
        group=group,
        meta={"kind": kind},
    )


def gen_synthetic_numeric(
    kind: str, rng: random.Random, group: str = "group1"
) -> QASample:
    """One variablised numeric sample: a symbolic question followed by
    variable assignments, always including at least one distractor variable.

    Example form: "x + y \\n x=1; y=3; z=0;" with target "4".
    """
    if kind not in SYNTHETIC_KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {SYNTHETIC_KINDS}")

    def names(n_operands: int, n_distractors: int) -> tuple[list[str], list[str]]:
        picked = list(_VAR_NAMES[: n_operands + n_distractors])
        return picked[:n_operands], picked[n_operands:]

    n_distract = rng.randint(1, 2)

    if kind == "signed-arith":
        n = rng.randint(2, 3)
        ops, distract = names(n, n_distract)
        vals = [_rand_int(rng) for _ in ops]
        signs = [rng.choice("+-") for _ in range(n - 1)]
        question = ops[0] + "".join(f" {s} {o}" for s, o in zip(signs, ops[1:]))
        result = vals[0]
        for s, v in zip(signs, vals[1:]):
            result = result + v if s == "+" else result - v
        pairs = list(zip(ops, vals)) + [(d, _rand_int(rng)) for d in distract]
        return _make_sample(kind, question, str(result), pairs, group)

    if kind == "date-diff":
        ops, distract = names(2, n_distract)
        d1, d2 = _rand_date(rng), _rand_date(rng)
        question = f"{ops[0]} - {ops[1]}"
        target = str(abs((d1 - d2).days))
        pairs = [(ops[0], d1.isoformat()), (ops[1], d2.isoformat())]
        pairs += [(d, _rand_date(rng).isoformat()) for d in distract]
        return _make_sample(kind, question, target, pairs, group)

    if kind == "min-max-avg":
        n = rng.randint(2, 4)
        ops, distract = names(n, n_distract)
        fn = rng.choice(["min", "max", "avg"])
        vals = [_rand_int(rng) for _ in ops]
        if fn == "avg":
            vals[-1] -= sum(vals) % n  # force an integer mean
            result = sum(vals) // n
        elif fn == "min":
            result = min(vals)
        else:
            result = max(vals)
        question = f"{fn}({', '.join(ops)})"
        pairs = list(zip(ops, vals)) + [(d, _rand_int(rng)) for d in distract]
        return _make_sample(kind, question, str(result), pairs, group)

    if kind == "percent":
        ops, distract = names(2, n_distract)
        pct = rng.randint(1, 99)
        base = 100 * rng.randint(1, 99)
        question = f"{ops[0]}% of {ops[1]}"
        target = str(pct * base // 100)
        pairs = [(ops[0], pct), (ops[1], base)]
        pairs += [(d, _rand_int(rng)) for d in distract]
        return _make_sample(kind, question, target, pairs, group)

    if kind in ("yn-nums", "yn-dates"):
        dates = kind == "yn-dates"

        def value():
            return _rand_date(rng) if dates else _rand_int(rng)

        form = rng.choice([">", "<", "between"])
        if form == "between":
            ops, distract = names(3, n_distract)
            x, lo, hi = value(), value(), value()
            lo, hi = min(lo, hi), max(lo, hi)
            question = f"Is {ops[0]} between {ops[1]} and {ops[2]}?"
            truth = lo < x < hi
            vals = [x, lo, hi]
        else:
            ops, distract = names(2, n_distract)
            x, y = value(), value()
            question = f"Is {ops[0]} {form} {ops[1]}?"
            truth = x > y if form == ">" else x < y
            vals = [x, y]
        render = (lambda v: v.isoformat()) if dates else str
        pairs = [(o, render(v)) for o, v in zip(ops, vals)]
        pairs += [(d, render(value())) for d in distract]
        return _make_sample(kind, question, "yes" if truth else "no", pairs, group)

    if kind == "date-min-max":
        n = rng.randint(2, 4)
        ops, distract = names(n, n_distract)
        fn = rng.choice(["min", "max"])
        vals = [_rand_date(rng) for _ in ops]
        result = min(vals) if fn == "min" else max(vals)
        question = f"{fn}({', '.join(ops)})"
        pairs = [(o, v.isoformat()) for o, v in zip(ops, vals)]
        pairs += [(d, _rand_date(rng).isoformat()) for d in distract]
        return _make_sample(kind, question, result.isoformat(), pairs, group)

    # arg-min-max: the answer is the winning variable's name
    n = rng.randint(2, 4)
    ops, distract = names(n, n_distract)
    fn = rng.choice(["argmin", "argmax"])
    vals = rng.sample(range(-999, 10000), n)  # distinct, so no ties
    winner = ops[vals.index(min(vals) if fn == "argmin" else max(vals))]
    question = f"{fn}({', '.join(ops)})"
    pairs = list(zip(ops, vals)) + [(d, _rand_int(rng)) for d in distract]
    return _make_sample(kind, question, winner, pairs, group)


# --------------------------------------------------------------------------
# self-supervised masked-span prediction


def default_span_detector(tokens: Sequence[str]) -> list[tuple[int, int]]:
    """Rule-based entity / noun-phrase spans over whitespace tokens.

    Maximal runs of capitalized tokens count as entities; single lowercase
    tokens with a nouny suffix count as noun phrases. Good enough to steer
    masking; pluggable for anything better.
    """
    spans: list[tuple[int, int]] = []
    i = 0
    while i < len(tokens):
        if tokens[i][:1].isupper():
            j = i
            while j < len(tokens) and tokens[j][:1].isupper():
                j += 1
            spans.append((i, j))
            i = j
        else:
            if tokens[i].rstrip(".,;:!?").endswith(
                ("tion", "ment", "ness", "ity", "ism", "ing", "ers")
            ):
                spans.append((i, i + 1))
            i += 1
    return spans


def build_selfsupervised(
    paragraphs: Sequence[tuple[str, str]],
    rng: random.Random,
    budget: int = BUDGET,
    mask_rate: float = 0.15,
    entity_prob: float = 0.65,
    detector: Callable[[Sequence[str]], list[tuple[int, int]]] = default_span_detector,
    dataset: str = "selfsupervised",
    group: str = "mlm",
) -> QASample:
    """Concatenate titled paragraphs to ~budget tokens, mask spans, and set
    the target to the masked spans only, in order, behind their sentinels.

    Each masked span is an entity/noun-phrase span with probability 0.65
    (when any remain), otherwise a random 1-3 token span.
    """
    context = ""
    for title, text in paragraphs:
        piece = f"{title}: {text}"
        tentative = f"{context} {piece}" if context else piece
        if count_tokens(tentative) <= budget:
            context = tentative
    if not context:
        raise ValueError("no paragraph fits the budget")

    tokens = context.split()
    n_slots = max(1, round(mask_rate * len(tokens) / 3))
    entity_pool = list(detector(tokens))
    rng.shuffle(entity_pool)
    taken: list[tuple[int, int, str]] = []  # (start, end, kind)

    def overlaps(a: int, b: int) -> bool:
        return any(a < e and s < b for s, e, _ in taken)

    for _ in range(n_slots):
        placed = False
        if rng.random() < entity_prob:
            while entity_pool:
                s, e = entity_pool.pop()
                if not overlaps(s, e):
                    taken.append((s, e, "entity"))
                    placed = True
                    break
        if not placed:
            for _ in range(50):
                width = rng.randint(1, 3)
                s = rng.randrange(max(1, len(tokens) - width + 1))
                if not overlaps(s, s + width):
                    taken.append((s, s + width, "random"))
                    break

    taken.sort()
    out: list[str] = []
    target_parts: list[str] = []
    cursor = 0
    for k, (s, e, _) in enumerate(taken):
        out.extend(tokens[cursor:s])
        out.append(f"<mask_{k}>")
        target_parts.append(f"<mask_{k}> " + " ".join(tokens[s:e]))
        cursor = e
    out.extend(tokens[cursor:])

    return QASample(
        input=render_qa_input(" ".join(out)),
        target=" ".join(target_parts),
        dataset=f"{dataset}_mlm",
        group=group,
        meta={
            "spans_entity": sum(1 for _, _, k in taken if k == "entity"),
            "spans_random": sum(1 for _, _, k in taken if k == "random"),
        },
    )


def write_qa_samples(samples: Sequence[QASample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in samples:
            f.write(
                json.dumps(
                    {
                        "input": s.input,
                        "target": s.target,
                        "dataset": s.dataset,
                        "group": s.group,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
