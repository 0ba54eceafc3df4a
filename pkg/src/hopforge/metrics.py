"""Answer metrics and the paired bootstrap significance test.

Text normalization everywhere: lowercase, strip punctuation and articles,
collapse whitespace, then split with every digit as its own token.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .textutil import digit_tokenize, normalize_answer

BINARY_LABELS = ("yes", "no")


def metric_tokens(text: str) -> list[str]:
    return digit_tokenize(normalize_answer(text))


def token_f1(prediction: str, gold: str) -> float:
    pred, gold_t = metric_tokens(prediction), metric_tokens(gold)
    if not pred or not gold_t:
        return float(pred == gold_t)
    common = Counter(pred) & Counter(gold_t)
    num_same = sum(common.values())
    if num_same == 0:
        return 0.0
    precision = num_same / len(pred)
    recall = num_same / len(gold_t)
    return 2 * precision * recall / (precision + recall)


def _contains_number(pred_tokens: list[str], digits: list[str]) -> bool:
    """True when the digit sequence appears as a maximal digit run."""
    n, m = len(pred_tokens), len(digits)
    for i in range(n - m + 1):
        if pred_tokens[i : i + m] != digits:
            continue
        before_digit = i > 0 and pred_tokens[i - 1].isdigit()
        after_digit = i + m < n and pred_tokens[i + m].isdigit()
        if not before_digit and not after_digit:
            return True
    return False


def numeracy_f1(prediction: str, gold: str) -> float:
    """Token F1 that collapses to 0 when a numeric gold's number is missing
    from the prediction, whatever the other token overlap."""
    norm_gold = normalize_answer(gold)
    if norm_gold.isdigit():
        if not _contains_number(metric_tokens(prediction), list(norm_gold)):
            return 0.0
    return token_f1(prediction, gold)


def binary_match(prediction: str, gold: str) -> int:
    """1 iff the gold label appears in the prediction and the opposing label
    does not (token containment after normalization)."""
    norm_gold = normalize_answer(gold)
    if norm_gold not in BINARY_LABELS:
        raise ValueError(f"gold must be yes or no, got {gold!r}")
    opposing = BINARY_LABELS[1 - BINARY_LABELS.index(norm_gold)]
    tokens = set(metric_tokens(prediction))
    return int(norm_gold in tokens and opposing not in tokens)


def _strip_option_letter(option: str) -> str:
    text = option.strip()
    if len(text) >= 3 and text[0] == "(" and text[2] == ")":
        text = text[3:]
    return text.strip()


def multichoice_em(prediction: str, options: Sequence[str], gold: str) -> int:
    """Pick the option with highest token-F1 overlap against the prediction
    (ties go to the first listed option); 1 iff that option is the gold."""
    if not options:
        raise ValueError("options must be non-empty")
    texts = [_strip_option_letter(o) for o in options]
    overlaps = [token_f1(prediction, t) for t in texts]
    selected = max(range(len(texts)), key=lambda i: (overlaps[i], -i))
    norm_gold = normalize_answer(_strip_option_letter(gold))
    gold_idx = next(
        (i for i, t in enumerate(texts) if normalize_answer(t) == norm_gold), None
    )
    if gold_idx is None:
        raise ValueError(f"gold {gold!r} not among options")
    return int(selected == gold_idx)


def sentence_em_f1(
    predicted: set[tuple[str, int]],
    gold: set[tuple[str, int]],
    strict: bool = False,
) -> tuple[int, float]:
    """EM = 1 iff every gold sentence was predicted (strict=True additionally
    forbids extras); F1 over the (para_id, sent_idx) sets."""
    if not gold:
        raise ValueError("gold sentence set must be non-empty")
    inter = len(predicted & gold)
    em = int(gold <= predicted) if not strict else int(predicted == gold)
    if not predicted or inter == 0:
        return em, 0.0
    precision = inter / len(predicted)
    recall = inter / len(gold)
    return em, 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class MetricResult:
    name: str
    per_sample: list[float]
    mean: float

    @classmethod
    def from_scores(cls, name: str, scores: Sequence[float]) -> "MetricResult":
        scores = list(scores)
        return cls(name=name, per_sample=scores, mean=float(np.mean(scores)) if scores else 0.0)


@dataclass(frozen=True)
class BootstrapResult:
    p_value: float
    resamples: int
    significant: bool  # p < 0.05


def paired_bootstrap(
    scores_a: Sequence[float],
    scores_b: Sequence[float],
    resamples: int = 10000,
    rng: np.random.Generator | int | None = None,
) -> BootstrapResult:
    """Test whether system a beats system b on paired per-sample scores.

    p = fraction of bootstrap resamples (sample indices drawn with
    replacement) where mean(b) >= mean(a); significant iff p < 0.05.
    """
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"score vectors must match: {a.shape} vs {b.shape}")
    if isinstance(rng, (int, type(None))):
        rng = np.random.default_rng(rng)
    diff = a - b
    n = len(diff)
    idx = rng.integers(0, n, size=(resamples, n))
    means = diff[idx].mean(axis=1)
    p = float(np.mean(means <= 0.0))
    return BootstrapResult(p_value=p, resamples=resamples, significant=p < 0.05)
