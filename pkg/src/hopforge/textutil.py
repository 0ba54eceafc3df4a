"""Shared text utilities: digit-aware tokenization, answer normalization, seeding."""

from __future__ import annotations

import hashlib
import re

_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")
_DIGITS = set("0123456789")


def digit_tokenize(text: str) -> list[str]:
    """Tokenize with every digit split out as its own token.

    Non-digit text splits on whitespace and keeps punctuation attached.
    Inside a whitespace token that contains digits, each digit becomes a
    token and punctuation touching a digit becomes its own token, so
    "12.5km" -> ["1", "2", ".", "5", "km"].
    """
    tokens: list[str] = []
    for word in text.split():
        if not any(c in _DIGITS for c in word):
            tokens.append(word)
            continue
        # alternating runs of digit / non-digit characters
        runs: list[tuple[bool, str]] = []
        for ch in word:
            is_digit = ch in _DIGITS
            if runs and runs[-1][0] == is_digit:
                runs[-1] = (is_digit, runs[-1][1] + ch)
            else:
                runs.append((is_digit, ch))
        for i, (is_digit, chunk) in enumerate(runs):
            if is_digit:
                tokens.extend(chunk)
                continue
            # split punctuation off the digit-facing edges of the chunk
            touches_digit_left = i > 0
            touches_digit_right = i + 1 < len(runs)
            lead = 0
            while touches_digit_left and lead < len(chunk) and not chunk[lead].isalnum():
                tokens.append(chunk[lead])
                lead += 1
            trail = len(chunk)
            trailing: list[str] = []
            while touches_digit_right and trail > lead and not chunk[trail - 1].isalnum():
                trailing.append(chunk[trail - 1])
                trail -= 1
            if trail > lead:
                tokens.append(chunk[lead:trail])
            tokens.extend(reversed(trailing))
    return tokens


def count_tokens(text: str) -> int:
    """Default token counter for context budgets (digit-split whitespace tokens)."""
    return len(digit_tokenize(text))


def word_count(text: str) -> int:
    return len(text.split())


def normalize_answer(text: str) -> str:
    """Lowercase, drop punctuation and articles, collapse whitespace."""
    text = text.lower()
    text = "".join(ch if ch.isalnum() or ch.isspace() else " " for ch in text)
    text = _ARTICLE_RE.sub(" ", text)
    return " ".join(text.split())


def stable_seed(*parts: object) -> int:
    """Deterministic 64-bit seed from arbitrary parts (hash() is salted per process)."""
    key = "\x1f".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "big")
