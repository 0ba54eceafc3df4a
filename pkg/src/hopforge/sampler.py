"""Two-stage multitask sampling schedule and reduced dev-set selection.

Stage 1 gates the self-supervised MLM task at probability 0.35 and draws
everything else error-based. Stage 2 gates group 2 at probability 0.8
(error-based within it) and falls back to a uniform draw over group 1,
which deliberately never uses error-based sampling.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

LAMBDA_MLM = 0.35
LAMBDA_GROUP2 = 0.8
EPSILON = 0.01

GROUPS = ("group1", "group2", "mlm")


@dataclass
class TaskSpec:
    name: str
    group: str  # group1 | group2 | mlm
    last_dev_accuracy: float | None = None
    sample_count: int = 0

    def __post_init__(self) -> None:
        if self.group not in GROUPS:
            raise ValueError(f"unknown group {self.group!r}")
        if self.last_dev_accuracy is not None and not 0 <= self.last_dev_accuracy <= 1:
            raise ValueError("accuracy outside [0, 1]")


@dataclass
class Schedule:
    stage: int = 1
    lambda_mlm: float = LAMBDA_MLM
    lambda_group2: float = LAMBDA_GROUP2
    epsilon: float = EPSILON

    def __post_init__(self) -> None:
        if self.stage not in (1, 2):
            raise ValueError("stage must be 1 or 2")
        for lam in (self.lambda_mlm, self.lambda_group2):
            if not 0 <= lam <= 1:
                raise ValueError("gate probability outside [0, 1]")


def error_weights(tasks: Sequence[TaskSpec], epsilon: float = EPSILON) -> list[float]:
    """w_i proportional to (1 - accuracy_i) + epsilon; unset accuracy is 0,
    so never-validated tasks get maximal weight."""
    raw = [(1.0 - (t.last_dev_accuracy or 0.0)) + epsilon for t in tasks]
    total = sum(raw)
    return [w / total for w in raw]


def _error_draw(tasks: list[TaskSpec], rng: random.Random, epsilon: float) -> str:
    weights = error_weights(tasks, epsilon)
    return rng.choices([t.name for t in tasks], weights=weights, k=1)[0]


def next_task(
    schedule: Schedule, tasks: Sequence[TaskSpec], rng: random.Random
) -> str:
    by_group: dict[str, list[TaskSpec]] = {g: [] for g in GROUPS}
    for t in tasks:
        by_group[t.group].append(t)

    if schedule.stage == 1:
        mlm = by_group["mlm"]
        others = by_group["group1"] + by_group["group2"]
        if not mlm:
            raise ValueError("stage 1 needs an mlm task")
        if rng.random() < schedule.lambda_mlm:
            return mlm[0].name
        if not others:
            raise ValueError("stage 1 needs at least one non-mlm task")
        return _error_draw(others, rng, schedule.epsilon)

    group1, group2 = by_group["group1"], by_group["group2"]
    if rng.random() < schedule.lambda_group2:
        if not group2:
            raise ValueError("stage 2 needs at least one group2 task")
        return _error_draw(group2, rng, schedule.epsilon)
    if not group1:
        raise ValueError("stage 2 needs at least one group1 task")
    return rng.choice(group1).name


def reduce_dev(sample_count: int) -> list[int]:
    """Indices of a dev subset: every nth sample with n = round(c / 1250),
    floored at 1, so large dev sets shrink to about 1250 items."""
    if sample_count < 1:
        raise ValueError("sample count must be >= 1")
    n = max(1, round(sample_count / 1250))
    return list(range(0, sample_count, n))


@dataclass
class DrawLog:
    draws: list[str] = field(default_factory=list)

    def record(self, name: str) -> None:
        self.draws.append(name)

    def frequencies(self) -> dict[str, float]:
        counts = Counter(self.draws)
        total = len(self.draws)
        return {name: c / total for name, c in sorted(counts.items())}


def run_schedule(
    schedule: Schedule,
    tasks: Sequence[TaskSpec],
    draws: int,
    rng: random.Random,
) -> DrawLog:
    log = DrawLog()
    for _ in range(draws):
        log.record(next_task(schedule, tasks, rng))
    return log
