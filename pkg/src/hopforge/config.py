"""Flat key=value config files and their mapping onto pipeline settings.

Format: one `key = value` per line, `#` comments, dotted keys for grouping.
Values coerce to bool/int/float when they look like one; quotes force string.

    t_max = 4
    k = 150
    fusion.w = 0.5
    evidence.threshold = 0.1
    evidence.rerank_pool = 9
    max_seq_length = 512
    workers = 4
    scorer.batch_size = 12
    embedder.dim = 64
"""

from __future__ import annotations

import logging
from pathlib import Path

from .pipeline import PipelineConfig

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


def _coerce(raw: str):
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
        return raw[1:-1]
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def parse_config(path: str | Path) -> dict[str, object]:
    values: dict[str, object] = {}
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{n}: expected key = value")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if not key:
                raise ConfigError(f"{path}:{n}: empty key")
            values[key] = _coerce(raw.split("#", 1)[0].strip())
    return values


_PIPELINE_KEYS = {
    "t_max": "t_max",
    "k": "k",
    "fusion.w": "w",
    "evidence.threshold": "threshold",
    "evidence.rerank_pool": "rerank_pool",
    "max_seq_length": "budget",
    "workers": "workers",
}


def pipeline_config_from(values: dict[str, object]) -> PipelineConfig:
    kwargs = {}
    for key, attr in _PIPELINE_KEYS.items():
        if key in values:
            kwargs[attr] = values[key]
    known_elsewhere = ("scorer.batch_size", "scorer.url", "embedder.dim")
    for key in values:
        if key not in _PIPELINE_KEYS and key not in known_elsewhere:
            log.warning("ignoring unknown config key %r", key)
    return PipelineConfig(**kwargs)
