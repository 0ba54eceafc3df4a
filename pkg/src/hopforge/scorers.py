"""Scorer contracts, input serializations, deterministic stub, oracle, remote client.

Three scorer roles feed the hop loop: an Embedder maps text to vectors for
dense retrieval, a ParagraphScorer rates one retrieved paragraph (p) and its
marked sentences (s_p), and an EvidenceScorer rates a pooled evidence set
(e, s_e). All scores live in [0, 1].

The serializations below are the wire format consumed by real model services
and by the stub alike, so they are pure string functions and every byte
matters.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence, runtime_checkable

import numpy as np
import requests

ENV_SCORER_URL = "HOPFORGE_SCORER_URL"
MAX_EVIDENCE_SENTENCES = 9


class MalformedInputError(ValueError):
    pass


class ScorerError(RuntimeError):
    """Remote scorer failed after retry."""


@dataclass(frozen=True)
class ParagraphScore:
    p: float
    s_p: list[float]
    # answer span is carried for debugging only; the pipeline ignores it
    span: tuple[int, int] | str | None = None


@dataclass(frozen=True)
class EvidenceScore:
    e: float
    s_e: list[float]


@runtime_checkable
class Embedder(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...

    def embed_query(self, query: str) -> np.ndarray: ...


class ParagraphScorer(Protocol):
    def score_paragraph(self, serialized: str) -> ParagraphScore: ...

    def score_paragraphs(self, inputs: Sequence[str]) -> list[ParagraphScore]: ...


class EvidenceScorer(Protocol):
    def score_evidence(self, serialized: str) -> EvidenceScore: ...


# --------------------------------------------------------------------------
# serializations


def serialize_retriever_query(
    question: str, hop_paragraphs: Sequence[tuple[str, str]]
) -> str:
    """Query string for dense retrieval: bare question at hop 0, then one
    ``[QSEP] title | text`` segment per prior hop in hop order."""
    return question + "".join(f" [QSEP] {t} | {x}" for t, x in hop_paragraphs)


def document_text(title: str, text: str) -> str:
    """Document-side embedding input, mirroring the query segments."""
    return f"{title} | {text}"


def serialize_reranker_input(query: str, title: str, sentences: Sequence[str]) -> str:
    if not sentences:
        raise MalformedInputError("reranker input needs at least one sentence")
    marked = "".join(f" [SM] {s}" for s in sentences)
    return f"[CLS] {query} [SEP] yes no [INSUFF] [SEP] {title}{marked} [SEP]"


def serialize_evidence_input(
    question: str, sentences: Sequence[tuple[str, str]]
) -> str:
    if not sentences:
        raise MalformedInputError("evidence input needs at least one sentence")
    if len(sentences) > MAX_EVIDENCE_SENTENCES:
        raise MalformedInputError(
            f"evidence input capped at {MAX_EVIDENCE_SENTENCES} sentences, "
            f"got {len(sentences)}"
        )
    marked = "".join(f" [SM] {t} | {s}" for t, s in sentences)
    return f"[CLS] {question} [SEP] yes no [INSUFF] [SEP]{marked} [SEP]"


def count_sentence_markers(serialized: str) -> int:
    return serialized.count("[SM]")


def parse_reranker_input(serialized: str) -> tuple[str, str, list[str]]:
    """Invert serialize_reranker_input. Raises on anything off-template."""
    if not serialized.startswith("[CLS] ") or not serialized.endswith(" [SEP]"):
        raise MalformedInputError("missing [CLS]/[SEP] framing")
    body = serialized[len("[CLS] ") : -len(" [SEP]")]
    parts = body.split(" [SEP] ")
    if len(parts) != 3 or parts[1] != "yes no [INSUFF]":
        raise MalformedInputError("unexpected reranker segment layout")
    query, _, tail = parts
    pieces = tail.split(" [SM] ")
    if len(pieces) < 2:
        raise MalformedInputError("no sentence markers")
    return query, pieces[0], pieces[1:]


def parse_evidence_input(serialized: str) -> tuple[str, list[tuple[str, str]]]:
    """Invert serialize_evidence_input."""
    if not serialized.startswith("[CLS] ") or not serialized.endswith(" [SEP]"):
        raise MalformedInputError("missing [CLS]/[SEP] framing")
    body = serialized[len("[CLS] ") : -len(" [SEP]")]
    parts = body.split(" [SEP] ")
    if len(parts) != 3 or parts[1] != "yes no [INSUFF]":
        raise MalformedInputError("unexpected evidence segment layout")
    question, _, tail = parts
    if not tail.startswith("[SM] "):
        raise MalformedInputError("no sentence markers")
    sentences: list[tuple[str, str]] = []
    for seg in tail[len("[SM] ") :].split(" [SM] "):
        if " | " not in seg:
            raise MalformedInputError(f"sentence segment without title: {seg!r}")
        title, text = seg.split(" | ", 1)
        sentences.append((title, text))
    return question, sentences


def question_of_query(query: str) -> str:
    """The bare question part of a serialized retriever query."""
    return query.split(" [QSEP] ", 1)[0]


# --------------------------------------------------------------------------
# deterministic stub


def _hash_unit(key: str) -> float:
    """Deterministic score in [0.0001, 0.9999].

    9999 buckets over (0, 1); endpoints excluded so values never collapse to
    an integral float, which keeps shortest-roundtrip JSON identical across
    language runtimes.
    """
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    v = int.from_bytes(digest[:8], "big") % 9999
    return (v + 1) / 10000.0


class StubEmbedder:
    """Content-hash embedder: unit-norm, deterministic, language-portable.

    Components come from SHA-256 blocks keyed "{text}#{block}" and are shifted
    into [32/287, 1] before normalizing, so no coordinate is ever zero or
    integral. The squared-norm accumulation is a sequential loop on purpose:
    it pins down one IEEE-754 evaluation order that any reimplementation can
    reproduce exactly.
    """

    def __init__(self, dim: int = 64):
        if dim < 2:
            raise ValueError("stub embedder needs dim >= 2")
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        comps: list[float] = []
        block = 0
        while len(comps) < self.dim:
            digest = hashlib.sha256(f"{text}#{block}".encode("utf-8")).digest()
            comps.extend((b + 32) / 287.0 for b in digest)
            block += 1
        comps = comps[: self.dim]
        total = 0.0
        for c in comps:
            total += c * c
        norm = math.sqrt(total)
        return np.array([c / norm for c in comps], dtype=np.float64)

    def embed_query(self, query: str) -> np.ndarray:
        return self.embed(query)


class StubParagraphScorer:
    def score_paragraph(self, serialized: str) -> ParagraphScore:
        n = count_sentence_markers(serialized)
        if not serialized.startswith("[CLS] ") or n == 0:
            raise MalformedInputError("not a serialized reranker input")
        return ParagraphScore(
            p=_hash_unit("p#" + serialized),
            s_p=[_hash_unit(f"sp#{i}#{serialized}") for i in range(n)],
        )

    def score_paragraphs(self, inputs: Sequence[str]) -> list[ParagraphScore]:
        return [self.score_paragraph(s) for s in inputs]


class StubEvidenceScorer:
    def score_evidence(self, serialized: str) -> EvidenceScore:
        n = count_sentence_markers(serialized)
        if not serialized.startswith("[CLS] ") or n == 0:
            raise MalformedInputError("not a serialized evidence input")
        return EvidenceScore(
            e=_hash_unit("e#" + serialized),
            s_e=[_hash_unit(f"se#{i}#{serialized}") for i in range(n)],
        )


# --------------------------------------------------------------------------
# gold-annotation oracle

_LOW = 0.05  # ceiling for non-gold oracle scores


def _low_score(key: str) -> float:
    return _hash_unit(key) * _LOW


class OracleParagraphScorer:
    """Scores 1.0 for configured gold (question, title, sentence) triples.

    gold maps question -> set of (title, sentence text). Everything not gold
    gets a deterministic score <= 0.05.
    """

    def __init__(self, gold: dict[str, set[tuple[str, str]]]):
        self.gold = gold

    def score_paragraph(self, serialized: str) -> ParagraphScore:
        query, title, sentences = parse_reranker_input(serialized)
        golds = self.gold.get(question_of_query(query), set())
        s_p = [
            1.0 if (title, s) in golds else _low_score(f"sp#{i}#{serialized}")
            for i, s in enumerate(sentences)
        ]
        p = 1.0 if any(x == 1.0 for x in s_p) else _low_score("p#" + serialized)
        return ParagraphScore(p=p, s_p=s_p)

    def score_paragraphs(self, inputs: Sequence[str]) -> list[ParagraphScore]:
        return [self.score_paragraph(s) for s in inputs]


class OracleEvidenceScorer:
    """Evidence score = fraction of the question's gold sentences present."""

    def __init__(self, gold: dict[str, set[tuple[str, str]]]):
        self.gold = gold

    def score_evidence(self, serialized: str) -> EvidenceScore:
        question, sentences = parse_evidence_input(serialized)
        golds = self.gold.get(question, set())
        present = {pair for pair in sentences if pair in golds}
        e = len(present) / len(golds) if golds else _low_score("e#" + serialized)
        s_e = [
            1.0 if pair in golds else _low_score(f"se#{i}#{serialized}")
            for i, pair in enumerate(sentences)
        ]
        return EvidenceScore(e=e, s_e=s_e)


class ChainOracleEmbedder:
    """One-hot embedder that makes each chain's next gold the top-1 hit.

    Paragraph vectors are one-hot rows. A query vector is the one-hot of the
    chain's next unvisited gold given the gold paragraphs already present in
    the serialized query, so retrieval is forced along the planted chain.
    Exhausted or unknown chains get the zero vector.
    """

    def __init__(
        self,
        chains: dict[str, list[str]],
        paragraphs: Iterable,  # objects with para_id, title, text
    ):
        self.chains = chains
        self._row: dict[str, int] = {}
        self._segment_to_id: dict[str, str] = {}
        for para in paragraphs:
            self._row[para.para_id] = len(self._row)
            self._segment_to_id[f"{para.title} | {para.text}"] = para.para_id
        self.dim = max(len(self._row), 2)

    def _one_hot(self, para_id: str | None) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        if para_id is not None:
            vec[self._row[para_id]] = 1.0
        return vec

    def embed(self, text: str) -> np.ndarray:
        return self._one_hot(self._segment_to_id.get(text))

    def embed_query(self, query: str) -> np.ndarray:
        question = question_of_query(query)
        chain = self.chains.get(question)
        if not chain:
            return self._one_hot(None)
        seen: set[str] = set()
        parts = query.split(" [QSEP] ")
        for segment in parts[1:]:
            pid = self._segment_to_id.get(segment)
            if pid is not None and pid in chain:
                seen.add(pid)
        for pid in chain:
            if pid not in seen:
                return self._one_hot(pid)
        return self._one_hot(None)


# --------------------------------------------------------------------------
# remote client


def _clamp(x: float) -> float:
    return min(max(float(x), 0.0), 1.0)


class _RemoteBase:
    def __init__(
        self,
        base_url: str,
        batch_size: int = 32,
        timeout: float = 30.0,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.batch_size = batch_size
        self.timeout = timeout
        self.session = session or requests.Session()

    def _post(self, route: str, payload: dict) -> dict:
        url = f"{self.base_url}{route}"
        last_exc: Exception | None = None
        for _ in range(2):  # one retry, then give up
            try:
                resp = self.session.post(url, json=payload, timeout=self.timeout)
                if resp.status_code >= 500:
                    last_exc = ScorerError(f"{url} returned {resp.status_code}")
                    continue
                resp.raise_for_status()
                return resp.json()
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_exc = exc
        raise ScorerError(f"scorer request failed: {url}") from last_exc

    def _chunks(self, items: Sequence[str]) -> Iterable[Sequence[str]]:
        for i in range(0, len(items), self.batch_size):
            yield items[i : i + self.batch_size]


class RemoteEmbedder(_RemoteBase):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._dim: int | None = None

    @property
    def dim(self) -> int:
        if self._dim is None:
            self.embed("dimension probe")
        assert self._dim is not None
        return self._dim

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray:
        rows: list[list[float]] = []
        for chunk in self._chunks(texts):
            data = self._post("/embed", {"texts": list(chunk)})
            self._dim = int(data["dim"])
            rows.extend(data["vectors"])
        return np.asarray(rows, dtype=np.float64)

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_query(self, query: str) -> np.ndarray:
        return self.embed(query)


class RemoteParagraphScorer(_RemoteBase):
    def score_paragraphs(self, inputs: Sequence[str]) -> list[ParagraphScore]:
        out: list[ParagraphScore] = []
        for chunk in self._chunks(inputs):
            data = self._post("/score_paragraph", {"inputs": list(chunk)})
            for rec in data["scores"]:
                out.append(
                    ParagraphScore(
                        p=_clamp(rec["p"]),
                        s_p=[_clamp(x) for x in rec["s_p"]],
                        span=rec.get("span"),
                    )
                )
        return out

    def score_paragraph(self, serialized: str) -> ParagraphScore:
        return self.score_paragraphs([serialized])[0]


class RemoteEvidenceScorer(_RemoteBase):
    def score_evidence(self, serialized: str) -> EvidenceScore:
        data = self._post("/score_evidence", {"inputs": [serialized]})
        rec = data["scores"][0]
        return EvidenceScore(e=_clamp(rec["e"]), s_e=[_clamp(x) for x in rec["s_e"]])


@dataclass
class ScorerTriple:
    embedder: object
    paragraph: object
    evidence: object


def scorers_from_env(dim: int = 64) -> ScorerTriple:
    """Remote scorers when HOPFORGE_SCORER_URL is set, else the stub triple."""
    url = os.environ.get(ENV_SCORER_URL)
    if url:
        return ScorerTriple(
            embedder=RemoteEmbedder(url),
            paragraph=RemoteParagraphScorer(url),
            evidence=RemoteEvidenceScorer(url),
        )
    return ScorerTriple(
        embedder=StubEmbedder(dim=dim),
        paragraph=StubParagraphScorer(),
        evidence=StubEvidenceScorer(),
    )
