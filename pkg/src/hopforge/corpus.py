"""Paragraph corpus: ingestion, sentence offsets, hyperlink graph, persistence.

Input is JSONL, one document per line:
    {"id": str, "title": str, "paras": [{"text": str, "links": [str, ...]}, ...]}

Paragraphs with seven or fewer whitespace-delimited words are dropped at
ingestion. The built store is immutable and safe for concurrent readers.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .textutil import word_count

log = logging.getLogger(__name__)

MIN_WORDS = 8  # keep paragraphs with more than seven words

_TERMINATORS = set(".!?")


class IngestError(ValueError):
    pass


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Character spans of sentences in ``text``.

    Splits after '.', '!' or '?' when followed by whitespace and an uppercase
    letter, or at end of text. Abbreviations are not special-cased. Spans are
    trimmed of surrounding whitespace; text with no terminator is one span.
    """
    spans: list[tuple[int, int]] = []
    n = len(text)

    def emit(raw_start: int, raw_end: int) -> None:
        s, e = raw_start, raw_end
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if e > s:
            spans.append((s, e))

    start = 0
    i = 0
    while i < n:
        if text[i] in _TERMINATORS:
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            boundary = j >= n or (j > i + 1 and text[j].isupper())
            if boundary:
                emit(start, i + 1)
                start = j
                i = j
                continue
        i += 1
    emit(start, n)
    return spans


@dataclass(frozen=True)
class Paragraph:
    para_id: str
    doc_id: str
    title: str
    text: str
    sentence_spans: list[tuple[int, int]]
    hyperlink_titles: list[str]

    def sentence(self, idx: int) -> str:
        s, e = self.sentence_spans[idx]
        return self.text[s:e]

    def sentences(self) -> list[str]:
        return [self.text[s:e] for s, e in self.sentence_spans]


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    paragraphs: list[Paragraph]


@dataclass
class CorpusStore:
    """Immutable lookup tables over retained paragraphs."""

    paragraphs: dict[str, Paragraph] = field(default_factory=dict)
    title_to_doc: dict[str, str] = field(default_factory=dict)
    doc_first_para: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.paragraphs)

    def __contains__(self, para_id: str) -> bool:
        return para_id in self.paragraphs

    def get(self, para_id: str) -> Paragraph:
        return self.paragraphs[para_id]

    def para_ids(self) -> list[str]:
        return list(self.paragraphs)

    def first_paragraph_of_title(self, title: str) -> Paragraph | None:
        doc_id = self.title_to_doc.get(title)
        if doc_id is None:
            return None
        first = self.doc_first_para.get(doc_id)
        return self.paragraphs[first] if first is not None else None

    def hyperlink_neighbors(self, para_id: str) -> list[Paragraph]:
        """First retained paragraph of each distinct document linked from ``para_id``.

        Link order is preserved, duplicates removed; dangling targets and
        documents whose every paragraph was length-filtered are skipped.
        """
        para = self.paragraphs[para_id]
        seen: set[str] = set()
        out: list[Paragraph] = []
        for title in para.hyperlink_titles:
            if title in seen:
                continue
            seen.add(title)
            neighbor = self.first_paragraph_of_title(title)
            if neighbor is None:
                log.debug("dangling hyperlink %r from %s", title, para_id)
                continue
            out.append(neighbor)
        return out


def ingest(doc_stream: Iterable[dict]) -> CorpusStore:
    """Build a CorpusStore from raw document dicts.

    Raises IngestError on duplicate titles. Paragraphs of <= 7 words are
    dropped; documents may end up with zero retained paragraphs and are
    still registered in the title map.
    """
    store = CorpusStore()
    for doc in doc_stream:
        doc_id = str(doc["id"])
        title = doc["title"]
        if title in store.title_to_doc:
            raise IngestError(f"duplicate document title: {title!r}")
        store.title_to_doc[title] = doc_id
        for idx, para in enumerate(doc.get("paras", [])):
            text = para["text"]
            if word_count(text) < MIN_WORDS:
                continue
            para_id = f"{doc_id}_{idx}"
            record = Paragraph(
                para_id=para_id,
                doc_id=doc_id,
                title=title,
                text=text,
                sentence_spans=split_sentences(text),
                hyperlink_titles=list(para.get("links", [])),
            )
            store.paragraphs[para_id] = record
            store.doc_first_para.setdefault(doc_id, para_id)
    return store


def iter_documents(path: str | Path) -> Iterator[dict]:
    """Yield raw document dicts from a JSONL file."""
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                yield json.loads(line)


def ingest_file(path: str | Path) -> CorpusStore:
    return ingest(iter_documents(path))


def save_store(store: CorpusStore, out_dir: str | Path) -> None:
    """Persist as paragraphs.jsonl plus a title-map sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "paragraphs.jsonl", "w", encoding="utf-8") as f:
        for para in store.paragraphs.values():
            f.write(
                json.dumps(
                    {
                        "para_id": para.para_id,
                        "doc_id": para.doc_id,
                        "title": para.title,
                        "text": para.text,
                        "sentence_spans": [list(s) for s in para.sentence_spans],
                        "hyperlink_titles": para.hyperlink_titles,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    with open(out / "title_map.json", "w", encoding="utf-8") as f:
        json.dump(
            {"title_to_doc": store.title_to_doc, "doc_first_para": store.doc_first_para},
            f,
            ensure_ascii=False,
        )


def load_store(in_dir: str | Path) -> CorpusStore:
    src = Path(in_dir)
    store = CorpusStore()
    with open(src / "paragraphs.jsonl", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            para = Paragraph(
                para_id=rec["para_id"],
                doc_id=rec["doc_id"],
                title=rec["title"],
                text=rec["text"],
                sentence_spans=[tuple(s) for s in rec["sentence_spans"]],
                hyperlink_titles=list(rec["hyperlink_titles"]),
            )
            store.paragraphs[para.para_id] = para
    with open(src / "title_map.json", encoding="utf-8") as f:
        maps = json.load(f)
    store.title_to_doc = maps["title_to_doc"]
    store.doc_first_para = maps["doc_first_para"]
    return store
