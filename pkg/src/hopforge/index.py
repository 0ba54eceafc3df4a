"""Dense vector index: exact inner-product search and binary persistence.

The on-disk format is a fixed header followed by row-major float32 data,
little-endian throughout:

    magic "HFVX" | u32 dim | u64 count | count*dim float32

A JSONL sidecar maps row number to paragraph id, one id per line in row order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import CorpusStore
from .scorers import document_text

MAGIC = b"HFVX"
_HEADER = struct.Struct("<4sIQ")


class VectorFileError(ValueError):
    pass


class IndexBuildError(RuntimeError):
    pass


@dataclass
class EmbeddingMatrix:
    """Row-major float32 paragraph embeddings with aligned ids."""

    vectors: np.ndarray  # (count, dim) float32
    para_ids: list[str]

    def __post_init__(self) -> None:
        self.vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be 2-dimensional")
        if self.vectors.shape[0] != len(self.para_ids):
            raise ValueError(
                f"row count {self.vectors.shape[0]} != id count {len(self.para_ids)}"
            )

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]


def build_index(store: CorpusStore, embedder) -> EmbeddingMatrix:
    """Embed every retained paragraph as ``title | text``, in store order."""
    para_ids: list[str] = []
    rows: list[np.ndarray] = []
    for pid in store.para_ids():
        para = store.get(pid)
        vec = np.asarray(embedder.embed(document_text(para.title, para.text)))
        if vec.ndim != 1 or vec.shape[0] != embedder.dim:
            raise IndexBuildError(
                f"embedder returned shape {vec.shape} for {pid}, expected ({embedder.dim},)"
            )
        para_ids.append(pid)
        rows.append(vec)
    vectors = (
        np.stack(rows) if rows else np.zeros((0, embedder.dim), dtype=np.float32)
    )
    return EmbeddingMatrix(vectors=vectors, para_ids=para_ids)


class ExactIndex:
    """Brute-force maximum inner product search.

    Exhaustive and deterministic: ties in score break toward the
    lexicographically smaller paragraph id.
    """

    def __init__(self, matrix: EmbeddingMatrix):
        self.matrix = matrix

    def search(self, query: np.ndarray, k: int) -> list[tuple[str, float]]:
        query = np.asarray(query, dtype=np.float32)
        if query.ndim != 1 or query.shape[0] != self.matrix.dim:
            raise ValueError(
                f"query must have shape ({self.matrix.dim},), got {query.shape}"
            )
        k = min(k, len(self.matrix))
        # one matvec per query, batched or not: BLAS GEMM rounds differently
        # at different batch shapes, and bit-stable scores matter here
        row = self.matrix.vectors @ query
        ids = self.matrix.para_ids
        order = sorted(range(len(row)), key=lambda i: (-row[i], ids[i]))[:k]
        return [(ids[i], float(row[i])) for i in order]

    def search_batch(
        self, queries: np.ndarray, k: int
    ) -> list[list[tuple[str, float]]]:
        queries = np.asarray(queries, dtype=np.float32)
        if queries.ndim != 2 or queries.shape[1] != self.matrix.dim:
            raise ValueError(
                f"queries must be (n, {self.matrix.dim}), got {queries.shape}"
            )
        return [self.search(q, k) for q in queries]


def save_vectors(matrix: EmbeddingMatrix, path: str | Path) -> None:
    path = Path(path)
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, matrix.dim, len(matrix)))
        f.write(matrix.vectors.astype("<f4", copy=False).tobytes(order="C"))
    with open(path.with_suffix(path.suffix + ".ids.jsonl"), "w", encoding="utf-8") as f:
        for pid in matrix.para_ids:
            f.write(json.dumps({"para_id": pid}) + "\n")


def load_vectors(path: str | Path) -> EmbeddingMatrix:
    path = Path(path)
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise VectorFileError("truncated header")
        magic, dim, count = _HEADER.unpack(header)
        if magic != MAGIC:
            raise VectorFileError(f"bad magic {magic!r}")
        payload = f.read(count * dim * 4)
        if len(payload) != count * dim * 4:
            raise VectorFileError(
                f"expected {count * dim * 4} data bytes, got {len(payload)}"
            )
        extra = f.read(1)
        if extra:
            raise VectorFileError("trailing bytes after vector data")
    vectors = np.frombuffer(payload, dtype="<f4").reshape(count, dim)
    para_ids: list[str] = []
    with open(path.with_suffix(path.suffix + ".ids.jsonl"), encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                para_ids.append(json.loads(line)["para_id"])
    if len(para_ids) != count:
        raise VectorFileError(f"sidecar has {len(para_ids)} ids, header says {count}")
    return EmbeddingMatrix(vectors=vectors.copy(), para_ids=para_ids)
