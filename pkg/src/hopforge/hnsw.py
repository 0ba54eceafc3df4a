"""Graph-based approximate inner-product search.

Optional alternative to ExactIndex for large corpora. Construction is
deterministic for a fixed seed. Exhaustive search stays the reference;
this backend trades a small recall loss for sublinear query time.
"""

from __future__ import annotations

import heapq
import math
import random

import numpy as np

from .index import EmbeddingMatrix


class HNSWIndex:
    def __init__(
        self,
        matrix: EmbeddingMatrix,
        m: int = 16,
        ef_construction: int = 100,
        seed: int = 0,
    ):
        self.matrix = matrix
        self.m = m
        self.m_max0 = 2 * m
        self.ef_construction = ef_construction
        self._ml = 1.0 / math.log(m)
        self._rng = random.Random(seed)
        self._vecs = matrix.vectors
        # adjacency per level: level -> node -> list of neighbor nodes
        self._links: list[dict[int, list[int]]] = []
        self._entry: int | None = None
        self._max_level = -1
        for node in range(len(matrix)):
            self._insert(node)

    def _sim(self, node: int, query: np.ndarray) -> float:
        return float(self._vecs[node] @ query)

    def _random_level(self) -> int:
        return int(-math.log(self._rng.random()) * self._ml)

    def _greedy_step(self, query: np.ndarray, start: int, level: int) -> int:
        cur = start
        cur_sim = self._sim(cur, query)
        improved = True
        while improved:
            improved = False
            for nb in self._links[level].get(cur, ()):
                s = self._sim(nb, query)
                if s > cur_sim:
                    cur, cur_sim = nb, s
                    improved = True
        return cur

    def _search_layer(
        self, query: np.ndarray, entry: int, ef: int, level: int
    ) -> list[tuple[float, int]]:
        """Best-first search at one level; returns (sim, node) best-first."""
        entry_sim = self._sim(entry, query)
        visited = {entry}
        candidates = [(-entry_sim, entry)]  # max-heap on similarity
        found = [(entry_sim, entry)]  # min-heap keeps ef best
        while candidates:
            neg_sim, node = heapq.heappop(candidates)
            if -neg_sim < found[0][0] and len(found) >= ef:
                break
            for nb in self._links[level].get(node, ()):
                if nb in visited:
                    continue
                visited.add(nb)
                s = self._sim(nb, query)
                if len(found) < ef or s > found[0][0]:
                    heapq.heappush(candidates, (-s, nb))
                    heapq.heappush(found, (s, nb))
                    if len(found) > ef:
                        heapq.heappop(found)
        return sorted(found, reverse=True)

    def _insert(self, node: int) -> None:
        level = self._random_level()
        while len(self._links) <= level:
            self._links.append({})
        for lv in range(level + 1):
            self._links[lv].setdefault(node, [])
        if self._entry is None:
            self._entry = node
            self._max_level = level
            return
        query = self._vecs[node]
        cur = self._entry
        for lv in range(self._max_level, level, -1):
            cur = self._greedy_step(query, cur, lv)
        for lv in range(min(level, self._max_level), -1, -1):
            found = self._search_layer(query, cur, self.ef_construction, lv)
            cap = self.m_max0 if lv == 0 else self.m
            neighbors = [n for _, n in found[: self.m]]
            self._links[lv][node] = list(neighbors)
            for nb in neighbors:
                back = self._links[lv][nb]
                back.append(node)
                if len(back) > cap:
                    back.sort(
                        key=lambda x: self._sim(x, self._vecs[nb]), reverse=True
                    )
                    del back[cap:]
            cur = found[0][1]
        if level > self._max_level:
            self._max_level = level
            self._entry = node

    def search(
        self, query: np.ndarray, k: int, ef: int | None = None
    ) -> list[tuple[str, float]]:
        if self._entry is None:
            return []
        query = np.asarray(query, dtype=np.float32)
        ef = max(ef or self.ef_construction, k)
        cur = self._entry
        for lv in range(self._max_level, 0, -1):
            cur = self._greedy_step(query, cur, lv)
        found = self._search_layer(query, cur, ef, 0)
        ids = self.matrix.para_ids
        top = sorted(found, key=lambda x: (-x[0], ids[x[1]]))[:k]
        return [(ids[n], s) for s, n in top]

    def search_batch(
        self, queries: np.ndarray, k: int, ef: int | None = None
    ) -> list[list[tuple[str, float]]]:
        return [self.search(q, k, ef) for q in np.asarray(queries, dtype=np.float32)]
