"""Tanner and decoding graphs.

Nodes live in one flat index space: data nodes occupy [0, n_data),
check nodes occupy [n_data, n_data + n_check).  Adjacency is stored in
CSR form over the full node space so the union-find hot loop walks a
single contiguous array.
"""

from __future__ import annotations

import numpy as np

from .gf2 import Gf2Matrix

SPACE_LIKE = 0
TIME_LIKE = 1


class TannerGraph:
    """Bipartite adjacency between data nodes and check nodes of one sector."""

    def __init__(self, n_data: int, n_check: int, check_supports: list[list[int]]):
        if len(check_supports) != n_check:
            raise ValueError("one support list per check expected")
        self.n_data = n_data
        self.n_check = n_check
        n_total = n_data + n_check
        deg = np.zeros(n_total, dtype=np.int64)
        for ci, sup in enumerate(check_supports):
            for d in sup:
                if not 0 <= d < n_data:
                    raise ValueError(f"data index {d} out of range")
                deg[d] += 1
            deg[n_data + ci] = len(sup)
        indptr = np.zeros(n_total + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        indices = np.empty(indptr[-1], dtype=np.int32)
        fill = indptr[:-1].copy()
        for ci, sup in enumerate(check_supports):
            c = n_data + ci
            for d in sup:
                indices[fill[d]] = c
                fill[d] += 1
                indices[fill[c]] = d
                fill[c] += 1
        self.indptr = indptr
        self.indices = indices

    @property
    def n_total(self) -> int:
        return self.n_data + self.n_check

    def neighbors(self, node: int) -> np.ndarray:
        return self.indices[self.indptr[node]:self.indptr[node + 1]]

    def degree(self, node: int) -> int:
        return int(self.indptr[node + 1] - self.indptr[node])

    def is_check(self, node: int) -> bool:
        return node >= self.n_data

    def check_matrix(self) -> Gf2Matrix:
        """The parity-check matrix this graph encodes (rows = checks)."""
        h = Gf2Matrix(self.n_check, self.n_data)
        for ci in range(self.n_check):
            for d in self.neighbors(self.n_data + ci):
                h.set(ci, int(d), 1)
        return h

    @classmethod
    def from_check_matrix(cls, h: Gf2Matrix) -> "TannerGraph":
        supports = [h.row(r).support() for r in range(h.rows)]
        return cls(h.cols, h.rows, supports)

    def erasable_mask(self) -> np.ndarray:
        """Which data nodes the erasure channel may hit (all, here)."""
        return np.ones(self.n_data, dtype=np.uint8)

    def __repr__(self):
        return f"TannerGraph(n_data={self.n_data}, n_check={self.n_check})"


class DecodingGraph(TannerGraph):
    """Tanner graph with per-data-node mechanism metadata.

    Used for the space-time (repeated-measurement) syndrome graph, where
    space-like data nodes are physical qubits at a given round and
    time-like data nodes are measurement-error mechanisms.  Time-like
    mechanisms are never erasable.
    """

    def __init__(
        self,
        n_data: int,
        n_check: int,
        check_supports: list[list[int]],
        kind: np.ndarray,
        erasable: np.ndarray,
        coords: np.ndarray | None = None,
    ):
        super().__init__(n_data, n_check, check_supports)
        kind = np.asarray(kind, dtype=np.uint8)
        erasable = np.asarray(erasable, dtype=np.uint8)
        if kind.shape != (n_data,) or erasable.shape != (n_data,):
            raise ValueError("metadata arrays must cover all data nodes")
        if np.any((kind == TIME_LIKE) & (erasable == 1)):
            raise ValueError("time-like mechanisms cannot be erasable")
        self.kind = kind
        self.erasable = erasable
        self.coords = coords

    def erasable_mask(self) -> np.ndarray:
        return self.erasable

    def __repr__(self):
        return (
            f"DecodingGraph(n_data={self.n_data}, n_check={self.n_check}, "
            f"n_timelike={int(np.sum(self.kind == TIME_LIKE))})"
        )
