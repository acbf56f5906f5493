"""Cluster forest: union-find with per-cluster bookkeeping.

Thin Python wrapper around the compiled helpers so the merge semantics
(weighted union, parity / validity tracking, skipped-node lists) can be
exercised and tested directly.  The decoding hot paths use the same
compiled helpers, not this class.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K


class ClusterForest:
    """Disjoint clusters over a fixed set of nodes.

    mode "topological" tracks syndrome parity per cluster; a cluster is
    invalid while its parity is odd, and n_invalid counts odd clusters.
    mode "qldpc" tracks an explicit invalid flag plus a syndrome count
    and a member list per cluster; validity there is decided externally
    (by solving the cluster system), so merges only OR the flags.
    """

    def __init__(self, n_nodes, mode="topological"):
        if mode not in ("topological", "qldpc"):
            raise ValueError("unknown forest mode: %r" % (mode,))
        self.n_nodes = int(n_nodes)
        self.mode = mode
        n = self.n_nodes
        self.parent = np.arange(n, dtype=np.int32)
        self.csize = np.ones(n, dtype=np.int32)
        self.parity = np.zeros(n, dtype=np.uint8)
        self.invalid = np.zeros(n, dtype=np.uint8)
        self.scount = np.zeros(n, dtype=np.int32)
        self.vdirty = np.ones(n, dtype=np.uint8)
        self.skip_head = np.full(n, -1, dtype=np.int32)
        self.skip_tail = np.full(n, -1, dtype=np.int32)
        self.skip_next = np.full(n, -1, dtype=np.int32)
        self.in_skip = np.zeros(n, dtype=np.uint8)
        self.mem_head = np.arange(n, dtype=np.int32)
        self.mem_tail = np.arange(n, dtype=np.int32)
        self.mem_next = np.full(n, -1, dtype=np.int32)
        self.n_invalid = 0

    def find(self, x):
        return int(K.uf_find(self.parent, int(x)))

    def set_parity(self, x, value):
        """Mark node x's singleton cluster parity (before any merges)."""
        r = self.find(x)
        old = int(self.parity[r])
        new = int(value) & 1
        self.parity[r] = new
        self.n_invalid += new - old

    def set_invalid(self, x, value):
        r = self.find(x)
        old = int(self.invalid[r])
        new = 1 if value else 0
        self.invalid[r] = new
        self.n_invalid += new - old
        if new != old:
            self.vdirty[r] = 1

    def add_syndrome_count(self, x, count=1):
        self.scount[self.find(x)] += int(count)

    def merge(self, a, b):
        """Union the clusters of a and b; returns the surviving root."""
        ra = self.find(a)
        rb = self.find(b)
        if ra == rb:
            return ra
        if self.mode == "topological":
            root, self.n_invalid = K.uf_merge_topo(
                self.parent, self.csize, self.parity,
                self.skip_head, self.skip_tail, self.skip_next,
                ra, rb, self.n_invalid)
        else:
            root, self.n_invalid = K.uf_merge_qldpc(
                self.parent, self.csize, self.invalid, self.scount,
                self.vdirty, self.skip_head, self.skip_tail, self.skip_next,
                self.mem_head, self.mem_tail, self.mem_next,
                ra, rb, self.n_invalid)
        return int(root)

    def size(self, x):
        return int(self.csize[self.find(x)])

    def cluster_parity(self, x):
        return int(self.parity[self.find(x)])

    def is_invalid(self, x):
        r = self.find(x)
        if self.mode == "topological":
            return bool(self.parity[r])
        return bool(self.invalid[r])

    def skip_append(self, x):
        """Put node x on its cluster's skipped list (once)."""
        if self.in_skip[x]:
            return
        r = self.find(x)
        self.in_skip[x] = 1
        if self.skip_head[r] == -1:
            self.skip_head[r] = x
        else:
            self.skip_next[self.skip_tail[r]] = x
        self.skip_tail[r] = x
        self.skip_next[x] = -1

    def skipped(self, x):
        """Snapshot of the skipped list of x's cluster, in order."""
        out = []
        node = int(self.skip_head[self.find(x)])
        while node != -1:
            out.append(node)
            node = int(self.skip_next[node])
        return out

    def drain_skipped(self, x):
        """Remove and return the cluster's skipped list."""
        r = self.find(x)
        out = self.skipped(r)
        for node in out:
            self.in_skip[node] = 0
        self.skip_head[r] = -1
        self.skip_tail[r] = -1
        return out

    def members(self, x):
        """Cluster member list (qldpc mode keeps these linked)."""
        if self.mode != "qldpc":
            raise RuntimeError("member lists are tracked in qldpc mode only")
        out = []
        node = int(self.mem_head[self.find(x)])
        while node != -1:
            out.append(node)
            node = int(self.mem_next[node])
        return out
