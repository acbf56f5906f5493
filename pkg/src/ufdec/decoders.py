"""Decoder front end over the compiled kernels.

A Workspace owns every scratch array for one Tanner graph; decoding a
shot mutates them and undoes the mutations afterwards, so a workspace
can be reused across millions of shots without reallocation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .graphs import TannerGraph

ALGORITHMS = {
    "simple": K.ALG_SIMPLE,
    "improved": K.ALG_IMPROVED,
    "variant": K.ALG_VARIANT,
    "qldpc": K.ALG_QLDPC,
}

_STATUS_NAMES = {
    K.OK: "ok",
    K.NONCONV: "nonconvergent",
    K.DEGENERATE: "degenerate",
}


@dataclass
class DecodeOutcome:
    """Result of decoding one syndrome."""
    status: str
    correction: np.ndarray
    visited_count: int

    @property
    def converged(self):
        return self.status == "ok"


class Workspace:
    """All per-graph scratch state for the kernels."""

    def __init__(self, graph: TannerGraph):
        self.graph = graph
        n_data = graph.n_data
        n = graph.n_total
        capL = 8 * n + 64
        self.capL = capL

        self.parent = np.arange(n, dtype=np.int32)
        self.csize = np.ones(n, dtype=np.int32)
        self.parity = np.zeros(n, dtype=np.uint8)
        self.invalid = np.zeros(n, dtype=np.uint8)
        self.scount = np.zeros(n, dtype=np.int32)
        self.visited = np.zeros(n, dtype=np.uint8)
        self.indirty = np.zeros(n, dtype=np.uint8)
        self.vdirty = np.ones(n, dtype=np.uint8)
        self.skip_head = np.full(n, -1, dtype=np.int32)
        self.skip_tail = np.full(n, -1, dtype=np.int32)
        self.skip_next = np.full(n, -1, dtype=np.int32)
        self.in_skip = np.zeros(n, dtype=np.uint8)
        self.mem_head = np.arange(n, dtype=np.int32)
        self.mem_tail = np.arange(n, dtype=np.int32)
        self.mem_next = np.full(n, -1, dtype=np.int32)
        self.cl_id = np.full(n, -1, dtype=np.int32)
        self.fill = np.zeros(n + 1, dtype=np.int32)

        self.erased = np.zeros(n_data, dtype=np.uint8)
        self.err = np.zeros(n_data, dtype=np.uint8)
        self.corr = np.zeros(n_data, dtype=np.uint8)
        self.syn = np.zeros(n, dtype=np.uint8)
        self.seen = np.zeros(n, dtype=np.uint8)

        self.L = np.zeros(capL, dtype=np.int32)
        self.L2 = np.zeros(capL, dtype=np.int32)
        self.touched = np.zeros(n, dtype=np.int32)
        self.er_list = np.zeros(n_data, dtype=np.int32)
        self.err_list = np.zeros(n_data, dtype=np.int32)
        self.syn_list = np.zeros(n, dtype=np.int32)
        self.corr_list = np.zeros(n_data, dtype=np.int32)
        self.order = np.zeros(n, dtype=np.int32)
        self.tree_par = np.full(n, -1, dtype=np.int32)
        self.bfs_mark = np.zeros(n, dtype=np.uint8)
        self.cl_nodes = np.zeros(n, dtype=np.int32)
        self.cl_start = np.zeros(n + 1, dtype=np.int32)
        self.cl_checks = np.zeros(n, dtype=np.int32)
        self.cl_data = np.zeros(n_data, dtype=np.int32)
        self.local_idx = np.full(n_data, -1, dtype=np.int32)
        self.pivcol = np.zeros(n_data + 1, dtype=np.int32)
        self.xval = np.zeros(n_data + 1, dtype=np.uint8)

    def state_args(self):
        return (self.parent, self.csize, self.parity, self.invalid,
                self.scount, self.visited, self.indirty, self.vdirty,
                self.skip_head, self.skip_tail, self.skip_next, self.in_skip,
                self.mem_head, self.mem_tail, self.mem_next,
                self.cl_id, self.fill)

    def scratch_args(self):
        return (self.order, self.tree_par, self.bfs_mark,
                self.cl_nodes, self.cl_start,
                self.cl_checks, self.cl_data, self.local_idx,
                self.pivcol, self.xval)


def _alg_id(alg):
    try:
        return ALGORITHMS[alg]
    except KeyError:
        raise ValueError("unknown algorithm %r (choose from %s)"
                         % (alg, sorted(ALGORITHMS)))


class UnionFindDecoder:
    """Decode syndromes on one Tanner graph with a chosen validation
    algorithm ("simple", "improved", "variant" or "qldpc")."""

    def __init__(self, graph: TannerGraph, alg="improved",
                 merge_shortcut=False):
        self.graph = graph
        self.alg = alg
        self.alg_id = _alg_id(alg)
        self.merge_shortcut = bool(merge_shortcut)
        self.ws = Workspace(graph)

    def decode(self, syndrome, erasure=None) -> DecodeOutcome:
        """Decode one shot.

        syndrome: uint8/bool array of length n_check.
        erasure: optional uint8/bool array of length n_data marking the
        heralded erasures (must be erasable positions for decoding
        graphs, unchecked here).
        """
        g = self.graph
        ws = self.ws
        syndrome = np.asarray(syndrome)
        if syndrome.shape != (g.n_check,):
            raise ValueError("syndrome must have length n_check=%d"
                             % g.n_check)
        syn_ids = np.flatnonzero(syndrome).astype(np.int32) + g.n_data
        n_s = len(syn_ids)
        ws.syn_list[:n_s] = syn_ids
        ws.syn[syn_ids] = 1
        if erasure is not None:
            erasure = np.asarray(erasure)
            if erasure.shape != (g.n_data,):
                raise ValueError("erasure must have length n_data=%d"
                                 % g.n_data)
            er_ids = np.flatnonzero(erasure).astype(np.int32)
        else:
            er_ids = np.empty(0, dtype=np.int32)
        n_e = len(er_ids)
        ws.er_list[:n_e] = er_ids
        ws.erased[er_ids] = 1

        status, vc, tcount, n_corr = K.decode_shot(
            g.indptr, g.indices, g.n_data, self.alg_id, self.merge_shortcut,
            *ws.state_args(),
            ws.erased, ws.err, ws.corr, ws.syn,
            ws.L, ws.L2, ws.touched, ws.er_list, n_e, ws.syn_list, n_s,
            ws.corr_list, *ws.scratch_args())

        correction = np.zeros(g.n_data, dtype=np.uint8)
        correction[ws.corr_list[:n_corr]] = 1
        K.state_reset(g.n_data, self.alg_id, ws.parent, ws.csize, ws.parity, ws.invalid,
                      ws.scount, ws.visited, ws.indirty, ws.vdirty,
                      ws.skip_head, ws.skip_tail, ws.skip_next, ws.in_skip,
                      ws.mem_head, ws.mem_tail, ws.mem_next, ws.cl_id,
                      ws.erased, ws.err, ws.corr, ws.syn,
                      ws.touched, tcount, ws.er_list, n_e,
                      ws.err_list, 0, ws.corr_list, n_corr,
                      ws.syn_list, n_s)
        return DecodeOutcome(_STATUS_NAMES[status], correction, int(vc))


def run_batch(graph, mask, p, eps, seed, shots, alg="improved",
              merge_shortcut=False, lo=0, ws=None):
    """Monte Carlo loop: sample, decode, verify for `shots` trials.

    mask is the packed failure mask per data node (see verifier).
    Returns a dict with failures, nonconv, visited_mean, visited_max.
    """
    if ws is None:
        ws = Workspace(graph)
    g = graph
    erasable_list = np.flatnonzero(g.erasable_mask()).astype(np.int32)
    failures, nonconv, vsum, vmax = K.run_batch(
        g.indptr, g.indices, g.n_data, erasable_list,
        np.ascontiguousarray(mask, dtype=np.uint64),
        float(p), float(eps), np.int64(seed),
        np.int64(lo), np.int64(lo + shots),
        _alg_id(alg), bool(merge_shortcut),
        *ws.state_args(),
        ws.erased, ws.err, ws.corr, ws.syn, ws.seen,
        ws.L, ws.L2, ws.touched, ws.er_list, ws.err_list,
        ws.syn_list, ws.corr_list, *ws.scratch_args())
    return {
        "shots": int(shots),
        "failures": int(failures),
        "nonconv": int(nonconv),
        "visited_mean": float(vsum / shots) if shots else 0.0,
        "visited_max": int(vmax),
    }
