"""Noise channel: i.i.d. errors plus heralded erasures.

Every erasable data node is erased with probability eps; an erased node
carries a uniformly random error (the error channel is replaced there,
not composed).  Every non-erased data node errs with probability p.
Sampling is counter based: the stream for shot i depends only on
(seed, i, mechanism), so any shot can be regenerated in isolation and
the eps=0 slice of a grid reproduces a pure error-channel run bit for
bit under the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .graphs import TannerGraph


@dataclass(frozen=True)
class NoiseParams:
    p: float
    eps: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("eps must lie in [0, 1]")


@dataclass
class Shot:
    """One sampled trial."""
    erasure: np.ndarray  # uint8[n_data]
    error: np.ndarray    # uint8[n_data]
    syndrome: np.ndarray  # uint8[n_check]


def sample_shot(graph: TannerGraph, params: NoiseParams,
                seed: int, shot: int) -> Shot:
    """Sample erasure, error and syndrome for one trial."""
    n_data = graph.n_data
    n_total = graph.n_total
    erased = np.zeros(n_data, dtype=np.uint8)
    err = np.zeros(n_data, dtype=np.uint8)
    syn = np.zeros(n_total, dtype=np.uint8)
    seen = np.zeros(n_total, dtype=np.uint8)
    er_list = np.zeros(n_data, dtype=np.int32)
    err_list = np.zeros(n_data, dtype=np.int32)
    syn_list = np.zeros(n_total, dtype=np.int32)
    erasable_list = np.flatnonzero(graph.erasable_mask()).astype(np.int32)
    K.sample_shot(graph.indptr, graph.indices, n_data, erasable_list,
                  float(params.p), float(params.eps),
                  np.int64(seed), np.int64(shot),
                  erased, err, syn, seen, er_list, err_list, syn_list)
    return Shot(erasure=erased, error=err,
                syndrome=syn[n_data:].copy())


def extract_syndrome(graph: TannerGraph, error: np.ndarray) -> np.ndarray:
    """Syndrome of an error pattern (length n_check, check order)."""
    error = np.asarray(error, dtype=np.uint8)
    if error.shape != (graph.n_data,):
        raise ValueError("error must have length n_data=%d" % graph.n_data)
    syn = np.zeros(graph.n_check, dtype=np.uint8)
    for d in np.flatnonzero(error):
        for c in graph.neighbors(int(d)):
            if c >= graph.n_data:
                syn[c - graph.n_data] ^= 1
    return syn
