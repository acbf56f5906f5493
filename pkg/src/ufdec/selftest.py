"""Invariant suites runnable in under a minute.

Each suite re-derives a decoder guarantee from scratch (dense linear
algebra, brute-force enumeration, or an independent bookkeeping model)
and checks the fast path against it.
"""

from __future__ import annotations

import random

import numpy as np

from . import _kernels as K
from . import gf2
from .codes import build_bundled_bicycle, build_toric_2d, sector_tanner
from .decoders import Workspace, _alg_id
from .forest import ClusterForest
from .gf2 import Gf2Matrix, Gf2Vector
from .graphs import TannerGraph
from .verifier import is_failure, oracle_failure, sector_failure_mask


def _dense_incidence(g: TannerGraph) -> np.ndarray:
    """Node-by-data incidence matrix (checks are rows n_data..n_total-1)."""
    a = np.zeros((g.n_total, g.n_data), dtype=np.uint8)
    for d in range(g.n_data):
        a[g.indices[g.indptr[d]:g.indptr[d + 1]], d] = 1
    return a


def _checked_shots(g: TannerGraph, alg: str, p: float, eps: float,
                   seed: int, shots: int) -> tuple[int, str]:
    """Decode `shots` sampled trials, re-deriving the syndrome of
    err+corr densely and checking correction-support locality."""
    ws = Workspace(g)
    a = _dense_incidence(g).astype(np.int64)
    a_checks = a[g.n_data:]
    alg_id = _alg_id(alg)
    erasable_list = np.flatnonzero(g.erasable_mask()).astype(np.int32)
    checked = 0
    for shot in range(shots):
        n_e, n_err, n_s = K.sample_shot(
            g.indptr, g.indices, g.n_data, erasable_list,
            float(p), float(eps), np.int64(seed), np.int64(shot),
            ws.erased, ws.err, ws.syn, ws.seen,
            ws.er_list, ws.err_list, ws.syn_list)
        status, vc, tcount, n_corr = K.decode_shot(
            g.indptr, g.indices, g.n_data, alg_id, False,
            *ws.state_args(),
            ws.erased, ws.err, ws.corr, ws.syn,
            ws.L, ws.L2, ws.touched, ws.er_list, n_e, ws.syn_list, n_s,
            ws.corr_list, *ws.scratch_args())
        if status == K.OK:
            err_idx = ws.err_list[:n_err]
            corr_idx = ws.corr_list[:n_corr]
            resid = (a[:, err_idx].sum(axis=1)
                     + a[:, corr_idx].sum(axis=1)) & 1
            if resid.any():
                return checked, "residual syndrome nonzero (shot %d)" % shot
            if alg == "qldpc":
                touch = a_checks[:, corr_idx] * ws.visited[g.n_data:, None]
                if n_corr and not touch.any(axis=0).all():
                    return checked, ("correction outside cluster support "
                                     "(shot %d)" % shot)
            else:
                if not ws.visited[corr_idx].all():
                    return checked, ("correction outside visited region "
                                     "(shot %d)" % shot)
            checked += 1
        K.state_reset(g.n_data, alg_id, ws.parent, ws.csize, ws.parity,
                      ws.invalid, ws.scount, ws.visited, ws.indirty,
                      ws.vdirty, ws.skip_head, ws.skip_tail, ws.skip_next,
                      ws.in_skip, ws.mem_head, ws.mem_tail, ws.mem_next,
                      ws.cl_id, ws.erased, ws.err, ws.corr, ws.syn,
                      ws.touched, tcount, ws.er_list, n_e,
                      ws.err_list, n_err, ws.corr_list, n_corr,
                      ws.syn_list, n_s)
    return checked, ""


def suite_syndrome_locality() -> tuple[bool, str]:
    """Syndrome satisfaction and support locality, ~1e5 mixed shots."""
    toric = sector_tanner(build_toric_2d(8), "X")
    toric_small = sector_tanner(build_toric_2d(4), "X")
    bike = sector_tanner(build_bundled_bicycle(72), "X")
    total = 0
    plan = []
    for alg in ("simple", "improved", "variant"):
        for p, eps in ((0.05, 0.0), (0.1, 0.1), (0.02, 0.3)):
            plan.append((toric, alg, p, eps, 8000))
    plan.append((toric_small, "qldpc", 0.05, 0.1, 8000))
    plan.append((bike, "qldpc", 0.02, 0.0, 10000))
    plan.append((bike, "qldpc", 0.01, 0.2, 10000))
    for i, (g, alg, p, eps, shots) in enumerate(plan):
        checked, msg = _checked_shots(g, alg, p, eps, 1000 + i, shots)
        total += checked
        if msg:
            return False, "%s p=%g eps=%g: %s" % (alg, p, eps, msg)
    return True, "%d shots verified" % total


def suite_visited_bound(shots_per_point: int = 84000) -> tuple[bool, str]:
    """visited_count <= 2N for the improved algorithm, ~1e6 shots."""
    code = build_toric_2d(8)
    g = sector_tanner(code, "X")
    mask = sector_failure_mask(code, "X")
    ws = Workspace(g)
    erasable_list = np.flatnonzero(g.erasable_mask()).astype(np.int32)
    bound = 2 * g.n_total
    total = 0
    worst = 0
    for p in (0.0, 0.05, 0.10, 0.15):
        for eps in (0.0, 0.2, 0.4):
            out = K.run_batch(
                g.indptr, g.indices, g.n_data, erasable_list, mask,
                float(p), float(eps), np.int64(42), np.int64(0),
                np.int64(shots_per_point), K.ALG_IMPROVED, False,
                *ws.state_args(),
                ws.erased, ws.err, ws.corr, ws.syn, ws.seen,
                ws.L, ws.L2, ws.touched, ws.er_list, ws.err_list,
                ws.syn_list, ws.corr_list, *ws.scratch_args())
            total += shots_per_point
            worst = max(worst, int(out[3]))
            if out[3] > bound:
                return False, ("visited %d > 2N=%d at p=%g eps=%g"
                               % (out[3], bound, p, eps))
    return True, "max visited %d of bound %d over %d shots" % (worst, bound,
                                                               total)


def suite_forest_audit(n_trials: int = 40, n_nodes: int = 80) -> tuple[bool, str]:
    """Random merge sequences vs a brute-force partition model."""
    rng = random.Random(9)
    for mode in ("topological", "qldpc"):
        for trial in range(n_trials):
            forest = ClusterForest(n_nodes, mode=mode)
            groups = {i: {i} for i in range(n_nodes)}
            parity = {i: 0 for i in range(n_nodes)}
            marked = rng.sample(range(n_nodes), rng.randrange(n_nodes))
            for i in marked:
                if mode == "topological":
                    forest.set_parity(i, 1)
                else:
                    forest.set_invalid(i, 1)
                parity[i] = 1
            for _ in range(3 * n_nodes):
                a, b = rng.randrange(n_nodes), rng.randrange(n_nodes)
                forest.merge(a, b)
                ga = next(k for k, v in groups.items() if a in v)
                gb = next(k for k, v in groups.items() if b in v)
                if ga != gb:
                    groups[ga] |= groups.pop(gb)
                    if mode == "topological":
                        parity[ga] ^= parity.pop(gb)
                    else:
                        parity[ga] |= parity.pop(gb)
            want_iv = sum(parity[k] for k in groups)
            if forest.n_invalid != want_iv:
                return False, ("%s trial %d: n_invalid %d != %d"
                               % (mode, trial, forest.n_invalid, want_iv))
            for k, members in groups.items():
                roots = {forest.find(i) for i in members}
                if len(roots) != 1:
                    return False, "%s trial %d: split cluster" % (mode, trial)
                r = roots.pop()
                if forest.size(r) != len(members):
                    return False, "%s trial %d: size mismatch" % (mode, trial)
                if mode == "qldpc":
                    if set(forest.members(r)) != members:
                        return False, ("%s trial %d: member list mismatch"
                                       % (mode, trial))
    return True, "%d merge sequences audited" % (2 * n_trials)


def suite_gf2_solve(n_trials: int = 120) -> tuple[bool, str]:
    """gf2.solve vs exhaustive enumeration, up to 12 columns."""
    rng = np.random.default_rng(5)
    for trial in range(n_trials):
        cols = int(rng.integers(1, 13))
        rows = int(rng.integers(1, 15))
        dense = rng.integers(0, 2, size=(rows, cols)).astype(np.uint8)
        m = Gf2Matrix.from_dense(dense)
        b_dense = rng.integers(0, 2, size=rows).astype(np.uint8)
        b = Gf2Vector.from_dense(b_dense)
        got = gf2.solve(m, b)
        space = np.arange(1 << cols, dtype=np.uint64)
        bits = ((space[:, None] >> np.arange(cols, dtype=np.uint64)) & 1)
        feasible = bool((bits.astype(np.uint8) @ dense.T % 2
                         == b_dense).all(axis=1).any())
        if (got is not None) != feasible:
            return False, "trial %d: solvability mismatch" % trial
        if got is not None:
            check = dense @ np.asarray(got.to_dense(), dtype=np.int64) % 2
            if not (check == b_dense).all():
                return False, "trial %d: solution does not satisfy" % trial
    return True, "%d systems matched" % n_trials


def suite_failure_oracle() -> tuple[bool, str]:
    """is_failure vs the rank-based oracle.

    Exhaustive over every error on the L=2 toric code, plus 1e4 decoded
    kernel samples on the 72-qubit code.
    """
    code = build_toric_2d(2)
    mask = sector_failure_mask(code, "X")
    n = code.n
    from .decoders import UnionFindDecoder
    from .noise import extract_syndrome
    g = sector_tanner(code, "X")
    dec = UnionFindDecoder(g, alg="improved")
    for bits in range(1 << n):
        err = np.array([(bits >> i) & 1 for i in range(n)], dtype=np.uint8)
        syn = extract_syndrome(g, err)
        out = dec.decode(syn)
        if not out.converged:
            continue
        fast = is_failure(mask, err, out.correction)
        slow = oracle_failure(code, "X", err, out.correction)
        if fast != slow:
            return False, "L=2 toric mismatch at error %d" % bits
    count = 1 << n

    code = build_bundled_bicycle(72)
    mask = sector_failure_mask(code, "X")
    g = sector_tanner(code, "X")
    ws = Workspace(g)
    erasable_list = np.flatnonzero(g.erasable_mask()).astype(np.int32)
    for shot in range(10000):
        n_e, n_err, n_s = K.sample_shot(
            g.indptr, g.indices, g.n_data, erasable_list,
            0.02, 0.05, np.int64(11), np.int64(shot),
            ws.erased, ws.err, ws.syn, ws.seen,
            ws.er_list, ws.err_list, ws.syn_list)
        status, vc, tcount, n_corr = K.decode_shot(
            g.indptr, g.indices, g.n_data, K.ALG_QLDPC, False,
            *ws.state_args(),
            ws.erased, ws.err, ws.corr, ws.syn,
            ws.L, ws.L2, ws.touched, ws.er_list, n_e, ws.syn_list, n_s,
            ws.corr_list, *ws.scratch_args())
        if status == K.OK:
            err = np.zeros(g.n_data, dtype=np.uint8)
            err[ws.err_list[:n_err]] = 1
            corr = np.zeros(g.n_data, dtype=np.uint8)
            corr[ws.corr_list[:n_corr]] = 1
            fast = is_failure(mask, err, corr)
            slow = oracle_failure(code, "X", err, corr)
            if fast != slow:
                return False, "72-qubit mismatch at shot %d" % shot
            count += 1
        K.state_reset(g.n_data, K.ALG_QLDPC, ws.parent, ws.csize, ws.parity,
                      ws.invalid, ws.scount, ws.visited, ws.indirty,
                      ws.vdirty, ws.skip_head, ws.skip_tail, ws.skip_next,
                      ws.in_skip, ws.mem_head, ws.mem_tail, ws.mem_next,
                      ws.cl_id, ws.erased, ws.err, ws.corr, ws.syn,
                      ws.touched, tcount, ws.er_list, n_e,
                      ws.err_list, n_err, ws.corr_list, n_corr,
                      ws.syn_list, n_s)
    return True, "%d verdicts matched" % count


def suite_coset_invariance(n_trials: int = 400) -> tuple[bool, str]:
    """is_failure is unchanged by adding stabilizers to either argument."""
    rng = np.random.default_rng(3)
    for code in (build_toric_2d(4), build_bundled_bicycle(72)):
        mask = sector_failure_mask(code, "X")
        stab = code.h_z.to_dense()
        for _ in range(n_trials):
            err = rng.integers(0, 2, size=code.n).astype(np.uint8)
            corr = rng.integers(0, 2, size=code.n).astype(np.uint8)
            base = is_failure(mask, err, corr)
            combo = rng.integers(0, 2, size=stab.shape[0]).astype(np.uint8)
            s = (combo @ stab % 2).astype(np.uint8)
            if is_failure(mask, (err + s) % 2, corr) != base:
                return False, "error coset changed the verdict"
            if is_failure(mask, err, (corr + s) % 2) != base:
                return False, "correction coset changed the verdict"
    return True, "%d coset pairs stable" % (2 * n_trials)


SUITES = [
    ("syndrome-and-locality", suite_syndrome_locality),
    ("visited-bound", suite_visited_bound),
    ("forest-audit", suite_forest_audit),
    ("gf2-solve", suite_gf2_solve),
    ("failure-oracle", suite_failure_oracle),
    ("coset-invariance", suite_coset_invariance),
]


def run_selftest(out=None) -> bool:
    """Run every suite, printing one pass/fail line each."""
    import sys
    out = out or sys.stdout
    ok_all = True
    for name, fn in SUITES:
        ok, detail = fn()
        ok_all &= ok
        out.write("%-22s %s  (%s)\n" % (name, "pass" if ok else "FAIL",
                                        detail))
    return ok_all
