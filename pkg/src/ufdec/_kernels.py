"""Hot-path kernels: union-find forest, syndrome validation, peeling,
per-cluster elimination, noise sampling and the Monte Carlo shot loop.

Everything operates on flat arrays over the node index space
[0, n_data) for data nodes and [n_data, n_total) for check nodes.
State arrays are reset in place between shots through an undo list of
touched nodes, so per-shot cost stays proportional to the cluster sizes
rather than the graph size.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .rng import (STREAM_ERASE, STREAM_PAULI, STREAM_VALUE, derive_state,
                  next_double, next_u64)

# Validation algorithm ids.
ALG_SIMPLE = 0
ALG_IMPROVED = 1
ALG_VARIANT = 2
ALG_QLDPC = 3

# Decode status codes.
OK = 0
NONCONV = 1
DEGENERATE = 2

# Forest modes.
MODE_TOPO = 0
MODE_QLDPC = 1


# ---------------------------------------------------------------------------
# Union-find primitives
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def uf_find(parent, x):
    """Root of x with full path compression."""
    r = x
    while parent[r] != r:
        r = parent[r]
    while parent[x] != r:
        nxt = parent[x]
        parent[x] = r
        x = nxt
    return r


@njit(cache=True, inline="always")
def _skip_concat(skip_head, skip_tail, skip_next, big, small):
    if skip_head[small] != -1:
        if skip_head[big] == -1:
            skip_head[big] = skip_head[small]
        else:
            skip_next[skip_tail[big]] = skip_head[small]
        skip_tail[big] = skip_tail[small]
        skip_head[small] = -1
        skip_tail[small] = -1


@njit(cache=True, inline="always")
def uf_merge_topo(parent, csize, parity,
                  skip_head, skip_tail, skip_next, ra, rb, n_iv):
    """Weighted union for topological mode.

    The smaller root is attached under the larger (tie: rb survives).
    Parities XOR; n_iv drops by two when two odd clusters merge.
    Returns (surviving root, n_iv).
    """
    if csize[ra] > csize[rb]:
        big, small = ra, rb
    else:
        big, small = rb, ra
    if parity[ra] == 1 and parity[rb] == 1:
        n_iv -= 2
    parent[small] = big
    csize[big] += csize[small]
    parity[big] ^= parity[small]
    _skip_concat(skip_head, skip_tail, skip_next, big, small)
    return big, n_iv


@njit(cache=True, inline="always")
def uf_merge_plain(parent, csize, parity, ra, rb, n_iv):
    """uf_merge_topo without the skip-list concatenation, for algorithms
    that never populate per-root skip lists (simple and the two-buffer
    variant).  Avoids touching four extra arrays per merge."""
    if csize[ra] > csize[rb]:
        big, small = ra, rb
    else:
        big, small = rb, ra
    if parity[ra] == 1 and parity[rb] == 1:
        n_iv -= 2
    parent[small] = big
    csize[big] += csize[small]
    parity[big] ^= parity[small]
    return big, n_iv


@njit(cache=True, inline="always")
def uf_merge_qldpc(parent, csize, invalid, scount, vdirty,
                   skip_head, skip_tail, skip_next,
                   mem_head, mem_tail, mem_next, ra, rb, n_iv):
    """Weighted union for qLDPC mode.

    Invalid flags OR together; n_iv drops by one when both inputs were
    invalid (one independent invalid cluster disappears).  Validity of
    the survivor is resolved later by the per-cluster solve.
    """
    if csize[ra] > csize[rb]:
        big, small = ra, rb
    else:
        big, small = rb, ra
    if invalid[ra] == 1 and invalid[rb] == 1:
        n_iv -= 1
    new_invalid = invalid[ra] | invalid[rb]
    parent[small] = big
    csize[big] += csize[small]
    invalid[big] = new_invalid
    scount[big] += scount[small]
    vdirty[big] = 1
    _skip_concat(skip_head, skip_tail, skip_next, big, small)
    mem_next[mem_tail[big]] = mem_head[small]
    mem_tail[big] = mem_tail[small]
    return big, n_iv


@njit(cache=True, inline="always")
def _touch(node, indirty, touched, tcount):
    if indirty[node] == 0:
        indirty[node] = 1
        touched[tcount] = node
        tcount += 1
    return tcount


@njit(cache=True, inline="always")
def _drain_skipped(skip_head, skip_tail, skip_next, in_skip, L, tail, root):
    """Move the root's skipped nodes onto the end of L."""
    node = skip_head[root]
    while node != -1:
        L[tail] = node
        tail += 1
        in_skip[node] = 0
        node = skip_next[node]
    skip_head[root] = -1
    skip_tail[root] = -1
    return tail


# ---------------------------------------------------------------------------
# Initialization and reset
# ---------------------------------------------------------------------------

@njit(cache=True)
def forest_init(er_list, n_e, syn_list, n_s, mode,
                parent, parity, invalid, scount, visited, indirty,
                L, touched, tcount):
    """Seed L = [erasures..., syndromes...]; every listed node visited.

    Returns (n_iv, tail, tcount).
    """
    for j in range(n_e):
        u = er_list[j]
        L[j] = u
        visited[u] = 1
        tcount = _touch(u, indirty, touched, tcount)
    for j in range(n_s):
        c = syn_list[j]
        L[n_e + j] = c
        visited[c] = 1
        tcount = _touch(c, indirty, touched, tcount)
        if mode == MODE_TOPO:
            parity[c] = 1
        else:
            invalid[c] = 1
            scount[c] = 1
    return n_s, n_e + n_s, tcount


@njit(cache=True)
def state_reset(n_data, alg,
                parent, csize, parity, invalid, scount, visited, indirty,
                vdirty, skip_head, skip_tail, skip_next, in_skip,
                mem_head, mem_tail, mem_next, cl_id,
                erased, err, corr, syn,
                touched, tcount, er_list, n_e, err_list, n_err,
                corr_list, n_corr, syn_list, n_s):
    """Undo all per-shot mutations through the recorded lists.

    Only the arrays the given algorithm can mutate are rewritten; the
    qLDPC-only and skip-list state stays untouched for algorithms that
    never use it (this loop is a large share of the per-shot cost).
    """
    for j in range(tcount):
        u = touched[j]
        parent[u] = u
        csize[u] = 1
        parity[u] = 0
        visited[u] = 0
        indirty[u] = 0
        cl_id[u] = -1
        syn[u] = 0
        if alg == ALG_IMPROVED or alg == ALG_QLDPC:
            skip_head[u] = -1
            skip_tail[u] = -1
            skip_next[u] = -1
            in_skip[u] = 0
        if alg == ALG_QLDPC:
            invalid[u] = 0
            scount[u] = 0
            vdirty[u] = 1
            mem_head[u] = u
            mem_tail[u] = u
            mem_next[u] = -1
    for j in range(n_e):
        erased[er_list[j]] = 0
    for j in range(n_err):
        err[err_list[j]] = 0
    for j in range(n_corr):
        corr[corr_list[j]] = 0
    for j in range(n_s):
        syn[syn_list[j]] = 0


# ---------------------------------------------------------------------------
# Topological syndrome validation (Algorithms simple / improved / variant)
# ---------------------------------------------------------------------------

@njit(cache=True)
def validate_topological(indptr, indices, n_data, alg,
                         parent, csize, parity, visited, indirty,
                         skip_head, skip_tail, skip_next, in_skip,
                         erased, L, L2, touched,
                         n_e, n_iv, tail, tcount, capL):
    """Run one of the three topological validation algorithms.

    Returns (status, visited_count, tail, tcount, n_iv).
    """
    n_total = parent.shape[0]
    max_steps = 64 * n_total + 1024
    visited_count = 0
    i = 0
    lp_count = 0  # variant: fill level of the global skipped list L2

    # --- Phase 1 (improved algorithm only): one Tanner step from erasures.
    if alg == ALG_IMPROVED:
        while i < n_e:
            u = L[i]
            ru = uf_find(parent, u)
            for e in range(indptr[u], indptr[u + 1]):
                n = indices[e]
                tcount = _touch(n, indirty, touched, tcount)
                rn = uf_find(parent, n)
                if rn != ru:
                    ru, n_iv = uf_merge_topo(parent, csize, parity,
                                             skip_head, skip_tail, skip_next,
                                             ru, rn, n_iv)
                if visited[n] == 0:
                    if tail >= capL:
                        return NONCONV, visited_count, tail, tcount, n_iv
                    L[tail] = n
                    tail += 1
                    visited[n] = 1
            i += 1
            visited_count += 1

    last_niv = -1
    last_tail = -1
    last_merges = -1
    n_merges = 0

    while n_iv > 0:
        if visited_count > max_steps:
            return NONCONV, visited_count, tail, tcount, n_iv
        if i >= tail:
            if alg == ALG_SIMPLE:
                return NONCONV, visited_count, tail, tcount, n_iv
            if alg == ALG_VARIANT:
                # Swap in the global skipped list and rescan.
                if lp_count == 0:
                    return NONCONV, visited_count, tail, tcount, n_iv
                if n_iv == last_niv and n_merges == last_merges \
                        and lp_count == last_tail:
                    return NONCONV, visited_count, tail, tcount, n_iv
                last_niv, last_merges, last_tail = n_iv, n_merges, lp_count
                tmp = L
                L = L2
                L2 = tmp
                tail = lp_count
                lp_count = 0
                i = 0
            else:
                # Improved: start over at position zero.
                if n_iv == last_niv and tail == last_tail \
                        and n_merges == last_merges:
                    return NONCONV, visited_count, tail, tcount, n_iv
                last_niv, last_tail, last_merges = n_iv, tail, n_merges
                i = 0

        u = L[i]
        ru = uf_find(parent, u)

        if alg == ALG_SIMPLE:
            grow = True
        elif alg == ALG_VARIANT:
            grow = parity[ru] == 1 or (u < n_data and erased[u] == 1)
        else:
            grow = parity[ru] == 1

        if grow:
            for e in range(indptr[u], indptr[u + 1]):
                n = indices[e]
                if alg != ALG_SIMPLE:
                    tcount = _touch(n, indirty, touched, tcount)
                rn = uf_find(parent, n)
                if rn != ru:
                    if alg == ALG_IMPROVED:
                        if skip_head[rn] != -1:
                            if tail + csize[rn] >= capL:
                                return (NONCONV, visited_count, tail, tcount,
                                        n_iv)
                            tail = _drain_skipped(skip_head, skip_tail,
                                                  skip_next, in_skip,
                                                  L, tail, rn)
                        ru, n_iv = uf_merge_topo(parent, csize, parity,
                                                 skip_head, skip_tail,
                                                 skip_next, ru, rn, n_iv)
                    else:
                        ru, n_iv = uf_merge_plain(parent, csize, parity,
                                                  ru, rn, n_iv)
                    n_merges += 1
                if visited[n] == 0:
                    if tail >= capL:
                        return NONCONV, visited_count, tail, tcount, n_iv
                    L[tail] = n
                    tail += 1
                    visited[n] = 1
        else:
            if alg == ALG_VARIANT:
                if lp_count < capL:
                    L2[lp_count] = u
                    lp_count += 1
            else:
                if in_skip[u] == 0:
                    in_skip[u] = 1
                    if skip_head[ru] == -1:
                        skip_head[ru] = u
                    else:
                        skip_next[skip_tail[ru]] = u
                    skip_tail[ru] = u
                    skip_next[u] = -1
        i += 1
        visited_count += 1

    return OK, visited_count, tail, tcount, n_iv


# ---------------------------------------------------------------------------
# Peeling forest (topological cluster decoding)
# ---------------------------------------------------------------------------

@njit(cache=True)
def peel_clusters(indptr, indices, n_data, has_erased,
                  parent, visited, erased, syn, corr,
                  cl_id, fill, cl_nodes, cl_start,
                  order, tree_par, bfs_mark,
                  touched, tcount, corr_list):
    """Peel every validated cluster; fills corr / corr_list.

    Returns (status, n_corr).
    """
    # Group visited nodes into clusters by root.
    ncl = 0
    for j in range(tcount):
        t = touched[j]
        if visited[t] == 0:
            continue
        r = uf_find(parent, t)
        c = cl_id[r]
        if c == -1:
            c = ncl
            cl_id[r] = c
            cl_start[c + 1] = 0
            ncl += 1
        cl_start[c + 1] += 1
    cl_start[0] = 0
    for c in range(ncl):
        cl_start[c + 1] += cl_start[c]
        fill[c] = cl_start[c]
    for j in range(tcount):
        t = touched[j]
        if visited[t] == 0:
            continue
        c = cl_id[uf_find(parent, t)]
        cl_nodes[fill[c]] = t
        fill[c] += 1
        cl_id[t] = c  # label every member so BFS membership is one read

    n_corr = 0
    for c in range(ncl):
        s, e = cl_start[c], cl_start[c + 1]
        root_check = -1
        has_syn = False
        for j in range(s, e):
            node = cl_nodes[j]
            if node >= n_data:
                if root_check == -1:
                    root_check = node
                if syn[node] == 1:
                    has_syn = True
        if not has_syn:
            continue

        # Spanning forest by BFS from a check node, preferring erased
        # data edges so erasure-only corrections stay inside the erasure.
        qlen = 0
        order[qlen] = root_check
        qlen += 1
        bfs_mark[root_check] = 1
        tree_par[root_check] = -1
        pos = 0
        while pos < qlen:
            u = order[pos]
            pos += 1
            if u >= n_data:
                if has_erased:
                    # Erased data first so erasure corrections stay
                    # inside the erasure.
                    for ei in range(indptr[u], indptr[u + 1]):
                        n = indices[ei]
                        if bfs_mark[n] == 1 or erased[n] == 0 \
                                or cl_id[n] != c:
                            continue
                        bfs_mark[n] = 1
                        tree_par[n] = u
                        order[qlen] = n
                        qlen += 1
                for ei in range(indptr[u], indptr[u + 1]):
                    n = indices[ei]
                    if bfs_mark[n] == 1 or cl_id[n] != c:
                        continue
                    bfs_mark[n] = 1
                    tree_par[n] = u
                    order[qlen] = n
                    qlen += 1
            else:
                for ei in range(indptr[u], indptr[u + 1]):
                    n = indices[ei]
                    if bfs_mark[n] == 1 or cl_id[n] != c:
                        continue
                    bfs_mark[n] = 1
                    tree_par[n] = u
                    order[qlen] = n
                    qlen += 1

        # Peel leaves towards the root.
        for j in range(qlen - 1, 0, -1):
            u = order[j]
            if u >= n_data and syn[u] == 1:
                d = tree_par[u]
                corr[d] ^= 1
                if corr[d] == 1:
                    corr_list[n_corr] = d
                    n_corr += 1
                syn[u] = 0
                up = tree_par[d]
                syn[up] ^= 1
        status_bad = syn[root_check] == 1
        for j in range(qlen):
            bfs_mark[order[j]] = 0
        if status_bad:
            return NONCONV, n_corr
    return OK, n_corr


# ---------------------------------------------------------------------------
# qLDPC cluster validation (Gaussian elimination on the cluster system)
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) \
        + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


# Free-variable combinations are enumerated exhaustively up to this many
# free columns when searching for a low-weight cluster solution; larger
# nullspaces fall back to a greedy descent.
_ENUM_FREE_LIMIT = 12


@njit(cache=True)
def solve_cluster(indptr, indices, n_data, syn, erased,
                  mem_head, mem_next, root,
                  cl_checks, cl_data, local_idx, pivcol, xval,
                  want_solution, corr, corr_list, n_corr):
    """Solve the cluster-restricted system syndrome = H_cl * e_cl.

    Rows are the cluster's checks; columns its data nodes.  Returns
    (solvable, n_corr).  When want_solution is set and the system is
    consistent, a low-weight solution is XORed into corr: the
    free-variables-zero solution improved by searching the solution
    coset (exhaustively for small nullspaces, greedily otherwise).
    Erased positions count zero towards the weight, since their error
    is a fair coin and flipping them carries no evidence.
    """
    nc = 0
    nd = 0
    node = mem_head[root]
    while node != -1:
        if node >= n_data:
            cl_checks[nc] = node
            nc += 1
        else:
            cl_data[nd] = node
            local_idx[node] = nd
            nd += 1
        node = mem_next[node]

    words = (nd + 1 + 63) >> 6
    a = np.zeros((nc, words), dtype=np.uint64)
    aug_w = nd >> 6
    aug_b = np.uint64(nd & 63)
    one = np.uint64(1)
    for irow in range(nc):
        chk = cl_checks[irow]
        for ei in range(indptr[chk], indptr[chk + 1]):
            li = local_idx[indices[ei]]
            if li >= 0:
                a[irow, li >> 6] |= one << np.uint64(li & 63)
        if syn[chk] == 1:
            a[irow, aug_w] |= one << aug_b

    # Gauss-Jordan elimination (reduced form, pivots in column order).
    pr = 0
    for col in range(nd):
        if pr >= nc:
            break
        w = col >> 6
        b = np.uint64(col & 63)
        sel = -1
        for rrow in range(pr, nc):
            if (a[rrow, w] >> b) & one:
                sel = rrow
                break
        if sel < 0:
            continue
        if sel != pr:
            for ww in range(words):
                tmp = a[pr, ww]
                a[pr, ww] = a[sel, ww]
                a[sel, ww] = tmp
        for rrow in range(nc):
            if rrow != pr and ((a[rrow, w] >> b) & one):
                for ww in range(w, words):
                    a[rrow, ww] ^= a[pr, ww]
        pivcol[pr] = col
        pr += 1

    solvable = True
    for rrow in range(pr, nc):
        if (a[rrow, aug_w] >> aug_b) & one:
            solvable = False
            break

    if solvable and want_solution:
        nw = (nd + 63) >> 6
        sol = np.zeros(nw, dtype=np.uint64)
        for irow in range(pr):
            if (a[irow, aug_w] >> aug_b) & one:
                c = pivcol[irow]
                sol[c >> 6] |= one << np.uint64(c & 63)
        # Weight only counts non-erased positions.
        active = np.zeros(nw, dtype=np.uint64)
        for j in range(nd):
            if erased[cl_data[j]] == 0:
                active[j >> 6] |= one << np.uint64(j & 63)
        nfree = nd - pr
        if nfree > 0:
            # Nullspace basis: one vector per free column.
            basis = np.zeros((nfree, nw), dtype=np.uint64)
            fi = 0
            pj = 0
            for col in range(nd):
                if pj < pr and pivcol[pj] == col:
                    pj += 1
                    continue
                basis[fi, col >> 6] |= one << np.uint64(col & 63)
                for irow in range(pr):
                    if (a[irow, col >> 6] >> np.uint64(col & 63)) & one:
                        c = pivcol[irow]
                        basis[fi, c >> 6] |= one << np.uint64(c & 63)
                fi += 1
            wbest = np.uint64(0)
            for ww in range(nw):
                wbest += _popcount64(sol[ww] & active[ww])
            if nfree <= _ENUM_FREE_LIMIT:
                # Gray-code walk over the full solution coset.
                cur = sol.copy()
                best = sol.copy()
                gray_prev = 0
                for step in range(1, 1 << nfree):
                    gray = step ^ (step >> 1)
                    flip = gray ^ gray_prev
                    gray_prev = gray
                    idx = 0
                    while (flip >> idx) & 1 == 0:
                        idx += 1
                    wcur = np.uint64(0)
                    for ww in range(nw):
                        cur[ww] ^= basis[idx, ww]
                        wcur += _popcount64(cur[ww] & active[ww])
                    if wcur < wbest:
                        wbest = wcur
                        for ww in range(nw):
                            best[ww] = cur[ww]
                sol = best
            else:
                # Greedy descent over basis vectors.
                for _sweep in range(4):
                    improved = False
                    for fi in range(nfree):
                        wcur = np.uint64(0)
                        for ww in range(nw):
                            wcur += _popcount64(
                                (sol[ww] ^ basis[fi, ww]) & active[ww])
                        if wcur < wbest:
                            wbest = wcur
                            improved = True
                            for ww in range(nw):
                                sol[ww] ^= basis[fi, ww]
                    if not improved:
                        break
        for j in range(nd):
            if (sol[j >> 6] >> np.uint64(j & 63)) & one:
                d = cl_data[j]
                corr[d] ^= 1
                if corr[d] == 1:
                    corr_list[n_corr] = d
                    n_corr += 1

    for j in range(nd):
        local_idx[cl_data[j]] = -1
    return solvable, n_corr


@njit(cache=True, inline="always")
def _qldpc_validate(indptr, indices, n_data, syn, erased,
                    mem_head, mem_next, invalid, scount, vdirty,
                    cl_checks, cl_data, local_idx, pivcol, xval,
                    root, n_iv, corr, corr_list):
    """validate(): re-solve a cluster and maintain the invalid count."""
    if vdirty[root] == 0:
        return n_iv
    vdirty[root] = 0
    if scount[root] == 0:
        solvable = True
    else:
        solvable, _ = solve_cluster(indptr, indices, n_data, syn, erased,
                                    mem_head, mem_next, root,
                                    cl_checks, cl_data, local_idx,
                                    pivcol, xval,
                                    False, corr, corr_list, 0)
    if solvable:
        if invalid[root] == 1:
            invalid[root] = 0
            n_iv -= 1
    else:
        if invalid[root] == 0:
            invalid[root] = 1
            n_iv += 1
    return n_iv


@njit(cache=True)
def validate_qldpc(indptr, indices, n_data,
                   parent, csize, invalid, scount, vdirty, visited, indirty,
                   skip_head, skip_tail, skip_next, in_skip,
                   mem_head, mem_tail, mem_next,
                   syn, erased, corr, corr_list,
                   cl_checks, cl_data, local_idx, pivcol, xval,
                   L, touched, n_e, n_iv, tail, tcount, capL,
                   merge_shortcut):
    """qLDPC syndrome validation with double-step growth.

    Growth from a check merges its data neighbors and their check
    neighbors in one step, so cluster boundaries consist of checks only
    and per-cluster solutions never flip outside syndromes.
    Returns (status, visited_count, tail, tcount, n_iv, n_corr) where
    n_corr is the final correction support size.
    """
    n_total = parent.shape[0]
    max_steps = 64 * n_total + 1024
    visited_count = 0
    i = 0

    # --- Phase 1: one Tanner step from the erasures, validating as we go.
    while i < n_e:
        u = L[i]
        ru = uf_find(parent, u)
        for e in range(indptr[u], indptr[u + 1]):
            n = indices[e]
            tcount = _touch(n, indirty, touched, tcount)
            rn = uf_find(parent, n)
            if rn != ru:
                ru, n_iv = uf_merge_qldpc(parent, csize, invalid, scount,
                                          vdirty, skip_head, skip_tail,
                                          skip_next, mem_head, mem_tail,
                                          mem_next, ru, rn, n_iv)
            if visited[n] == 0:
                if tail >= capL:
                    return NONCONV, visited_count, tail, tcount, n_iv, 0
                L[tail] = n
                tail += 1
                visited[n] = 1
        n_iv = _qldpc_validate(indptr, indices, n_data, syn, erased,
                               mem_head, mem_next, invalid, scount, vdirty,
                               cl_checks, cl_data, local_idx, pivcol, xval,
                               ru, n_iv, corr, corr_list)
        i += 1
        visited_count += 1

    last_niv = -1
    last_tail = -1
    last_merges = -1
    n_merges = 0

    while n_iv > 0:
        if visited_count > max_steps:
            return NONCONV, visited_count, tail, tcount, n_iv, 0
        if i >= tail:
            if n_iv == last_niv and tail == last_tail and n_merges == last_merges:
                return NONCONV, visited_count, tail, tcount, n_iv, 0
            last_niv, last_tail, last_merges = n_iv, tail, n_merges
            i = 0

        u = L[i]
        ru = uf_find(parent, u)
        if invalid[ru] == 1:
            merged_valid = False
            if u >= n_data:
                # Double step: data neighbors plus their check neighbors.
                for e in range(indptr[u], indptr[u + 1]):
                    n = indices[e]
                    tcount = _touch(n, indirty, touched, tcount)
                    rn = uf_find(parent, n)
                    if rn != ru:
                        if invalid[rn] == 0:
                            merged_valid = True
                        ru, n_iv = uf_merge_qldpc(
                            parent, csize, invalid, scount, vdirty,
                            skip_head, skip_tail, skip_next,
                            mem_head, mem_tail, mem_next, ru, rn, n_iv)
                        n_merges += 1
                        for e2 in range(indptr[n], indptr[n + 1]):
                            n2 = indices[e2]
                            tcount = _touch(n2, indirty, touched, tcount)
                            rn2 = uf_find(parent, n2)
                            if skip_head[rn2] != -1:
                                if tail + csize[rn2] >= capL:
                                    return (NONCONV, visited_count, tail,
                                            tcount, n_iv, 0)
                                tail = _drain_skipped(skip_head, skip_tail,
                                                      skip_next, in_skip,
                                                      L, tail, rn2)
                            if rn2 != ru:
                                if invalid[rn2] == 0:
                                    merged_valid = True
                                ru, n_iv = uf_merge_qldpc(
                                    parent, csize, invalid, scount, vdirty,
                                    skip_head, skip_tail, skip_next,
                                    mem_head, mem_tail, mem_next,
                                    ru, rn2, n_iv)
                                n_merges += 1
                            if visited[n2] == 0:
                                if tail >= capL:
                                    return (NONCONV, visited_count, tail,
                                            tcount, n_iv, 0)
                                L[tail] = n2
                                tail += 1
                                visited[n2] = 1
            else:
                # Data node: it is already enclosed, so a single step to
                # its checks (which then grow in double steps) suffices.
                for e in range(indptr[u], indptr[u + 1]):
                    n = indices[e]
                    tcount = _touch(n, indirty, touched, tcount)
                    rn = uf_find(parent, n)
                    if skip_head[rn] != -1:
                        if tail + csize[rn] >= capL:
                            return NONCONV, visited_count, tail, tcount, n_iv, 0
                        tail = _drain_skipped(skip_head, skip_tail, skip_next,
                                              in_skip, L, tail, rn)
                    if rn != ru:
                        if invalid[rn] == 0:
                            merged_valid = True
                        ru, n_iv = uf_merge_qldpc(
                            parent, csize, invalid, scount, vdirty,
                            skip_head, skip_tail, skip_next,
                            mem_head, mem_tail, mem_next, ru, rn, n_iv)
                        n_merges += 1
                    if visited[n] == 0:
                        if tail >= capL:
                            return NONCONV, visited_count, tail, tcount, n_iv, 0
                        L[tail] = n
                        tail += 1
                        visited[n] = 1
            if merge_shortcut and merged_valid and invalid[ru] == 1:
                pass  # valid + invalid gives a larger invalid cluster
            else:
                n_iv = _qldpc_validate(indptr, indices, n_data, syn, erased,
                                       mem_head, mem_next, invalid, scount,
                                       vdirty, cl_checks, cl_data, local_idx,
                                       pivcol, xval, ru, n_iv, corr, corr_list)
        else:
            if in_skip[u] == 0:
                in_skip[u] = 1
                if skip_head[ru] == -1:
                    skip_head[ru] = u
                else:
                    skip_next[skip_tail[ru]] = u
                skip_tail[ru] = u
                skip_next[u] = -1
        i += 1
        visited_count += 1

    # Final decoding: solve every syndrome-carrying cluster once more and
    # keep the solutions (identical to the ones stored at last validation,
    # since clusters are unchanged after it).
    n_corr = 0
    for j in range(tcount):
        t = touched[j]
        if parent[t] != t or scount[t] == 0:
            continue
        solvable, n_corr = solve_cluster(indptr, indices, n_data, syn, erased,
                                         mem_head, mem_next, t,
                                         cl_checks, cl_data, local_idx,
                                         pivcol, xval,
                                         True, corr, corr_list, n_corr)
        if not solvable:
            return NONCONV, visited_count, tail, tcount, n_iv, n_corr
    return OK, visited_count, tail, tcount, n_iv, n_corr


# ---------------------------------------------------------------------------
# Noise sampling
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _geometric_walk(state, rate, pos):
    """Next hit position for an i.i.d. Bernoulli(rate) scan."""
    state, u = next_double(state)
    # u in [0,1): 1-u in (0,1], log is finite.
    skip = int(math.floor(math.log(1.0 - u) / math.log(1.0 - rate)))
    return state, pos + 1 + skip


@njit(cache=True)
def sample_shot(indptr, indices, n_data, erasable_list, p, eps, seed, shot,
                erased, err, syn, seen,
                er_list, err_list, syn_list):
    """Sample erasures, Pauli errors and the syndrome for one trial.

    Erasures hit erasable data nodes i.i.d. with probability eps and
    carry a fair-coin error (replacing the p-channel there); every other
    data node errs with probability p.  Separate counter-based streams
    per mechanism keep e.g. the eps=0 slice identical to a Pauli-only
    run with the same seed.  Returns (n_e, n_err, n_s).
    """
    n_e = 0
    m = erasable_list.shape[0]
    if eps > 0.0 and m > 0:
        if eps >= 1.0:
            for j in range(m):
                d = erasable_list[j]
                erased[d] = 1
                er_list[n_e] = d
                n_e += 1
        else:
            state = derive_state(seed, shot, STREAM_ERASE)
            pos = -1
            while True:
                state, pos = _geometric_walk(state, eps, pos)
                if pos >= m:
                    break
                d = erasable_list[pos]
                erased[d] = 1
                er_list[n_e] = d
                n_e += 1

    n_err = 0
    if p > 0.0:
        state = derive_state(seed, shot, STREAM_PAULI)
        if p >= 1.0:
            for d in range(n_data):
                if erased[d] == 0:
                    err[d] = 1
                    err_list[n_err] = d
                    n_err += 1
        else:
            pos = -1
            while True:
                state, pos = _geometric_walk(state, p, pos)
                if pos >= n_data:
                    break
                if erased[pos] == 0:
                    err[pos] = 1
                    err_list[n_err] = pos
                    n_err += 1
    if n_e > 0:
        state = derive_state(seed, shot, STREAM_VALUE)
        for j in range(n_e):
            state, u = next_u64(state)
            if u & np.uint64(1):
                d = er_list[j]
                err[d] = 1
                err_list[n_err] = d
                n_err += 1

    for j in range(n_err):
        d = err_list[j]
        for e in range(indptr[d], indptr[d + 1]):
            syn[indices[e]] ^= 1
    n_s = 0
    for j in range(n_err):
        d = err_list[j]
        for e in range(indptr[d], indptr[d + 1]):
            c = indices[e]
            if syn[c] == 1 and seen[c] == 0:
                seen[c] = 1
                syn_list[n_s] = c
                n_s += 1
    for j in range(n_s):
        seen[syn_list[j]] = 0
    # Keep the syndrome list in check-index order; the traversal order of
    # L is defined over node indices, not discovery order.
    for j in range(1, n_s):
        key = syn_list[j]
        k = j - 1
        while k >= 0 and syn_list[k] > key:
            syn_list[k + 1] = syn_list[k]
            k -= 1
        syn_list[k + 1] = key
    return n_e, n_err, n_s


@njit(cache=True, inline="always")
def failure_parity(mask, err_list, n_err, corr_list, n_corr):
    """Packed pairing parities of the residual error + correction."""
    par = np.uint64(0)
    for j in range(n_err):
        par ^= mask[err_list[j]]
    for j in range(n_corr):
        par ^= mask[corr_list[j]]
    return par


# ---------------------------------------------------------------------------
# Full per-shot decoding
# ---------------------------------------------------------------------------

@njit(cache=True)
def decode_shot(indptr, indices, n_data, alg, merge_shortcut,
                parent, csize, parity, invalid, scount, visited, indirty,
                vdirty, skip_head, skip_tail, skip_next, in_skip,
                mem_head, mem_tail, mem_next, cl_id, fill,
                erased, err, corr, syn,
                L, L2, touched, er_list, n_e, syn_list, n_s,
                corr_list, order, tree_par, bfs_mark, cl_nodes, cl_start,
                cl_checks, cl_data, local_idx, pivcol, xval):
    """Initialize the forest, validate, decode clusters.

    Expects erased / syn flags preloaded to match er_list / syn_list.
    Returns (status, visited_count, tcount, n_corr).
    """
    capL = L.shape[0]
    mode = MODE_QLDPC if alg == ALG_QLDPC else MODE_TOPO
    if mode == MODE_TOPO and (n_s & 1) == 1:
        # Odd total syndrome parity cannot occur for physical shots on a
        # periodic code; reject rather than loop forever.
        tcount = 0
        n_iv, tail, tcount = forest_init(er_list, n_e, syn_list, n_s, mode,
                                         parent, parity, invalid, scount,
                                         visited, indirty, L, touched, 0)
        return DEGENERATE, 0, tcount, 0

    n_iv, tail, tcount = forest_init(er_list, n_e, syn_list, n_s, mode,
                                     parent, parity, invalid, scount,
                                     visited, indirty, L, touched, 0)
    if mode == MODE_TOPO:
        status, vc, tail, tcount, n_iv = validate_topological(
            indptr, indices, n_data, alg,
            parent, csize, parity, visited, indirty,
            skip_head, skip_tail, skip_next, in_skip,
            erased, L, L2, touched, n_e, n_iv, tail, tcount, capL)
        if alg == ALG_SIMPLE:
            # The simple algorithm never skips or re-appends, so L holds
            # exactly the mutated nodes; use it as the reset list instead
            # of paying per-neighbor dirty tracking in the hot loop.
            for j in range(tail):
                touched[j] = L[j]
            tcount = tail
        if status != OK:
            return status, vc, tcount, 0
        status, n_corr = peel_clusters(indptr, indices, n_data, n_e > 0,
                                       parent, visited, erased, syn, corr,
                                       cl_id, fill, cl_nodes, cl_start,
                                       order, tree_par, bfs_mark,
                                       touched, tcount, corr_list)
        return status, vc, tcount, n_corr
    status, vc, tail, tcount, n_iv, n_corr = validate_qldpc(
        indptr, indices, n_data,
        parent, csize, invalid, scount, vdirty, visited, indirty,
        skip_head, skip_tail, skip_next, in_skip,
        mem_head, mem_tail, mem_next,
        syn, erased, corr, corr_list,
        cl_checks, cl_data, local_idx, pivcol, xval,
        L, touched, n_e, n_iv, tail, tcount, capL, merge_shortcut)
    return status, vc, tcount, n_corr


@njit(cache=True)
def run_batch(indptr, indices, n_data, erasable_list, mask,
              p, eps, seed, lo, hi, alg, merge_shortcut,
              parent, csize, parity, invalid, scount, visited, indirty,
              vdirty, skip_head, skip_tail, skip_next, in_skip,
              mem_head, mem_tail, mem_next, cl_id, fill,
              erased, err, corr, syn, seen,
              L, L2, touched, er_list, err_list, syn_list, corr_list,
              order, tree_par, bfs_mark, cl_nodes, cl_start,
              cl_checks, cl_data, local_idx, pivcol, xval):
    """Sample -> decode -> verify for shots [lo, hi).

    Non-convergent decodes count as failures and are tallied separately.
    Returns (failures, nonconv, visited_sum, visited_max).
    """
    failures = 0
    nonconv = 0
    visited_sum = 0.0
    visited_max = 0
    for shot in range(lo, hi):
        n_e, n_err, n_s = sample_shot(indptr, indices, n_data, erasable_list,
                                      p, eps, seed, shot,
                                      erased, err, syn, seen,
                                      er_list, err_list, syn_list)
        status, vc, tcount, n_corr = decode_shot(
            indptr, indices, n_data, alg, merge_shortcut,
            parent, csize, parity, invalid, scount, visited, indirty,
            vdirty, skip_head, skip_tail, skip_next, in_skip,
            mem_head, mem_tail, mem_next, cl_id, fill,
            erased, err, corr, syn,
            L, L2, touched, er_list, n_e, syn_list, n_s,
            corr_list, order, tree_par, bfs_mark, cl_nodes, cl_start,
            cl_checks, cl_data, local_idx, pivcol, xval)
        if status != OK:
            nonconv += 1
            failures += 1
        elif failure_parity(mask, err_list, n_err, corr_list, n_corr) != 0:
            failures += 1
        visited_sum += vc
        if vc > visited_max:
            visited_max = vc
        state_reset(n_data, alg, parent, csize, parity, invalid, scount, visited,
                    indirty, vdirty, skip_head, skip_tail, skip_next, in_skip,
                    mem_head, mem_tail, mem_next, cl_id,
                    erased, err, corr, syn,
                    touched, tcount, er_list, n_e, err_list, n_err,
                    corr_list, n_corr, syn_list, n_s)
    return failures, nonconv, visited_sum, visited_max


@njit(cache=True)
def sample_batch_store(indptr, indices, n_data, erasable_list,
                       p, eps, seed, lo, hi,
                       erased, err, syn, seen, er_list, err_list, syn_list,
                       er_all, er_off, syn_all, syn_off):
    """Pre-sample shots [lo, hi) into flat storage for timed decoding."""
    epos = 0
    spos = 0
    for shot in range(lo, hi):
        n_e, n_err, n_s = sample_shot(indptr, indices, n_data, erasable_list,
                                      p, eps, seed, shot,
                                      erased, err, syn, seen,
                                      er_list, err_list, syn_list)
        idx = shot - lo
        er_off[idx] = epos
        for j in range(n_e):
            er_all[epos] = er_list[j]
            epos += 1
        syn_off[idx] = spos
        for j in range(n_s):
            syn_all[spos] = syn_list[j]
            spos += 1
        for j in range(n_e):
            erased[er_list[j]] = 0
        for j in range(n_err):
            err[err_list[j]] = 0
        for j in range(n_s):
            syn[syn_list[j]] = 0
    er_off[hi - lo] = epos
    syn_off[hi - lo] = spos
    return epos, spos


@njit(cache=True)
def decode_stored(indptr, indices, n_data, alg, merge_shortcut,
                  lo, hi, er_all, er_off, syn_all, syn_off,
                  parent, csize, parity, invalid, scount, visited, indirty,
                  vdirty, skip_head, skip_tail, skip_next, in_skip,
                  mem_head, mem_tail, mem_next, cl_id, fill,
                  erased, err, corr, syn,
                  L, L2, touched, er_list, err_list, syn_list, corr_list,
                  order, tree_par, bfs_mark, cl_nodes, cl_start,
                  cl_checks, cl_data, local_idx, pivcol, xval):
    """Decode pre-sampled shots; no sampling or verification in the loop.

    Returns (nonconv, visited_sum).
    """
    nonconv = 0
    visited_sum = 0.0
    for idx in range(lo, hi):
        n_e = 0
        for j in range(er_off[idx], er_off[idx + 1]):
            d = er_all[j]
            erased[d] = 1
            er_list[n_e] = d
            n_e += 1
        n_s = 0
        for j in range(syn_off[idx], syn_off[idx + 1]):
            c = syn_all[j]
            syn[c] = 1
            syn_list[n_s] = c
            n_s += 1
        status, vc, tcount, n_corr = decode_shot(
            indptr, indices, n_data, alg, merge_shortcut,
            parent, csize, parity, invalid, scount, visited, indirty,
            vdirty, skip_head, skip_tail, skip_next, in_skip,
            mem_head, mem_tail, mem_next, cl_id, fill,
            erased, err, corr, syn,
            L, L2, touched, er_list, n_e, syn_list, n_s,
            corr_list, order, tree_par, bfs_mark, cl_nodes, cl_start,
            cl_checks, cl_data, local_idx, pivcol, xval)
        if status != OK:
            nonconv += 1
        visited_sum += vc
        state_reset(n_data, alg, parent, csize, parity, invalid, scount, visited,
                    indirty, vdirty, skip_head, skip_tail, skip_next, in_skip,
                    mem_head, mem_tail, mem_next, cl_id,
                    erased, err, corr, syn,
                    touched, tcount, er_list, n_e, err_list, 0,
                    corr_list, n_corr, syn_list, n_s)
    return nonconv, visited_sum
