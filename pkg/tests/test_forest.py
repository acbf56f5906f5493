"""Cluster forest unit tests against a naive partition model."""

import random

import pytest

from ufdec.forest import ClusterForest


def test_bad_mode_rejected():
    with pytest.raises(ValueError):
        ClusterForest(4, mode="banana")


def test_singletons():
    f = ClusterForest(5)
    for i in range(5):
        assert f.find(i) == i
        assert f.size(i) == 1
        assert f.cluster_parity(i) == 0
    assert f.n_invalid == 0


def test_parity_merge_rules():
    f = ClusterForest(6)
    f.set_parity(0, 1)
    f.set_parity(1, 1)
    f.set_parity(2, 1)
    assert f.n_invalid == 3
    r = f.merge(0, 1)          # odd + odd -> even
    assert f.cluster_parity(r) == 0
    assert f.n_invalid == 1
    r = f.merge(r, 2)          # even + odd -> odd
    assert f.cluster_parity(r) == 1
    assert f.n_invalid == 1
    r2 = f.merge(3, 4)         # even + even -> even
    assert f.cluster_parity(r2) == 0
    assert f.n_invalid == 1
    assert f.size(r) == 3 and f.size(r2) == 2


def test_merge_idempotent():
    f = ClusterForest(3)
    r = f.merge(0, 1)
    assert f.merge(0, 1) == r
    assert f.size(0) == 2


def test_union_by_size():
    f = ClusterForest(8)
    big = f.merge(f.merge(0, 1), 2)
    r = f.merge(big, 3)
    assert r == big  # the larger cluster's root survives


def test_skip_lists_concatenate_on_merge():
    f = ClusterForest(8)
    f.skip_append(0)
    f.skip_append(1)
    f.skip_append(4)
    f.merge(0, 1)
    f.merge(4, 5)
    r = f.merge(0, 4)
    got = f.skipped(r)
    assert sorted(got) == [0, 1, 4]
    assert f.drain_skipped(r) == got
    assert f.skipped(r) == []
    # drained nodes may be re-appended afterwards
    f.skip_append(1)
    assert f.skipped(r) == [1]


def test_skip_append_once():
    f = ClusterForest(4)
    f.skip_append(2)
    f.skip_append(2)
    assert f.skipped(2) == [2]


def test_qldpc_invalid_or_and_counts():
    f = ClusterForest(6, mode="qldpc")
    f.set_invalid(0, 1)
    f.add_syndrome_count(0, 2)
    f.add_syndrome_count(1, 1)
    assert f.n_invalid == 1
    r = f.merge(0, 1)
    assert f.is_invalid(r)
    assert f.scount[r] == 3
    assert f.n_invalid == 1
    # merging two invalid clusters leaves one invalid cluster
    f.set_invalid(2, 1)
    r = f.merge(r, 2)
    assert f.is_invalid(r) and f.n_invalid == 1
    assert sorted(f.members(r)) == [0, 1, 2]


def test_members_topological_raises():
    f = ClusterForest(3)
    with pytest.raises(RuntimeError):
        f.members(0)


@pytest.mark.parametrize("mode", ["topological", "qldpc"])
def test_random_against_partition_model(mode):
    rng = random.Random(9)
    n = 40
    f = ClusterForest(n, mode=mode)
    part = {i: {i} for i in range(n)}   # root -> member set
    flag = {i: 0 for i in range(n)}     # root -> parity/invalid flag
    for i in range(n):
        v = rng.randint(0, 1)
        if mode == "topological":
            f.set_parity(i, v)
        else:
            f.set_invalid(i, v)
        flag[i] = v
    for _ in range(200):
        a, b = rng.randrange(n), rng.randrange(n)
        ra = next(r for r, s in part.items() if a in s)
        rb = next(r for r, s in part.items() if b in s)
        f.merge(a, b)
        if ra != rb:
            if mode == "topological":
                merged = flag[ra] ^ flag[rb]
            else:
                merged = flag[ra] | flag[rb]
            part[ra] |= part.pop(rb)
            flag[ra] = merged
            flag.pop(rb)
        for r, s in part.items():
            probe = next(iter(s))
            assert f.size(probe) == len(s)
            assert f.is_invalid(probe) == bool(flag[r])
            roots = {f.find(x) for x in s}
            assert len(roots) == 1
        if mode == "topological":
            expect = sum(flag.values())
        else:
            expect = sum(1 for v in flag.values() if v)
        assert f.n_invalid == expect
