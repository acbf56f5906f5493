"""Bit-packed GF(2) linear algebra against dense numpy oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ufdec import gf2
from ufdec.gf2 import Gf2Matrix, Gf2Vector


def random_dense(rng, rows, cols):
    return rng.integers(0, 2, size=(rows, cols)).astype(np.uint8)


def test_vector_roundtrip():
    bits = np.array([1, 0, 1, 1, 0, 0, 1], dtype=np.uint8)
    v = Gf2Vector.from_dense(bits)
    assert np.array_equal(v.to_dense(), bits)
    assert v.support() == [0, 2, 3, 6]


def test_vector_roundtrip_multiword():
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, size=517).astype(np.uint8)
    v = Gf2Vector.from_dense(bits)
    assert np.array_equal(v.to_dense(), bits)
    assert v.support() == list(np.flatnonzero(bits))


def test_matrix_roundtrip():
    rng = np.random.default_rng(1)
    dense = random_dense(rng, 13, 130)
    m = Gf2Matrix.from_dense(dense)
    assert np.array_equal(m.to_dense(), dense)


def test_rank_against_numpy_gauss():
    rng = np.random.default_rng(2)
    for _ in range(50):
        rows = int(rng.integers(1, 20))
        cols = int(rng.integers(1, 20))
        dense = random_dense(rng, rows, cols)
        # rank by dense elimination
        a = dense.copy().astype(np.uint8)
        r = 0
        for c in range(cols):
            piv = None
            for i in range(r, rows):
                if a[i, c]:
                    piv = i
                    break
            if piv is None:
                continue
            a[[r, piv]] = a[[piv, r]]
            for i in range(rows):
                if i != r and a[i, c]:
                    a[i] ^= a[r]
            r += 1
        assert gf2.rank(Gf2Matrix.from_dense(dense)) == r


def test_matvec_matmul_against_numpy():
    rng = np.random.default_rng(3)
    for _ in range(30):
        m, k, n = (int(x) for x in rng.integers(1, 40, size=3))
        a = random_dense(rng, m, k)
        b = random_dense(rng, k, n)
        v = rng.integers(0, 2, size=k).astype(np.uint8)
        got = gf2.matvec(Gf2Matrix.from_dense(a), Gf2Vector.from_dense(v))
        assert np.array_equal(got.to_dense(), a @ v % 2)
        gotm = gf2.matmul(Gf2Matrix.from_dense(a), Gf2Matrix.from_dense(b))
        assert np.array_equal(gotm.to_dense(), a @ b % 2)


def test_solve_satisfies_and_detects_infeasible():
    rng = np.random.default_rng(4)
    for _ in range(60):
        rows = int(rng.integers(1, 16))
        cols = int(rng.integers(1, 12))
        a = random_dense(rng, rows, cols)
        # feasible instance by construction
        x = rng.integers(0, 2, size=cols).astype(np.uint8)
        b = (a @ x % 2).astype(np.uint8)
        got = gf2.solve(Gf2Matrix.from_dense(a), Gf2Vector.from_dense(b))
        assert got is not None
        assert np.array_equal(a @ got.to_dense() % 2, b)
    # infeasible instance
    a = np.array([[1, 0], [1, 0]], dtype=np.uint8)
    b = np.array([1, 0], dtype=np.uint8)
    assert gf2.solve(Gf2Matrix.from_dense(a), Gf2Vector.from_dense(b)) is None


def test_nullspace_basis():
    rng = np.random.default_rng(5)
    for _ in range(30):
        rows = int(rng.integers(1, 12))
        cols = int(rng.integers(1, 14))
        a = random_dense(rng, rows, cols)
        m = Gf2Matrix.from_dense(a)
        ns = gf2.nullspace_basis(m)
        assert ns.rows == cols - gf2.rank(m)
        for i in range(ns.rows):
            assert not (a @ ns.row(i).to_dense() % 2).any()
        # basis rows independent
        assert gf2.rank(ns) == ns.rows


def test_in_rowspace():
    a = np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8)
    m = Gf2Matrix.from_dense(a)
    assert gf2.in_rowspace(m, Gf2Vector.from_dense(
        np.array([1, 0, 1], dtype=np.uint8)))
    assert not gf2.in_rowspace(m, Gf2Vector.from_dense(
        np.array([1, 0, 0], dtype=np.uint8)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2 ** 31 - 1))
def test_rank_bounds_property(rows, cols, seed):
    rng = np.random.default_rng(seed)
    dense = random_dense(rng, rows, cols)
    r = gf2.rank(Gf2Matrix.from_dense(dense))
    assert 0 <= r <= min(rows, cols)
    # duplicating every row never changes the rank
    doubled = np.vstack([dense, dense])
    assert gf2.rank(Gf2Matrix.from_dense(doubled)) == r


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2 ** 31 - 1))
def test_vector_xor_property(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, size=n).astype(np.uint8)
    b = rng.integers(0, 2, size=n).astype(np.uint8)
    va, vb = Gf2Vector.from_dense(a), Gf2Vector.from_dense(b)
    assert np.array_equal((va ^ vb).to_dense(), a ^ b)
    assert (va ^ va).is_zero()
