"""Dense bit-packed linear algebra over GF(2).

Matrices and vectors store one bit per entry in 64-bit words (row-major,
little-endian bit order within a word).  All arithmetic is modulo 2.
Elimination is performed from scratch on each call; nothing is cached.
"""

from __future__ import annotations

import numpy as np

_WORD = 64


def _nwords(nbits: int) -> int:
    return (nbits + _WORD - 1) // _WORD


class Gf2Vector:
    """Bit vector over GF(2)."""

    __slots__ = ("len", "words")

    def __init__(self, length: int, words: np.ndarray | None = None):
        if length < 0:
            raise ValueError("negative length")
        self.len = length
        if words is None:
            words = np.zeros(_nwords(length), dtype=np.uint64)
        self.words = words

    @classmethod
    def from_dense(cls, bits) -> "Gf2Vector":
        bits = np.asarray(bits, dtype=np.uint8) & 1
        v = cls(len(bits))
        idx = np.nonzero(bits)[0]
        for i in idx:
            v.set(int(i), 1)
        return v

    @classmethod
    def from_support(cls, length: int, support) -> "Gf2Vector":
        v = cls(length)
        for i in support:
            v.set(int(i), 1)
        return v

    def to_dense(self) -> np.ndarray:
        bits = np.unpackbits(self.words.view(np.uint8), bitorder="little")
        return bits[:self.len]

    def get(self, i: int) -> int:
        return int((self.words[i >> 6] >> np.uint64(i & 63)) & np.uint64(1))

    def set(self, i: int, bit: int) -> None:
        mask = np.uint64(1) << np.uint64(i & 63)
        if bit:
            self.words[i >> 6] |= mask
        else:
            self.words[i >> 6] &= ~mask

    def weight(self) -> int:
        return int(sum(bin(int(w)).count("1") for w in self.words))

    def support(self) -> list[int]:
        return np.flatnonzero(self.to_dense()).tolist()

    def copy(self) -> "Gf2Vector":
        return Gf2Vector(self.len, self.words.copy())

    def __ixor__(self, other: "Gf2Vector") -> "Gf2Vector":
        if other.len != self.len:
            raise ValueError("length mismatch")
        self.words ^= other.words
        return self

    def __xor__(self, other: "Gf2Vector") -> "Gf2Vector":
        out = self.copy()
        out ^= other
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Gf2Vector)
            and self.len == other.len
            and bool(np.array_equal(self.words, other.words))
        )

    def is_zero(self) -> bool:
        return not self.words.any()

    def dot(self, other: "Gf2Vector") -> int:
        """Inner product modulo 2."""
        if other.len != self.len:
            raise ValueError("length mismatch")
        acc = np.bitwise_xor.reduce(self.words & other.words)
        return int(bin(int(acc)).count("1") & 1)

    def __repr__(self):
        return f"Gf2Vector(len={self.len}, weight={self.weight()})"


class Gf2Matrix:
    """Bit matrix over GF(2), row-major bit-packed storage."""

    __slots__ = ("rows", "cols", "words")

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative dimension")
        self.rows = rows
        self.cols = cols
        if words is None:
            words = np.zeros((rows, _nwords(cols)), dtype=np.uint64)
        self.words = words

    @classmethod
    def from_dense(cls, arr) -> "Gf2Matrix":
        arr = np.asarray(arr, dtype=np.uint8) & 1
        if arr.ndim != 2:
            raise ValueError("expected 2-d array")
        m = cls(arr.shape[0], arr.shape[1])
        r_idx, c_idx = np.nonzero(arr)
        for r, c in zip(r_idx, c_idx):
            m.set(int(r), int(c), 1)
        return m

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        m = cls(n, n)
        for i in range(n):
            m.set(i, i, 1)
        return m

    @classmethod
    def from_rows(cls, vectors: list[Gf2Vector], cols: int | None = None) -> "Gf2Matrix":
        if cols is None:
            cols = vectors[0].len if vectors else 0
        m = cls(len(vectors), cols)
        for i, v in enumerate(vectors):
            if v.len != cols:
                raise ValueError("row length mismatch")
            m.words[i, :] = v.words
        return m

    def to_dense(self) -> np.ndarray:
        if self.rows == 0:
            return np.zeros((0, self.cols), dtype=np.uint8)
        bits = np.unpackbits(self.words.view(np.uint8), axis=1,
                             bitorder="little")
        return bits[:, :self.cols]

    def get(self, r: int, c: int) -> int:
        return int((self.words[r, c >> 6] >> np.uint64(c & 63)) & np.uint64(1))

    def set(self, r: int, c: int, bit: int) -> None:
        mask = np.uint64(1) << np.uint64(c & 63)
        if bit:
            self.words[r, c >> 6] |= mask
        else:
            self.words[r, c >> 6] &= ~mask

    def row(self, r: int) -> Gf2Vector:
        return Gf2Vector(self.cols, self.words[r].copy())

    def copy(self) -> "Gf2Matrix":
        return Gf2Matrix(self.rows, self.cols, self.words.copy())

    def transpose(self) -> "Gf2Matrix":
        out = Gf2Matrix(self.cols, self.rows)
        for r in range(self.rows):
            w = self.words[r]
            for c in range(self.cols):
                if (w[c >> 6] >> np.uint64(c & 63)) & np.uint64(1):
                    out.set(c, r, 1)
        return out

    def stack(self, other: "Gf2Matrix") -> "Gf2Matrix":
        if other.cols != self.cols:
            raise ValueError("column mismatch")
        return Gf2Matrix(
            self.rows + other.rows,
            self.cols,
            np.vstack([self.words, other.words]),
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Gf2Matrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and bool(np.array_equal(self.words, other.words))
        )

    def __repr__(self):
        return f"Gf2Matrix({self.rows}x{self.cols})"


def _echelon(words: np.ndarray, rows: int, cols: int, aug: np.ndarray | None = None):
    """In-place forward elimination.

    Pivots are searched column by column in ascending order.  When *aug*
    (per-row augmented bits, uint8) is given, row operations are mirrored
    onto it.  Returns the list of pivot columns; pivot i lives in row i.
    """
    pivots: list[int] = []
    pr = 0
    one = np.uint64(1)
    for c in range(cols):
        if pr >= rows:
            break
        w, b = c >> 6, np.uint64(c & 63)
        colbits = (words[pr:, w] >> b) & one
        hits = np.nonzero(colbits)[0]
        if hits.size == 0:
            continue
        r = pr + int(hits[0])
        if r != pr:
            words[[pr, r]] = words[[r, pr]]
            if aug is not None:
                aug[[pr, r]] = aug[[r, pr]]
        below = pr + 1 + np.nonzero((words[pr + 1:, w] >> b) & one)[0]
        if below.size:
            words[below] ^= words[pr]
            if aug is not None:
                aug[below] ^= aug[pr]
        pivots.append(c)
        pr += 1
    return pivots


def rank(m: Gf2Matrix) -> int:
    """Row rank over GF(2).  The input is not modified."""
    words = m.words.copy()
    return len(_echelon(words, m.rows, m.cols))


def solve(m: Gf2Matrix, b: Gf2Vector) -> Gf2Vector | None:
    """Solve m @ x = b over GF(2).

    Returns None when the system is inconsistent.  Free variables are
    fixed to 0; pivots are assigned in ascending column order, so the
    result is deterministic.
    """
    if b.len != m.rows:
        raise ValueError(f"dimension mismatch: {m.rows} rows vs b of length {b.len}")
    words = m.words.copy()
    aug = np.array([b.get(i) for i in range(b.len)], dtype=np.uint8)
    pivots = _echelon(words, m.rows, m.cols, aug)
    npiv = len(pivots)
    # Inconsistent iff some zero row has a non-zero augmented bit.
    if np.any(aug[npiv:]):
        return None
    # Back-substitution over the echelon rows.
    x = Gf2Vector(m.cols)
    one = np.uint64(1)
    for i in range(npiv - 1, -1, -1):
        c = pivots[i]
        val = int(aug[i])
        row = words[i]
        # XOR in contributions of already-assigned pivots to the right.
        for jj in range(npiv - 1, i, -1):
            cj = pivots[jj]
            if (row[cj >> 6] >> np.uint64(cj & 63)) & one:
                val ^= x.get(cj)
        x.set(c, val)
    return x


def matvec(m: Gf2Matrix, v: Gf2Vector) -> Gf2Vector:
    """Matrix-vector product over GF(2)."""
    if v.len != m.cols:
        raise ValueError(f"dimension mismatch: {m.cols} cols vs v of length {v.len}")
    out = Gf2Vector(m.rows)
    acc = m.words & v.words[np.newaxis, :]
    folded = np.bitwise_xor.reduce(acc, axis=1)
    for r in range(m.rows):
        w = int(folded[r])
        out.set(r, bin(w).count("1") & 1)
    return out


def matmul(a: Gf2Matrix, b: Gf2Matrix) -> Gf2Matrix:
    """Matrix product over GF(2)."""
    if a.cols != b.rows:
        raise ValueError("dimension mismatch")
    out = Gf2Matrix(a.rows, b.cols)
    for r in range(a.rows):
        acc = np.zeros_like(out.words[0])
        row = a.words[r]
        for c in range(a.cols):
            if (row[c >> 6] >> np.uint64(c & 63)) & np.uint64(1):
                acc ^= b.words[c]
        out.words[r] = acc
    return out


def nullspace_basis(m: Gf2Matrix) -> Gf2Matrix:
    """Basis of the right kernel {x : m @ x = 0}, one vector per row.

    Row count equals cols - rank(m).
    """
    words = m.words.copy()
    pivots = _echelon(words, m.rows, m.cols)
    pivot_set = set(pivots)
    free_cols = [c for c in range(m.cols) if c not in pivot_set]
    basis = Gf2Matrix(len(free_cols), m.cols)
    one = np.uint64(1)
    for bi, f in enumerate(free_cols):
        basis.set(bi, f, 1)
        # Solve for pivot variables given x[f] = 1, other free vars 0.
        vals: dict[int, int] = {}
        for i in range(len(pivots) - 1, -1, -1):
            row = words[i]
            val = int((row[f >> 6] >> np.uint64(f & 63)) & one)
            for jj in range(len(pivots) - 1, i, -1):
                cj = pivots[jj]
                if (row[cj >> 6] >> np.uint64(cj & 63)) & one:
                    val ^= vals[cj]
            vals[pivots[i]] = val
        for c, val in vals.items():
            if val:
                basis.set(bi, c, 1)
    return basis


def in_rowspace(m: Gf2Matrix, v: Gf2Vector) -> bool:
    """True iff v is a GF(2) combination of the rows of m."""
    if v.len != m.cols:
        raise ValueError(f"dimension mismatch: {m.cols} cols vs v of length {v.len}")
    base = rank(m)
    stacked = np.vstack([m.words, v.words[np.newaxis, :]])
    return len(_echelon(stacked, m.rows + 1, m.cols)) == base
