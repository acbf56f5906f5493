"""CSS code construction and loading.

Covers the 2D toric code, the (2+1)D repeated-measurement decoding
graph, bivariate bicycle codes, and user-supplied check matrices in a
plain sparse text format.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np

from . import gf2
from .gf2 import Gf2Matrix, Gf2Vector
from .graphs import DecodingGraph, TannerGraph, SPACE_LIKE, TIME_LIKE

# Rank checks are O(n^3); skip them for very large constructed codes
# (the constructions are exercised at small sizes by the test suite).
_VALIDATE_MAX_N = 4096


class CodeConstructionError(ValueError):
    """Raised when a code fails its build-time validation."""


@dataclasses.dataclass
class CssCode:
    """A CSS code: paired check matrices, logical bases and parameters."""

    h_x: Gf2Matrix
    h_z: Gf2Matrix
    n: int
    k: int
    d: int | None
    logical_x: Gf2Matrix
    logical_z: Gf2Matrix
    name: str = ""

    def validate(self) -> None:
        """Check the defining CSS invariants (rank-based, O(n^3))."""
        prod = gf2.matmul(self.h_x, self.h_z.transpose())
        if prod.words.any():
            raise CodeConstructionError("H_X and H_Z do not commute")
        k = self.n - gf2.rank(self.h_x) - gf2.rank(self.h_z)
        if k != self.k:
            raise CodeConstructionError(f"k mismatch: rank gives {k}, declared {self.k}")
        if self.logical_x.rows != self.k or self.logical_z.rows != self.k:
            raise CodeConstructionError("logical bases must have k rows")
        for i in range(self.k):
            lx, lz = self.logical_x.row(i), self.logical_z.row(i)
            if not gf2.matvec(self.h_z, lx).is_zero():
                raise CodeConstructionError("logical_x row outside ker(h_z)")
            if not gf2.matvec(self.h_x, lz).is_zero():
                raise CodeConstructionError("logical_z row outside ker(h_x)")
            if gf2.in_rowspace(self.h_x, lx):
                raise CodeConstructionError("logical_x row is a stabilizer")
            if gf2.in_rowspace(self.h_z, lz):
                raise CodeConstructionError("logical_z row is a stabilizer")
        pairing = gf2.matmul(self.logical_x, self.logical_z.transpose())
        if pairing != Gf2Matrix.identity(self.k):
            raise CodeConstructionError("logical pairing matrix is not the identity")

    def check_matrix(self, sector: str) -> Gf2Matrix:
        s = sector.upper()
        if s == "X":
            return self.h_x
        if s == "Z":
            return self.h_z
        raise ValueError(f"unknown sector {sector!r}")

    def failure_logicals(self, sector: str) -> Gf2Matrix:
        """Logical operators whose pairing detects a failure for this sector.

        Decoding with h_z corrects bit flips; the residual is a Z-sector
        stabilizer iff it pairs trivially with every logical_z row (and
        symmetrically for h_x).
        """
        s = sector.upper()
        if s not in ("X", "Z"):
            raise ValueError(f"unknown sector {sector!r}")
        return self.logical_z if s == "Z" else self.logical_x


class _Echelon:
    """Incremental row-echelon accumulator over GF(2) (bit-packed rows)."""

    def __init__(self, cols: int):
        self.cols = cols
        self.rows: list[tuple[int, np.ndarray]] = []  # (pivot col, words)

    def _leading(self, words: np.ndarray) -> int:
        for w in range(words.shape[0]):
            v = int(words[w])
            if v:
                return (w << 6) + (v & -v).bit_length() - 1
        return -1

    def reduce(self, vec: Gf2Vector) -> np.ndarray:
        words = vec.words.copy()
        for piv, rw in self.rows:
            if (words[piv >> 6] >> np.uint64(piv & 63)) & np.uint64(1):
                words ^= rw
        return words

    def add(self, vec: Gf2Vector) -> bool:
        """Insert if independent of the current span; returns True if added."""
        words = self.reduce(vec)
        lead = self._leading(words)
        if lead < 0:
            return False
        self.rows.append((lead, words))
        self.rows.sort(key=lambda t: t[0])
        return True

    def contains(self, vec: Gf2Vector) -> bool:
        return self._leading(self.reduce(vec)) < 0


def compute_logicals(h_x: Gf2Matrix, h_z: Gf2Matrix) -> tuple[Gf2Matrix, Gf2Matrix]:
    """Logical-operator bases with pairing logical_x @ logical_z^T = I.

    logical_z rows lie in ker(h_x) and outside rowspace(h_z);
    logical_x rows lie in ker(h_z) and outside rowspace(h_x).
    Representatives are arbitrary (not minimum weight).
    """
    n = h_x.cols
    if h_z.cols != n:
        raise ValueError("column count mismatch between sectors")

    def coset_reps(kernel_of: Gf2Matrix, modulo: Gf2Matrix) -> list[Gf2Vector]:
        ker = gf2.nullspace_basis(kernel_of)
        ech = _Echelon(n)
        for r in range(modulo.rows):
            ech.add(modulo.row(r))
        reps = []
        for r in range(ker.rows):
            v = ker.row(r)
            if ech.add(v):
                reps.append(v)
        return reps

    lz = coset_reps(h_x, h_z)
    lx = coset_reps(h_z, h_x)
    if len(lz) != len(lx):
        raise CodeConstructionError("logical sector dimensions disagree")
    k = len(lz)
    logical_z = Gf2Matrix.from_rows(lz, n)
    logical_x = Gf2Matrix.from_rows(lx, n)
    if k == 0:
        return logical_x, logical_z
    # Adjust logical_x so the pairing matrix becomes the identity.
    pairing = gf2.matmul(logical_x, logical_z.transpose())
    inv = _gf2_inverse(pairing)
    if inv is None:
        raise CodeConstructionError("degenerate logical pairing")
    logical_x = gf2.matmul(inv, logical_x)
    return logical_x, logical_z


def _gf2_inverse(m: Gf2Matrix) -> Gf2Matrix | None:
    """Inverse of a small square GF(2) matrix, or None if singular."""
    k = m.rows
    if m.cols != k:
        raise ValueError("square matrix required")
    a = m.to_dense().astype(np.uint8)
    inv = np.eye(k, dtype=np.uint8)
    for c in range(k):
        piv = -1
        for r in range(c, k):
            if a[r, c]:
                piv = r
                break
        if piv < 0:
            return None
        if piv != c:
            a[[c, piv]] = a[[piv, c]]
            inv[[c, piv]] = inv[[piv, c]]
        for r in range(k):
            if r != c and a[r, c]:
                a[r] ^= a[c]
                inv[r] ^= inv[c]
    return Gf2Matrix.from_dense(inv)


def _matrix_from_supports(rows: int, cols: int, supports: list[list[int]]) -> Gf2Matrix:
    m = Gf2Matrix(rows, cols)
    words = m.words
    for r, sup in enumerate(supports):
        for c in sup:
            words[r, c >> 6] |= np.uint64(1) << np.uint64(c & 63)
    return m


# ---------------------------------------------------------------------------
# Toric codes
# ---------------------------------------------------------------------------

def toric_qubit_index(L: int, orientation: int, x: int, y: int) -> int:
    """Flat qubit index; orientation 0 = horizontal edge, 1 = vertical."""
    return orientation * L * L + (y % L) * L + (x % L)


def _toric_supports(L: int) -> tuple[list[list[int]], list[list[int]]]:
    vertex, plaquette = [], []
    for y in range(L):
        for x in range(L):
            vertex.append([
                toric_qubit_index(L, 0, x, y),
                toric_qubit_index(L, 0, x - 1, y),
                toric_qubit_index(L, 1, x, y),
                toric_qubit_index(L, 1, x, y - 1),
            ])
            plaquette.append([
                toric_qubit_index(L, 0, x, y),
                toric_qubit_index(L, 0, x, y + 1),
                toric_qubit_index(L, 1, x, y),
                toric_qubit_index(L, 1, x + 1, y),
            ])
    return vertex, plaquette


def build_toric_2d(L: int) -> CssCode:
    """Toric code on an L x L periodic lattice: n = 2L^2, k = 2, d = L."""
    if L < 2:
        raise ValueError("toric code needs L >= 2")
    n = 2 * L * L
    vertex, plaquette = _toric_supports(L)
    h_x = _matrix_from_supports(L * L, n, vertex)
    h_z = _matrix_from_supports(L * L, n, plaquette)

    # Winding-cycle logical bases, ordered so the pairing is the identity.
    lz1 = Gf2Vector.from_support(n, [toric_qubit_index(L, 0, x, 0) for x in range(L)])
    lz2 = Gf2Vector.from_support(n, [toric_qubit_index(L, 1, 0, y) for y in range(L)])
    lx1 = Gf2Vector.from_support(n, [toric_qubit_index(L, 0, 0, y) for y in range(L)])
    lx2 = Gf2Vector.from_support(n, [toric_qubit_index(L, 1, x, 0) for x in range(L)])
    logical_z = Gf2Matrix.from_rows([lz1, lz2], n)
    logical_x = Gf2Matrix.from_rows([lx1, lx2], n)

    code = CssCode(h_x, h_z, n, 2, L, logical_x, logical_z, name=f"toric2d-L{L}")
    if n <= _VALIDATE_MAX_N:
        code.validate()
    return code


def build_toric_2plus1(L: int, T: int) -> DecodingGraph:
    """Space-time decoding graph of the toric vertex sector.

    Check nodes are (vertex check, round t); space-like data nodes join a
    qubit's two vertex checks at round t; time-like nodes join the same
    check at rounds t and t+1 (periodic in time).  For T = 1 the periodic
    time-like mechanisms would join a check to itself and are dropped,
    reducing the graph to the 2D case.
    """
    if L < 2 or T < 1:
        raise ValueError("need L >= 2 and T >= 1")
    n_q = 2 * L * L
    n_c2d = L * L
    n_space = n_q * T
    n_time = n_c2d * T if T > 1 else 0
    n_data = n_space + n_time
    n_check = n_c2d * T

    vertex, _ = _toric_supports(L)
    # For each qubit, the two vertex checks containing it.
    qubit_checks: list[list[int]] = [[] for _ in range(n_q)]
    for ci, sup in enumerate(vertex):
        for q in sup:
            qubit_checks[q].append(ci)

    supports: list[list[int]] = [[] for _ in range(n_check)]
    kind = np.zeros(n_data, dtype=np.uint8)
    erasable = np.zeros(n_data, dtype=np.uint8)
    coords = np.zeros((n_data, 4), dtype=np.int32)

    for t in range(T):
        for q in range(n_q):
            d = t * n_q + q
            kind[d] = SPACE_LIKE
            erasable[d] = 1
            orientation, rem = divmod(q, L * L)
            y, x = divmod(rem, L)
            coords[d] = (orientation, x, y, t)
            for ci in qubit_checks[q]:
                supports[t * n_c2d + ci].append(d)
    if T > 1:
        for t in range(T):
            for ci in range(n_c2d):
                d = n_space + t * n_c2d + ci
                kind[d] = TIME_LIKE
                y, x = divmod(ci, L)
                coords[d] = (2, x, y, t)
                supports[t * n_c2d + ci].append(d)
                supports[((t + 1) % T) * n_c2d + ci].append(d)

    g = DecodingGraph(n_data, n_check, supports, kind, erasable, coords)
    g.L = L
    g.T = T
    return g


def spacetime_cut_masks(g: DecodingGraph) -> tuple[np.ndarray, np.ndarray]:
    """Per-data-node flags for the two spatial cut surfaces x=0 and y=0.

    Only space-like mechanisms count.  A residual crossing either seam an
    odd number of times (summed over rounds) is a logical failure.
    """
    L = g.L
    orientation = g.coords[:, 0]
    x, y = g.coords[:, 1], g.coords[:, 2]
    seam_x = ((orientation == 0) & (x == L - 1)).astype(np.uint8)
    seam_y = ((orientation == 1) & (y == L - 1)).astype(np.uint8)
    return seam_x, seam_y


# ---------------------------------------------------------------------------
# Bivariate bicycle codes
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class BicycleSpec:
    """Construction data for one bivariate bicycle code.

    A and B are sums of cyclic-shift monomials x^i y^j over Z_l x Z_m;
    the code is H_X = [A|B], H_Z = [B^T|A^T] with n = 2*l*m.
    """

    l: int
    m: int
    a_monomials: list[tuple[int, int]]
    b_monomials: list[tuple[int, int]]
    declared_n: int
    declared_k: int
    declared_d: int
    name: str = ""

    def __post_init__(self):
        self.a_monomials = [(i % self.l, j % self.m) for i, j in self.a_monomials]
        self.b_monomials = [(i % self.l, j % self.m) for i, j in self.b_monomials]
        if self.declared_n != 2 * self.l * self.m:
            raise CodeConstructionError(
                f"declared n={self.declared_n} but 2*l*m={2 * self.l * self.m}"
            )


def parse_bicycle_spec(path: str | Path) -> BicycleSpec:
    """Parse a bicycle spec file.

    Line-oriented text: `l <int>`, `m <int>`, `a i,j i,j ...`,
    `b i,j i,j ...`, `nkd <n> <k> <d>`.  `#` starts a comment.
    """
    fields: dict[str, str] = {}
    path = Path(path)
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        fields[key.lower()] = rest.strip()
    try:
        l = int(fields["l"])
        m = int(fields["m"])
        a = [tuple(int(t) for t in tok.split(",")) for tok in fields["a"].split()]
        b = [tuple(int(t) for t in tok.split(",")) for tok in fields["b"].split()]
        n, k, d = (int(t) for t in fields["nkd"].split())
    except (KeyError, ValueError, IndexError) as exc:
        raise CodeConstructionError(f"bad bicycle spec file {path}: {exc}") from exc
    return BicycleSpec(l, m, a, b, n, k, d, name=path.stem)


def _monomial_sum(l: int, m: int, monomials: list[tuple[int, int]]) -> np.ndarray:
    lm = l * m
    out = np.zeros((lm, lm), dtype=np.uint8)
    for i, j in monomials:
        for a in range(l):
            for b in range(m):
                out[a * m + b, ((a + i) % l) * m + ((b + j) % m)] ^= 1
    return out


def build_bicycle(spec: BicycleSpec) -> CssCode:
    """Build and validate a bivariate bicycle code from its spec."""
    l, m = spec.l, spec.m
    n = 2 * l * m
    a = _monomial_sum(l, m, spec.a_monomials)
    b = _monomial_sum(l, m, spec.b_monomials)
    h_x = Gf2Matrix.from_dense(np.hstack([a, b]))
    h_z = Gf2Matrix.from_dense(np.hstack([b.T, a.T]))
    prod = gf2.matmul(h_x, h_z.transpose())
    if prod.words.any():
        raise CodeConstructionError("bicycle construction failed commutation")
    k = n - gf2.rank(h_x) - gf2.rank(h_z)
    if k != spec.declared_k:
        raise CodeConstructionError(
            f"bicycle spec {spec.name!r}: computed k={k}, declared k={spec.declared_k}"
        )
    logical_x, logical_z = compute_logicals(h_x, h_z)
    name = spec.name or f"bicycle-n{n}k{k}"
    code = CssCode(h_x, h_z, n, k, spec.declared_d, logical_x, logical_z, name=name)
    code.validate()
    return code


def bundled_bicycle_path(n: int) -> Path:
    """Path to the shipped spec file for the n-qubit bicycle code."""
    root = Path(__file__).parent / "data"
    path = root / f"bicycle_{n}.bb"
    if not path.exists():
        raise FileNotFoundError(f"no bundled bicycle spec for n={n}")
    return path


def build_bundled_bicycle(n: int) -> CssCode:
    return build_bicycle(parse_bicycle_spec(bundled_bicycle_path(n)))


# ---------------------------------------------------------------------------
# Sparse check-matrix files
# ---------------------------------------------------------------------------

class ParseError(ValueError):
    """Raised on malformed check-matrix files."""


def _parse_block(lines: list[str], pos: int, label: str) -> tuple[Gf2Matrix, int]:
    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    if pos >= len(lines):
        raise ParseError(f"missing header for {label} block")
    header = lines[pos].split()
    if len(header) != 2:
        raise ParseError(f"{label} header must be 'rows cols', got {lines[pos]!r}")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParseError(f"bad {label} header: {exc}") from exc
    if rows < 0 or cols < 0:
        raise ParseError(f"negative dimension in {label} header")
    pos += 1
    supports: list[list[int]] = []
    for r in range(rows):
        if pos >= len(lines):
            raise ParseError(f"{label} block truncated at row {r}")
        try:
            sup = [int(t) for t in lines[pos].split()]
        except ValueError as exc:
            raise ParseError(f"bad index in {label} row {r}: {exc}") from exc
        for c in sup:
            if not 0 <= c < cols:
                raise ParseError(f"{label} row {r}: column {c} out of range")
        supports.append(sup)
        pos += 1
    return _matrix_from_supports(rows, cols, supports), pos


def load_check_matrices(path: str | Path, name: str | None = None) -> CssCode:
    """Load a CSS code from the sparse text format.

    Two blocks (H_X then H_Z), each a `rows cols` header followed by one
    line per row listing zero-based column indices.  `#` starts a comment.
    """
    path = Path(path)
    lines = [raw.split("#", 1)[0].rstrip() for raw in path.read_text().splitlines()]
    h_x, pos = _parse_block(lines, 0, "H_X")
    h_z, pos = _parse_block(lines, pos, "H_Z")
    if h_x.cols != h_z.cols:
        raise ParseError("H_X and H_Z disagree on the qubit count")
    n = h_x.cols
    prod = gf2.matmul(h_x, h_z.transpose())
    if prod.words.any():
        raise CodeConstructionError(f"{path}: H_X and H_Z do not commute")
    k = n - gf2.rank(h_x) - gf2.rank(h_z)
    logical_x, logical_z = compute_logicals(h_x, h_z)
    code = CssCode(h_x, h_z, n, k, None, logical_x, logical_z,
                   name=name or path.stem)
    code.validate()
    return code


def save_check_matrices(code: CssCode, path: str | Path) -> None:
    """Write a code's check matrices in the sparse text format."""
    out = []
    for h in (code.h_x, code.h_z):
        out.append(f"{h.rows} {h.cols}")
        for r in range(h.rows):
            out.append(" ".join(str(c) for c in h.row(r).support()))
    Path(path).write_text("\n".join(out) + "\n")


def sector_tanner(code: CssCode, sector: str) -> TannerGraph:
    """Tanner sub-graph of one sector's check matrix."""
    return TannerGraph.from_check_matrix(code.check_matrix(sector))
