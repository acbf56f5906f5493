"""Logical failure detection.

Each data node carries a packed 64-bit failure mask; the XOR of mask
words over the residual error (error XOR correction) is zero exactly
when the residual acts trivially on every logical observable.  For a
CSS sector the mask bits are the rows of the opposite-type logical
operators; for the space-time graph they are seam-crossing parities.
"""

from __future__ import annotations

import numpy as np

from .codes import CssCode, spacetime_cut_masks
from .gf2 import matvec
from .graphs import DecodingGraph


def sector_failure_mask(code: CssCode, sector: str) -> np.ndarray:
    """Packed mask for decoding the given sector ("x" or "z").

    Bit j of mask[d] is set when the logical that anticommutes with
    residual errors of this sector includes data qubit d.
    """
    logicals = code.failure_logicals(sector)
    if logicals.rows > 64:
        raise ValueError("more than 64 logical observables")
    mask = np.zeros(code.n, dtype=np.uint64)
    for j in range(logicals.rows):
        for d in logicals.row(j).support():
            mask[d] |= np.uint64(1) << np.uint64(j)
    return mask


def spacetime_failure_mask(graph: DecodingGraph) -> np.ndarray:
    """Packed seam-crossing mask for the periodic space-time graph.

    Bit 0 counts crossings of the x-direction seam, bit 1 of the
    y-direction seam; time-like mechanisms never cross either.
    """
    seam_x, seam_y = spacetime_cut_masks(graph)
    mask = np.zeros(graph.n_data, dtype=np.uint64)
    mask[seam_x.astype(bool)] |= np.uint64(1)
    mask[seam_y.astype(bool)] |= np.uint64(2)
    return mask


def residual(error: np.ndarray, correction: np.ndarray) -> np.ndarray:
    return (np.asarray(error, dtype=np.uint8)
            ^ np.asarray(correction, dtype=np.uint8))


def is_failure(mask: np.ndarray, error, correction) -> bool:
    """True when the residual flips any masked observable."""
    r = residual(error, correction).astype(bool)
    acc = np.uint64(0)
    for d in np.flatnonzero(r):
        acc ^= mask[d]
    return bool(acc != 0)


def syndrome_cleared(h, error, correction) -> bool:
    """Precondition for is_failure: the correction must reproduce the
    syndrome, i.e. the residual lies in the kernel of h."""
    r = residual(error, correction)
    from .gf2 import Gf2Vector
    v = Gf2Vector(len(r))
    for d in np.flatnonzero(r):
        v.set(int(d), 1)
    return matvec(h, v).weight() == 0


def oracle_failure(code: CssCode, sector: str, error, correction) -> bool:
    """Slow reference: residual is a failure unless it lies in the
    stabilizer rowspace of the decoded sector's check matrix."""
    from .gf2 import Gf2Vector, in_rowspace
    r = residual(error, correction)
    v = Gf2Vector(code.n)
    for d in np.flatnonzero(r):
        v.set(int(d), 1)
    h = code.check_matrix(sector)
    if matvec(h, v).weight() != 0:
        return True
    stab = code.h_z if sector.upper() == "X" else code.h_x
    return not in_rowspace(stab, v)
