"""Counter-based, splittable 64-bit RNG.

Each Monte Carlo shot derives an independent generator state from
(seed, shot_index, stream), so trials can be executed in any order or
partitioned across workers without changing the sampled values.  The
mixing function is SplitMix64; per-stream draws walk the golden-gamma
sequence from the derived state.
"""

from __future__ import annotations

import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)

# Stream ids: keep erasure, Pauli-channel and erased-value draws on
# separate streams so e.g. the eps=0 case consumes nothing from the
# Pauli stream and reproduces a Pauli-only run bit for bit.
STREAM_ERASE = np.uint64(0x45524153)
STREAM_PAULI = np.uint64(0x5041554C)
STREAM_VALUE = np.uint64(0x56414C55)


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def derive_state(seed, shot, stream):
    """State for one (seed, shot, stream) triple."""
    s = _mix(np.uint64(seed) + GOLDEN * (np.uint64(shot) + np.uint64(1)))
    return _mix(s ^ _mix(np.uint64(stream)))


@njit(cache=True, inline="always")
def next_u64(state):
    """Advance the state; returns (new_state, value)."""
    state = state + GOLDEN
    return state, _mix(state)


@njit(cache=True, inline="always")
def next_double(state):
    """Advance the state; returns (new_state, uniform in [0, 1))."""
    state, u = next_u64(state)
    return state, (u >> np.uint64(11)) * (1.0 / 9007199254740992.0)
