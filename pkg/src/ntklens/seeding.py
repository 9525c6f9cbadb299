"""Deterministic master-seed fan-out.

Ensemble runs draw their seeds from the master seed through a splitmix-style
integer hash, so results do not depend on execution order and any single run
can be reproduced in isolation.
"""

MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One splitmix64 scrambling step on a 64-bit state."""
    z = (state + _GOLDEN) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return (z ^ (z >> 31)) & MASK


def derive_seed(master: int, *indices: int) -> int:
    """Child seed for a run addressed by one or more indices.

    Folds each index into the state with a splitmix64 step; the result is
    truncated to 63 bits so it stays a valid non-negative RNG seed.
    """
    state = splitmix64(master & MASK)
    for ix in indices:
        state = splitmix64(state ^ ((ix + 1) * _GOLDEN & MASK))
    return state >> 1
