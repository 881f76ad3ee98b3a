"""Tiny splitmix64 uniform generator usable inside jitted kernels.

Keeps sampling deterministic and self-contained: the state is a 1-element
uint64 array owned by the caller, so a sweep can be split across kernel
calls without perturbing the stream.
"""

import numpy as np

from ._jit import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / float(1 << 53)


@njit
def next_uniform(state):
    """One double in [0, 1); advances state[0] in place."""
    state[0] = state[0] + _GOLDEN
    z = state[0]
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return float(z >> _S11) * _INV53


def make_state(seed: int, stream: int = 0) -> np.ndarray:
    """Independent stream state derived from (seed, stream)."""
    ss = np.random.SeedSequence([int(seed) & 0x7FFFFFFFFFFFFFFF, int(stream)])
    return ss.generate_state(1, dtype=np.uint64)
