"""Pure-numpy gate kernels: the fallback path when numba is unavailable or disabled.

Semantics are identical to ``_kernels_numba``: every function mutates the
batch of statevectors in place.
"""

import numpy as np


def apply_shared(states, mat, offs, mask):
    """Apply one k-qubit matrix to every statevector in the batch.

    states: (B, 2**n) complex128, mutated in place.
    mat: (m, m) with m = 2**k.
    offs: (m,) int64 index offsets of the operator's 2**k amplitudes.
    mask: OR of the target-qubit bit weights.
    """
    dim = states.shape[1]
    idx = np.arange(dim)
    base = idx[(idx & mask) == 0]
    gather = states[:, base[None, :] + offs[:, None]]
    states[:, base[None, :] + offs[:, None]] = mat @ gather


def apply_batched(states, mats, offs, mask):
    """Same as apply_shared but with one matrix per statevector (mats: (B, m, m))."""
    dim = states.shape[1]
    idx = np.arange(dim)
    base = idx[(idx & mask) == 0]
    gather = states[:, base[None, :] + offs[:, None]]
    states[:, base[None, :] + offs[:, None]] = mats @ gather
