"""Numba-compiled gate kernels: the default hot path.

Mirrors ``_kernels_numpy`` exactly; selected at import time by ``backend``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def apply_shared(states, mat, offs, mask):
    B, dim = states.shape
    m = offs.shape[0]
    amp = np.empty(m, np.complex128)
    for b in range(B):
        for i in range(dim):
            if i & mask != 0:
                continue
            for j in range(m):
                amp[j] = states[b, i + offs[j]]
            for j in range(m):
                acc = 0j
                for t in range(m):
                    acc += mat[j, t] * amp[t]
                states[b, i + offs[j]] = acc


@njit(cache=True)
def apply_batched(states, mats, offs, mask):
    B, dim = states.shape
    m = offs.shape[0]
    amp = np.empty(m, np.complex128)
    for b in range(B):
        for i in range(dim):
            if i & mask != 0:
                continue
            for j in range(m):
                amp[j] = states[b, i + offs[j]]
            for j in range(m):
                acc = 0j
                for t in range(m):
                    acc += mats[b, j, t] * amp[t]
                states[b, i + offs[j]] = acc
