"""Kernel backend selection and the batched operator-application API.

Set ``QRESNET_BACKEND=numpy`` to force the pure-numpy kernels,
``QRESNET_BACKEND=numba`` to require the compiled ones, or leave unset
(``auto``) to use numba when it imports cleanly. The two implementations are
bit-for-bit interchangeable; ``benchmarks/bench_kernels.py`` compares them.

Qubit index convention used throughout the package: qubit 0 is the most
significant bit of the basis-state index, so on an n-qubit register qubit q
carries bit weight ``2**(n - 1 - q)``.
"""

import os
from functools import lru_cache

import numpy as np

from .errors import ValidationError

_requested = os.environ.get("QRESNET_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise ValidationError(
        f"QRESNET_BACKEND must be 'auto', 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from . import _kernels_numpy as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _kernels_numba as _impl

        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import _kernels_numpy as _impl

        BACKEND = "numpy"


def backend_name():
    return BACKEND


def bit_weight(n_qubits, qubit):
    """Basis-index weight of a qubit (qubit 0 = most significant bit)."""
    return 1 << (n_qubits - 1 - qubit)


@lru_cache(maxsize=4096)
def _offsets(n_qubits, targets):
    """Amplitude offsets of a k-qubit operator block, in target order."""
    k = len(targets)
    weights = [bit_weight(n_qubits, q) for q in targets]
    mask = 0
    for w in weights:
        mask |= w
    offs = np.zeros(1 << k, dtype=np.int64)
    for j in range(1 << k):
        o = 0
        for t in range(k):
            if (j >> (k - 1 - t)) & 1:
                o += weights[t]
        offs[j] = o
    offs.setflags(write=False)
    return offs, mask


def apply_matrix(states, mat, targets, n_qubits):
    """Apply a k-qubit operator to a batch of statevectors, in place.

    states: (B, 2**n_qubits) complex128, C-contiguous.
    mat: (2**k, 2**k) for a matrix shared by the whole batch, or
         (B, 2**k, 2**k) for one matrix per batch entry.
    targets: qubit indices the operator acts on, in matrix bit order
             (targets[0] is the most significant bit of the operator space).

    The matrix need not be unitary; amplitudes are never renormalized.
    """
    targets = tuple(int(q) for q in targets)
    k = len(targets)
    if len(set(targets)) != k:
        raise ValidationError(f"duplicate target qubits: {targets}")
    if any(q < 0 or q >= n_qubits for q in targets):
        raise ValidationError(f"target out of range for {n_qubits} qubits: {targets}")
    m = 1 << k
    mat = np.asarray(mat, dtype=np.complex128)
    if mat.shape[-2:] != (m, m):
        raise ValidationError(
            f"operator shape {mat.shape} does not match {k} target qubit(s)"
        )
    if states.shape[1] != 1 << n_qubits:
        raise ValidationError(
            f"state length {states.shape[1]} does not match {n_qubits} qubits"
        )
    offs, mask = _offsets(n_qubits, targets)
    if mat.ndim == 2:
        _impl.apply_shared(states, np.ascontiguousarray(mat), offs, mask)
    elif mat.ndim == 3:
        if mat.shape[0] != states.shape[0]:
            raise ValidationError(
                f"batched operator count {mat.shape[0]} != batch size {states.shape[0]}"
            )
        _impl.apply_batched(states, np.ascontiguousarray(mat), offs, mask)
    else:
        raise ValidationError(f"operator must be 2- or 3-dimensional, got {mat.ndim}")


def new_states(n_qubits, batch):
    """Batch of |0...0> statevectors, shape (batch, 2**n_qubits)."""
    states = np.zeros((batch, 1 << n_qubits), dtype=np.complex128)
    states[:, 0] = 1.0
    return states
