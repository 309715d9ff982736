import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def dense_embed(matrix, targets, n_qubits):
    """Full 2**n x 2**n embedding of a k-qubit operator, built by direct index
    enumeration (independent of the strided kernel logic)."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    k = len(targets)
    dim = 1 << n_qubits
    out = np.zeros((dim, dim), dtype=np.complex128)
    others = [q for q in range(n_qubits) if q not in targets]

    def bit(index, q):
        return (index >> (n_qubits - 1 - q)) & 1

    for row in range(dim):
        for col in range(dim):
            if any(bit(row, q) != bit(col, q) for q in others):
                continue
            r = 0
            c = 0
            for t, q in enumerate(targets):
                r = (r << 1) | bit(row, q)
                c = (c << 1) | bit(col, q)
            out[row, col] = matrix[r, c]
    return out


def random_state(n_qubits, rng):
    amps = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return amps / np.linalg.norm(amps)


def random_unitary(dim, rng):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))
