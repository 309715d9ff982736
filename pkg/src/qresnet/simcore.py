"""Dense statevector engine: gate matrices, operator application, expectations.

Gates are applied over strided amplitude groups (see ``backend``); full
2**n x 2**n matrices are never built here. Qubit 0 is the most significant
bit of the basis index, so Ry(pi) on qubit 0 of a 2-qubit register maps
|00> to |10>.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import CapacityError, ValidationError

MAX_QUBITS = 20

_SQ2 = 1.0 / np.sqrt(2.0)

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "P0": np.array([[1, 0], [0, 0]], dtype=np.complex128),
    "P1": np.array([[0, 0], [0, 1]], dtype=np.complex128),
}


class GateKind(enum.Enum):
    H = "h"
    RY = "ry"
    RZ = "rz"
    U3 = "u3"
    ZZ = "zz"
    CU3 = "cu3"
    CUSTOM = "custom"


GATE_ARITY = {
    GateKind.H: 1,
    GateKind.RY: 1,
    GateKind.RZ: 1,
    GateKind.U3: 1,
    GateKind.ZZ: 2,
    GateKind.CU3: 2,
}

GATE_PARAM_COUNT = {
    GateKind.H: 0,
    GateKind.RY: 1,
    GateKind.RZ: 1,
    GateKind.U3: 3,
    GateKind.ZZ: 1,
    GateKind.CU3: 3,
}


@dataclass
class Statevector:
    """2**n complex amplitudes of an n-qubit register.

    Unitary evolution preserves the norm; residual (non-unitary) operators may
    shrink it, and no operation here ever renormalizes.
    """

    n_qubits: int
    amps: np.ndarray

    def copy(self):
        return Statevector(self.n_qubits, self.amps.copy())

    def norm_sq(self):
        return float(np.real(np.vdot(self.amps, self.amps)))


def new_statevector(n_qubits):
    """|0...0> on ``n_qubits`` qubits; 1 <= n_qubits <= 20."""
    if not 1 <= int(n_qubits) <= MAX_QUBITS:
        raise CapacityError(
            f"n_qubits must be between 1 and {MAX_QUBITS}, got {n_qubits}"
        )
    n_qubits = int(n_qubits)
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(n_qubits, amps)


def _check_params(kind, params):
    want = GATE_PARAM_COUNT[kind]
    if len(params) != want:
        raise ValidationError(
            f"{kind.value} takes {want} parameter(s), got {len(params)}"
        )


def u3_matrix(theta, phi, delta):
    """General single-qubit rotation with three angles.

    Supports scalar angles (returns (2, 2)) or equal-length angle arrays
    (returns (B, 2, 2)).
    """
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    delta = np.asarray(delta, dtype=np.float64)
    c = np.cos(theta / 2).astype(np.complex128)
    s = np.sin(theta / 2).astype(np.complex128)
    m = np.empty(np.broadcast(theta, phi, delta).shape + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = c
    m[..., 0, 1] = -np.exp(1j * delta) * s
    m[..., 1, 0] = np.exp(1j * phi) * s
    m[..., 1, 1] = np.exp(1j * (phi + delta)) * c
    return m


def ry_matrix(theta):
    """exp(-i*theta*sigma_y/2); broadcasts like u3_matrix."""
    theta = np.asarray(theta, dtype=np.float64)
    c = np.cos(theta / 2).astype(np.complex128)
    s = np.sin(theta / 2).astype(np.complex128)
    m = np.empty(theta.shape + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = c
    m[..., 0, 1] = -s
    m[..., 1, 0] = s
    m[..., 1, 1] = c
    return m


def rz_matrix(theta):
    """exp(-i*theta*sigma_z/2)."""
    theta = np.asarray(theta, dtype=np.float64)
    m = np.zeros(theta.shape + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = np.exp(-0.5j * theta)
    m[..., 1, 1] = np.exp(0.5j * theta)
    return m


def zz_matrix(phi):
    """exp(-i*phi*sigma_z(x)sigma_z/2): diagonal two-qubit Ising coupling."""
    phi = np.asarray(phi, dtype=np.float64)
    lo = np.exp(-0.5j * phi)
    hi = np.exp(0.5j * phi)
    m = np.zeros(phi.shape + (4, 4), dtype=np.complex128)
    m[..., 0, 0] = lo
    m[..., 1, 1] = hi
    m[..., 2, 2] = hi
    m[..., 3, 3] = lo
    return m


def cu3_matrix(theta, phi, delta):
    """Controlled-U3: |0><0| (x) I + |1><1| (x) U3. Control is the first target."""
    u = u3_matrix(theta, phi, delta)
    m = np.zeros(u.shape[:-2] + (4, 4), dtype=np.complex128)
    m[..., 0, 0] = 1.0
    m[..., 1, 1] = 1.0
    m[..., 2:, 2:] = u
    return m


def gate_matrix(kind, params=(), custom=None):
    """Unitary matrix of a gate kind at the given angles.

    For CUSTOM, ``custom`` supplies the matrix verbatim (not validated for
    unitarity; it is the caller's escape hatch).
    """
    if kind is GateKind.CUSTOM:
        if custom is None:
            raise ValidationError("custom gate requires a matrix")
        return np.asarray(custom, dtype=np.complex128)
    _check_params(kind, params)
    if kind is GateKind.H:
        return np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=np.complex128)
    if kind is GateKind.RY:
        return ry_matrix(params[0])
    if kind is GateKind.RZ:
        return rz_matrix(params[0])
    if kind is GateKind.U3:
        return u3_matrix(*params)
    if kind is GateKind.ZZ:
        return zz_matrix(params[0])
    if kind is GateKind.CU3:
        return cu3_matrix(*params)
    raise ValidationError(f"unknown gate kind {kind!r}")


@dataclass(frozen=True)
class Observable:
    """Tensor product of single-qubit Hermitian factors.

    ``factors`` holds one entry per qubit: a label from
    {"I", "X", "Y", "Z", "P0", "P1"} or a 2x2 Hermitian matrix. Identity
    factors are skipped during evaluation.
    """

    n_qubits: int
    factors: tuple = field(default=())

    def __post_init__(self):
        if len(self.factors) != self.n_qubits:
            raise ValidationError(
                f"need {self.n_qubits} factors, got {len(self.factors)}"
            )
        for f in self.factors:
            m = self._factor_matrix(f)
            if np.max(np.abs(m - m.conj().T)) > 1e-12:
                raise ValidationError("observable factor is not Hermitian")

    @staticmethod
    def _factor_matrix(f):
        if isinstance(f, str):
            if f not in PAULI:
                raise ValidationError(f"unknown observable factor {f!r}")
            return PAULI[f]
        m = np.asarray(f, dtype=np.complex128)
        if m.shape != (2, 2):
            raise ValidationError("custom observable factor must be 2x2")
        return m

    def matrices(self):
        """(qubit, matrix) pairs for the non-identity factors."""
        out = []
        for q, f in enumerate(self.factors):
            if isinstance(f, str) and f == "I":
                continue
            out.append((q, self._factor_matrix(f)))
        return out

    @staticmethod
    def z_on(qubit, n_qubits):
        factors = ["I"] * n_qubits
        factors[qubit] = "Z"
        return Observable(n_qubits, tuple(factors))

    @staticmethod
    def identity(n_qubits):
        return Observable(n_qubits, ("I",) * n_qubits)


def apply_operator(state, matrix, targets):
    """Apply a k-qubit operator (unitary or not) to ``state`` in place.

    Returns ``state`` for chaining. The operator is embedded with identity on
    all non-target qubits; amplitudes are not renormalized.
    """
    batch = state.amps.reshape(1, -1)
    backend.apply_matrix(batch, matrix, targets, state.n_qubits)
    return state


def apply_gate(state, kind, targets, params=(), custom=None):
    return apply_operator(state, gate_matrix(kind, params, custom), targets)


def expectation_batch(states, obs, n_qubits):
    """<psi|O|psi> per row of ``states``, without normalizing.

    Asserts the imaginary residue is below 1e-10 and discards it.
    """
    work = states.copy()
    for q, m in obs.matrices():
        backend.apply_matrix(work, m, (q,), n_qubits)
    vals = np.einsum("bi,bi->b", states.conj(), work)
    if np.max(np.abs(vals.imag), initial=0.0) > 1e-10:
        raise ValidationError("expectation has a non-negligible imaginary part")
    return vals.real


def expectation(state, obs):
    """Expectation of a product observable on a (possibly unnormalized) state."""
    if obs.n_qubits != state.n_qubits:
        raise ValidationError(
            f"observable acts on {obs.n_qubits} qubits, state has {state.n_qubits}"
        )
    return float(expectation_batch(state.amps.reshape(1, -1), obs, state.n_qubits)[0])


def fidelity(a, b):
    """|<a|b>|^2 for two normalized states of equal size."""
    if a.n_qubits != b.n_qubits:
        raise ValidationError("states act on different register sizes")
    for s in (a, b):
        if abs(s.norm_sq() - 1.0) > 1e-8:
            raise ValidationError("fidelity requires normalized states")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)
