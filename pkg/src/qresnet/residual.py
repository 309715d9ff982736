"""Residual operators and the two evaluation paths for residual circuits.

An op wrapped by a residual strategy evolves the state with a*I + b*L instead
of its unitary L. The direct path applies that (non-unitary) matrix to the
system register; the ancilla path realizes the same evolution with one extra
qubit per residual block (rotation - controlled-L - rotation) and reads the
expectation in the ancilla's |0><0| subspace. Both paths return the same
number; the direct path is cheaper and is what training uses.
"""

from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import CapacityError, ValidationError
from .model import (
    FEATURE,
    FIXED,
    RES_R,
    RES_R1,
    RES_R2,
    TRADITIONAL,
    TRAINABLE,
    ModelSpec,
    ResidualStrategy,
)
from .simcore import (
    MAX_QUBITS,
    GateKind,
    Observable,
    expectation_batch,
    gate_matrix,
    ry_matrix,
)

__all__ = [
    "ACoefficients",
    "ResidualStrategy",
    "a_coefficients",
    "residual_matrix",
    "residual_expectation_direct",
    "residual_expectation_ancilla",
    "evaluate_direct",
    "evaluate_ancilla",
    "system_states",
]


def _combine_weights(strategy, alpha, gamma):
    """Identity and L weights (a, b) of the residual operator."""
    kind = strategy.kind
    if kind == RES_R:
        return 0.5, 0.5
    if kind == RES_R1:
        sign = -1.0 if strategy.m_a else 1.0
        s2 = 1.0 / np.sqrt(2.0)
        return np.cos(alpha) * s2, sign * np.sin(alpha) * s2
    if kind == RES_R2:
        eta = np.pi * strategy.m_a / 2.0 - gamma
        return np.cos(alpha) * np.cos(eta), np.sin(alpha) * np.sin(eta)
    raise ValidationError(f"strategy {kind!r} is not a residual operator")


def _check_unitary(mat):
    mat = np.asarray(mat, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError("L must be a square matrix")
    err = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
    if err > 1e-10:
        raise ValidationError(f"L is not unitary (deviation {err:.2e})")
    return mat


def residual_matrix(strategy, L, alpha=0.0, gamma=0.0):
    """The residual operator for a unitary L, exactly as defined.

    r:  (I + L)/2
    r1: (cos(alpha) I + (-1)^m_a sin(alpha) L)/sqrt(2)
    r2: cos(alpha) cos(eta) I + sin(alpha) sin(eta) L, eta = pi*m_a/2 - gamma
    """
    L = _check_unitary(L)
    a, b = _combine_weights(strategy, alpha, gamma)
    return a * np.eye(L.shape[0], dtype=np.complex128) + b * L


@dataclass(frozen=True)
class ACoefficients:
    """Weights of the three-term residual loss decomposition.

    f_res = a1 * <U' O U> + a2 * <O> + a3 * Re<O U>, all in the state
    entering the residual block.
    """

    a1: float
    a2: float
    a3: float


def a_coefficients(strategy, alpha=0.0, gamma=0.0):
    kind = strategy.kind
    if kind == TRADITIONAL:
        raise ValidationError("a-coefficients are defined for residual strategies only")
    if kind == RES_R:
        return ACoefficients(0.25, 0.25, 0.5)
    if kind == RES_R1:
        sign = -1.0 if strategy.m_a else 1.0
        return ACoefficients(
            np.sin(alpha) ** 2 / 2.0,
            np.cos(alpha) ** 2 / 2.0,
            sign * np.sin(2.0 * alpha) / 2.0,
        )
    if kind == RES_R2:
        eta = np.pi * strategy.m_a / 2.0 - gamma
        return ACoefficients(
            (np.sin(alpha) * np.sin(eta)) ** 2,
            (np.cos(alpha) * np.cos(eta)) ** 2,
            np.sin(2.0 * alpha) * np.sin(2.0 * eta) / 2.0,
        )
    raise ValidationError(f"unknown strategy kind {kind!r}")


def as_feature_batch(x, n_features):
    """Coerce scalar / vector / matrix input into a (B, n_features) array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        if n_features == 1:
            arr = arr.reshape(-1, 1)
        else:
            arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != n_features:
        raise ValidationError(
            f"features must have {n_features} column(s), got shape {arr.shape}"
        )
    return arr


def _resolve(binding, X, theta, delta=0.0):
    if binding.kind == FIXED:
        return binding.value + delta
    if binding.kind == FEATURE:
        return X[:, binding.index] + delta
    if binding.kind == TRAINABLE:
        return float(theta[binding.index]) + delta
    raise ValidationError(f"unknown binding kind {binding.kind!r}")


def _op_unitary(op, X, theta, shift=None):
    """The op's plain unitary, shape (m, m) or (B, m, m) when feature-bound."""
    if op.gate is GateKind.CUSTOM:
        return np.asarray(op.matrix, dtype=np.complex128)
    params = []
    for s, b in enumerate(op.params):
        delta = 0.0
        if shift is not None and shift[0] == s:
            delta = shift[1]
        params.append(_resolve(b, X, theta, delta))
    return gate_matrix(op.gate, params)


def _residual_angles(op, X, theta):
    strat = op.residual
    alpha = _resolve(strat.alpha, X, theta) if strat.alpha is not None else 0.0
    gamma = _resolve(strat.gamma, X, theta) if strat.gamma is not None else 0.0
    return float(alpha), float(gamma)


def evaluate_direct(model, X, theta, shift=None):
    """Model expectation per sample via the direct (non-unitary) path.

    X: (B, n_features); theta: (n_params,).
    shift: optional ((op_index, slot), delta) adding ``delta`` to the resolved
    angle of a single gate occurrence (used by the parameter-shift rule).
    Returns a (B,) float array; nothing is renormalized.
    """
    X = np.asarray(X, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    states = backend.new_states(model.n_qubits, X.shape[0])
    for i, op in enumerate(model.ops):
        op_shift = None
        if shift is not None and shift[0][0] == i and shift[0][1] >= 0:
            op_shift = (shift[0][1], shift[1])
        U = _op_unitary(op, X, theta, op_shift)
        if op.is_residual:
            a, b = _combine_weights(op.residual, *_residual_angles(op, X, theta))
            eye = np.eye(U.shape[-1], dtype=np.complex128)
            U = a * eye + b * U
        backend.apply_matrix(states, U, op.targets, model.n_qubits)
    return expectation_batch(states, model.observable, model.n_qubits)


def _controlled(U):
    """Block embedding |0><0| (x) I + |1><1| (x) U; control is the extra qubit."""
    m = U.shape[-1]
    out = np.zeros(U.shape[:-2] + (2 * m, 2 * m), dtype=np.complex128)
    idx = np.arange(m)
    out[..., idx, idx] = 1.0
    out[..., m:, m:] = U
    return out


def _ancilla_layout(model):
    blocks = model.residual_ops()
    n_total = model.n_qubits + len(blocks)
    if n_total > MAX_QUBITS:
        raise CapacityError(
            f"system plus {len(blocks)} ancilla(s) exceeds the {MAX_QUBITS}-qubit cap"
        )
    return blocks, n_total


def _run_ancilla_circuit(model, X, theta):
    X = np.asarray(X, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    blocks, n_total = _ancilla_layout(model)
    anc_of = {op_i: model.n_qubits + k for k, op_i in enumerate(blocks)}
    states = backend.new_states(n_total, X.shape[0])
    hadamard = gate_matrix(GateKind.H)
    for i, op in enumerate(model.ops):
        U = _op_unitary(op, X, theta)
        if not op.is_residual:
            backend.apply_matrix(states, U, op.targets, n_total)
            continue
        anc = anc_of[i]
        kind = op.residual.kind
        alpha, gamma = _residual_angles(op, X, theta)
        first = hadamard if kind == RES_R else ry_matrix(2.0 * alpha)
        second = hadamard if kind in (RES_R, RES_R1) else ry_matrix(2.0 * gamma)
        backend.apply_matrix(states, first, (anc,), n_total)
        backend.apply_matrix(states, _controlled(U), (anc,) + tuple(op.targets), n_total)
        backend.apply_matrix(states, second, (anc,), n_total)
    return states, blocks, n_total


def _branch_projectors(model, blocks):
    out = []
    for op_i in blocks:
        strat = model.ops[op_i].residual
        m_a = strat.m_a if strat.kind in (RES_R1, RES_R2) else 0
        out.append("P1" if m_a else "P0")
    return out


def evaluate_ancilla(model, X, theta, two_observable=False):
    """Model expectation per sample via the ancilla-circuit path.

    One ancilla qubit per residual block. With ``two_observable`` the
    subspace projection is computed literally as the average of the
    sigma_0 (x) O and sigma_z (x) O readouts per ancilla; the default applies
    the equivalent |0><0| projector factor directly.
    """
    states, blocks, n_total = _run_ancilla_circuit(model, X, theta)
    sys_factors = tuple(model.observable.factors)
    projectors = _branch_projectors(model, blocks)
    if not two_observable:
        obs = Observable(n_total, sys_factors + tuple(projectors))
        return expectation_batch(states, obs, n_total)
    # Expand prod_k (sigma_0 +/- sigma_z)/2 into 2**l readouts.
    total = np.zeros(states.shape[0])
    l = len(blocks)
    for bits in range(1 << l):
        anc_factors = []
        coef = 1.0
        for k in range(l):
            if (bits >> (l - 1 - k)) & 1:
                anc_factors.append("Z")
                if projectors[k] == "P1":
                    coef = -coef
            else:
                anc_factors.append("I")
        obs = Observable(n_total, sys_factors + tuple(anc_factors))
        total += coef * expectation_batch(states, obs, n_total)
    return total / (1 << l)


def system_states(model, X, theta, normalize=True):
    """System-register states produced by the model, for fidelity estimates.

    Unitary models run directly. Residual models run the ancilla circuit and
    keep the amplitudes with every ancilla in its measured branch; with
    ``normalize`` the surviving block is rescaled to unit norm.
    """
    X = np.asarray(X, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if not model.residual_ops():
        states = backend.new_states(model.n_qubits, X.shape[0])
        for op in model.ops:
            backend.apply_matrix(
                states, _op_unitary(op, X, theta), op.targets, model.n_qubits
            )
        return states
    states, blocks, n_total = _run_ancilla_circuit(model, X, theta)
    l = len(blocks)
    offset = 0
    for k, proj in enumerate(_branch_projectors(model, blocks)):
        if proj == "P1":
            offset += 1 << (l - 1 - k)
    sys = np.ascontiguousarray(states[:, offset :: (1 << l)])
    if normalize:
        norms = np.linalg.norm(sys, axis=1)
        if np.any(norms < 1e-12):
            raise ValidationError("projected state has vanishing weight")
        sys /= norms[:, None]
    return sys


def residual_expectation_direct(model, x, theta):
    """Single-sample convenience wrapper around evaluate_direct."""
    X = as_feature_batch(x, model.n_features)
    return float(evaluate_direct(model, X, theta)[0])


def residual_expectation_ancilla(model, x, theta, two_observable=False):
    """Single-sample convenience wrapper around evaluate_ancilla."""
    X = as_feature_batch(x, model.n_features)
    return float(evaluate_ancilla(model, X, theta, two_observable)[0])
