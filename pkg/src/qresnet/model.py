"""Circuit descriptions: parameter bindings, gate ops, residual wrappers, models.

A ModelSpec is a flat sequence of CircuitOps acting on a system register plus
an Observable. Each gate parameter is bound to a fixed value, a data feature,
or a slot of the trainable parameter vector. An op may carry a residual
strategy, in which case its unitary L is replaced by a*I + b*L (see
``residual`` for the evaluation paths).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .simcore import GATE_ARITY, GATE_PARAM_COUNT, GateKind, Observable

FIXED = "fixed"
FEATURE = "feature"
TRAINABLE = "trainable"


@dataclass(frozen=True)
class Binding:
    kind: str
    value: float = 0.0
    index: int = -1

    def __post_init__(self):
        if self.kind not in (FIXED, FEATURE, TRAINABLE):
            raise ValidationError(f"unknown binding kind {self.kind!r}")
        if self.kind != FIXED and self.index < 0:
            raise ValidationError(f"{self.kind} binding needs a non-negative index")


def fixed(value):
    return Binding(FIXED, value=float(value))


def feature(index):
    return Binding(FEATURE, index=int(index))


def trainable(index):
    return Binding(TRAINABLE, index=int(index))


TRADITIONAL = "traditional"
RES_R = "r"
RES_R1 = "r1"
RES_R2 = "r2"


@dataclass(frozen=True)
class ResidualStrategy:
    """How an op's unitary L enters the circuit.

    r:  (I + L)/2, no angles.
    r1: (cos(a) I + (-1)^m_a sin(a) L)/sqrt(2), one angle.
    r2: cos(a) cos(eta) I + sin(a) sin(eta) L with eta = pi*m_a/2 - gamma.
    """

    kind: str
    alpha: Binding | None = None
    gamma: Binding | None = None
    m_a: int = 0

    def __post_init__(self):
        if self.kind not in (TRADITIONAL, RES_R, RES_R1, RES_R2):
            raise ValidationError(f"unknown residual kind {self.kind!r}")
        if self.m_a not in (0, 1):
            raise ValidationError("m_a must be 0 or 1")
        if self.kind == RES_R1 and self.alpha is None:
            raise ValidationError("r1 requires an alpha binding")
        if self.kind == RES_R2 and (self.alpha is None or self.gamma is None):
            raise ValidationError("r2 requires alpha and gamma bindings")
        for b in (self.alpha, self.gamma):
            if b is not None and b.kind == FEATURE:
                raise ValidationError("residual angles cannot be feature-bound")

    @property
    def is_residual(self):
        return self.kind != TRADITIONAL


@dataclass(frozen=True)
class CircuitOp:
    gate: GateKind
    targets: tuple
    params: tuple = ()
    residual: ResidualStrategy | None = None
    matrix: np.ndarray | None = None  # CUSTOM only

    def __post_init__(self):
        if self.gate is GateKind.CUSTOM:
            if self.matrix is None:
                raise ValidationError("custom op requires a matrix")
        else:
            if len(self.params) != GATE_PARAM_COUNT[self.gate]:
                raise ValidationError(
                    f"{self.gate.value} takes {GATE_PARAM_COUNT[self.gate]} "
                    f"parameter(s), got {len(self.params)}"
                )
            if len(self.targets) != GATE_ARITY[self.gate]:
                raise ValidationError(
                    f"{self.gate.value} acts on {GATE_ARITY[self.gate]} qubit(s)"
                )

    @property
    def is_residual(self):
        return self.residual is not None and self.residual.is_residual


# Occurrence slots for the residual angles (ordinary params use their tuple index).
SLOT_ALPHA = -1
SLOT_GAMMA = -2

# Gate kinds whose angle dependence is a plain Pauli rotation (generator
# eigenvalue gaps in {0, 1}), making the two-term shift rule exact.
_SHIFT_OK_GATES = (GateKind.RY, GateKind.RZ, GateKind.ZZ, GateKind.U3)


@dataclass(frozen=True)
class ModelSpec:
    """An executable circuit: ops in order, an observable, parameter metadata."""

    n_qubits: int
    ops: tuple
    observable: Observable
    n_params: int
    n_features: int = 1
    init_overrides: tuple = ()  # ((param_index, value), ...) applied after seeding
    name: str = ""

    def __post_init__(self):
        if self.observable.n_qubits != self.n_qubits:
            raise ValidationError("observable size does not match the register")
        for op in self.ops:
            for q in op.targets:
                if not 0 <= q < self.n_qubits:
                    raise ValidationError(f"target {q} out of range")
            if len(set(op.targets)) != len(op.targets):
                raise ValidationError("duplicate targets in one op")
            bindings = list(op.params)
            if op.residual is not None:
                bindings += [b for b in (op.residual.alpha, op.residual.gamma) if b]
            for b in bindings:
                if b.kind == TRAINABLE and b.index >= self.n_params:
                    raise ValidationError(f"trainable index {b.index} out of range")
                if b.kind == FEATURE and b.index >= self.n_features:
                    raise ValidationError(f"feature index {b.index} out of range")

    def residual_ops(self):
        return [i for i, op in enumerate(self.ops) if op.is_residual]

    def occurrences(self, param_index):
        """Every (op_index, slot) where trainable ``param_index`` appears.

        Slots >= 0 index the op's params tuple; SLOT_ALPHA / SLOT_GAMMA are
        the residual angles.
        """
        occ = []
        for i, op in enumerate(self.ops):
            for s, b in enumerate(op.params):
                if b.kind == TRAINABLE and b.index == param_index:
                    occ.append((i, s))
            if op.residual is not None:
                if (
                    op.residual.alpha is not None
                    and op.residual.alpha.kind == TRAINABLE
                    and op.residual.alpha.index == param_index
                ):
                    occ.append((i, SLOT_ALPHA))
                if (
                    op.residual.gamma is not None
                    and op.residual.gamma.kind == TRAINABLE
                    and op.residual.gamma.index == param_index
                ):
                    occ.append((i, SLOT_GAMMA))
        return occ

    def shift_eligible(self, param_index):
        """True when every occurrence supports the exact two-term shift rule.

        Residual angles and any parameter inside a residual-wrapped or
        controlled gate fall back to finite differences.
        """
        occ = self.occurrences(param_index)
        if not occ:
            return True  # unused parameter: gradient is exactly zero either way
        for i, s in occ:
            op = self.ops[i]
            if s < 0 or op.is_residual or op.gate not in _SHIFT_OK_GATES:
                return False
        return True

    def initial_params(self, seed):
        """Uniform [0, 2pi) draw from ``seed``, then the declared overrides."""
        rng = np.random.default_rng(seed)
        theta = rng.uniform(0.0, 2.0 * np.pi, self.n_params)
        for idx, value in self.init_overrides:
            theta[idx] = value
        return theta
