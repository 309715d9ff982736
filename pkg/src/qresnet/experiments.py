"""Regression studies: Fourier-series targets, model builders, fit reports.

The single-feature models here use Ry(x) data encoding (generator eigenvalues
+/- 1/2) between Rz-Ry-Rz ansatz blocks, with the encoding optionally wrapped
by a residual operator. Multi-layer variants repeat the encoding in sequence
on one qubit or in parallel across qubits.
"""

import statistics
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ValidationError
from .model import (
    FEATURE,
    RES_R,
    RES_R1,
    RES_R2,
    TRADITIONAL,
    CircuitOp,
    ModelSpec,
    ResidualStrategy,
    feature,
    trainable,
)
from .residual import evaluate_direct
from .simcore import GateKind, Observable
from .spectrum import (
    PAULI_HALF,
    extract_coefficients,
    residual_spectrum,
    traditional_spectrum,
)
from .train import TrainConfig, train

ENCODINGS = (TRADITIONAL, RES_R, RES_R1, RES_R2)


@dataclass(frozen=True)
class FourierTarget:
    """Real-valued series y(x) = sum_i (a_i e^{i w_i x} + conj(a_i) e^{-i w_i x})."""

    terms: tuple  # ((frequency >= 0, complex amplitude), ...)

    def __post_init__(self):
        freqs = [f for f, _ in self.terms]
        if len(set(freqs)) != len(freqs):
            raise ValidationError("target frequencies must be distinct")
        if any(f < 0 for f in freqs):
            raise ValidationError("list each frequency once, as its non-negative value")

    @property
    def frequencies(self):
        return tuple(f for f, _ in self.terms)

    def evaluate(self, x):
        x = np.asarray(x, dtype=np.float64)
        y = np.zeros_like(x)
        for f, a in self.terms:
            y += 2.0 * (a.real * np.cos(f * x) - a.imag * np.sin(f * x))
        return y


_A = 0.1 + 0.1j


def make_targets():
    """The named regression targets; amplitudes unstated upstream use 0.1+0.1i
    (with +/-20% per-frequency spread where amplitudes must differ)."""
    return {
        "y1_omega1": FourierTarget(((0.0, _A), (1.0, _A))),
        "y1_omega2": FourierTarget(((0.0, _A), (0.5, _A), (1.0, _A))),
        "y2_omega2": FourierTarget(((0.0, 0.8 * _A), (0.5, 1.2 * _A), (1.0, _A))),
        "y2_omega3": FourierTarget(
            (
                (0.0, 0.1 + 0.0j),
                (0.5, 0.03 + 0.03j),
                (1.0, 0.03 + 0.03j),
                (1.5, 0.15 + 0.15j),
                (2.0, 0.15 + 0.15j),
            )
        ),
    }


def x_grid(n_points=70, span=4.0 * np.pi):
    """Evenly spaced sample points over one period of the half-integer lattice."""
    return np.linspace(0.0, span, n_points, endpoint=False)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    encoding: str
    target: FourierTarget
    layers: int = 1
    layout: str = "sequential"
    train: TrainConfig = field(default_factory=TrainConfig)
    repetitions: int = 5

    def __post_init__(self):
        if self.encoding not in ENCODINGS:
            raise ValidationError(f"unknown encoding {self.encoding!r}")
        if self.layout not in ("sequential", "parallel"):
            raise ValidationError(f"unknown layout {self.layout!r}")
        if self.layers < 1:
            raise ValidationError("layers must be >= 1")


class _ParamAlloc:
    def __init__(self):
        self.count = 0

    def take(self, n):
        idx = list(range(self.count, self.count + n))
        self.count += n
        return idx


def _ansatz_block(qubit, alloc):
    """Rz(a) Ry(b) Rz(c) with fresh trainable angles; rightmost acts first."""
    a, b, c = alloc.take(3)
    return [
        CircuitOp(GateKind.RZ, (qubit,), (trainable(c),)),
        CircuitOp(GateKind.RY, (qubit,), (trainable(b),)),
        CircuitOp(GateKind.RZ, (qubit,), (trainable(a),)),
    ]


def _encoding_op(qubit, encoding, alloc, pending):
    """Ry(x) on ``qubit``, residual-wrapped per ``encoding``.

    Residual angles are allocated after all ansatz parameters; ``pending``
    collects thunks run once the ansatz count is known.
    """
    if encoding == TRADITIONAL:
        return CircuitOp(GateKind.RY, (qubit,), (feature(0),))

    placeholder = CircuitOp(GateKind.RY, (qubit,), (feature(0),))

    def finalize():
        if encoding == RES_R:
            strat = ResidualStrategy(RES_R)
        elif encoding == RES_R1:
            (ai,) = alloc.take(1)
            strat = ResidualStrategy(RES_R1, alpha=trainable(ai))
        else:
            ai, gi = alloc.take(2)
            strat = ResidualStrategy(RES_R2, alpha=trainable(ai), gamma=trainable(gi))
        return replace(placeholder, residual=strat)

    pending.append(finalize)
    return placeholder


def build_regression_model(encoding, layers=1, layout="sequential"):
    """Model for the function-fitting studies; observable sigma_z on qubit 0.

    Sequential: alternating ansatz/encoding blocks on one qubit, ending with
    an ansatz block. Parallel: one qubit per layer, per-qubit ansatz blocks
    around per-qubit encodings, a ZZ entangler chain, readout on qubit 0.
    """
    if encoding not in ENCODINGS:
        raise ValidationError(f"unknown encoding {encoding!r}")
    alloc = _ParamAlloc()
    pending = []
    ops = []
    enc_positions = []
    if layout == "sequential":
        n_qubits = 1
        ops += _ansatz_block(0, alloc)
        for _ in range(layers):
            enc_positions.append(len(ops))
            ops.append(_encoding_op(0, encoding, alloc, pending))
            ops += _ansatz_block(0, alloc)
    elif layout == "parallel":
        n_qubits = layers
        for q in range(n_qubits):
            ops += _ansatz_block(q, alloc)
        for q in range(n_qubits):
            enc_positions.append(len(ops))
            ops.append(_encoding_op(q, encoding, alloc, pending))
        for q in range(n_qubits):
            ops += _ansatz_block(q, alloc)
        for q in range(n_qubits - 1):
            (zi,) = alloc.take(1)
            ops.append(CircuitOp(GateKind.ZZ, (q, q + 1), (trainable(zi),)))
    else:
        raise ValidationError(f"unknown layout {layout!r}")
    for pos, finalize in zip(enc_positions, pending):
        ops[pos] = finalize()
    return ModelSpec(
        n_qubits=n_qubits,
        ops=tuple(ops),
        observable=Observable.z_on(0, n_qubits),
        n_params=alloc.count,
        n_features=1,
        name=f"{encoding}-l{layers}-{layout}",
    )


def analytic_model_spectrum(model):
    """Analytic frequency spectrum of a single-feature Ry-encoded model."""
    enc_ops = [
        op for op in model.ops if any(b.kind == FEATURE for b in op.params)
    ]
    if not enc_ops:
        raise ValidationError("model has no data-encoding gate")
    if any(op.gate is not GateKind.RY for op in enc_ops):
        raise ValidationError("spectrum analysis supports Ry(x) encodings only")
    layers = len(enc_ops)
    if any(op.is_residual for op in enc_ops):
        return residual_spectrum(PAULI_HALF, layers)
    return traditional_spectrum(PAULI_HALF, layers)


def run_fit(spec, grid=None):
    """Train ``repetitions`` seeds, report losses, curves and coefficients.

    Seeds are spec.train.seed .. spec.train.seed + repetitions - 1. The curve
    and coefficient extraction use the best seed's parameters.
    """
    model = build_regression_model(spec.encoding, spec.layers, spec.layout)
    xs = x_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    ys = spec.target.evaluate(xs)
    data = (xs.reshape(-1, 1), ys)
    runs = []
    for r in range(spec.repetitions):
        cfg = replace(spec.train, seed=spec.train.seed + r)
        result = train(model, cfg, data)
        runs.append(
            {
                "seed": cfg.seed,
                "final_mse": float(result.loss_history[-1]),
                "best_mse": float(np.min(result.loss_history)),
                "steps": result.steps,
                "converged": result.converged,
                "best_params": result.best_params,
            }
        )
    best_run = min(runs, key=lambda r: r["best_mse"])
    theta_star = best_run["best_params"]
    prediction = evaluate_direct(model, xs.reshape(-1, 1), theta_star)
    spectrum = analytic_model_spectrum(model)
    candidates = sorted(
        set(np.round(spectrum.frequencies, 9))
        | {round(f, 9) for f in spec.target.frequencies}
    )
    fit = extract_coefficients(
        lambda x: float(
            evaluate_direct(model, np.array([[x]]), theta_star)[0]
        ),
        candidates,
    )
    support_ok = all(
        (f in spectrum) or abs(c) <= 1e-6 for f, c in fit.coefficients.items()
    )
    return {
        "name": spec.name,
        "encoding": spec.encoding,
        "layers": spec.layers,
        "layout": spec.layout,
        "n_params": model.n_params,
        "seeds": [r["seed"] for r in runs],
        "per_seed": [
            {k: v for k, v in r.items() if k != "best_params"} for r in runs
        ],
        "best_mse": float(min(r["best_mse"] for r in runs)),
        "median_mse": float(statistics.median(r["best_mse"] for r in runs)),
        "best_seed": best_run["seed"],
        "best_steps": best_run["steps"],
        "curve": {
            "x": xs.tolist(),
            "target": ys.tolist(),
            "prediction": prediction.tolist(),
        },
        "coefficients": {
            f"{f:g}": [c.real, c.imag] for f, c in fit.coefficients.items()
        },
        "fit_residual": fit.residual,
        "analytic_spectrum": list(spectrum.frequencies),
        "support_in_spectrum": bool(support_ok),
        "best_params": theta_star.tolist(),
    }
