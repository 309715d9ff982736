"""Accessible Fourier frequencies of encoding circuits, and coefficient recovery.

Traditional l-layer encodings reach differences of two sums of l generator
eigenvalues. Residual encodings add every <l1, l2> combination form with
ceil(l/2) <= l1 <= l, l2 <= l1 and l1 + l2 >= l, which enriches the spectrum.
Empirical coefficients are recovered from sampled model outputs by a small
least-squares fit.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ConditioningError, ValidationError

DEDUP_TOL = 1e-9
ENUM_CAP = 10**6


@dataclass(frozen=True)
class GeneratorSpec:
    """Eigenvalues of the generator Hamiltonian of one encoding gate."""

    eigenvalues: tuple
    label: str = ""

    def __post_init__(self):
        if len(self.eigenvalues) < 2:
            raise ValidationError("a generator needs at least two eigenvalues")
        if not all(math.isfinite(w) for w in self.eigenvalues):
            raise ValidationError("generator eigenvalues must be finite")


PAULI_HALF = GeneratorSpec((0.5, -0.5), "pauli/2")


@dataclass(frozen=True, order=True)
class FrequencyForm:
    """The <l1, l2> descriptor: +/-(sum of l1 eigenvalues - sum of l2)."""

    l1: int
    l2: int

    def __post_init__(self):
        if self.l2 > self.l1 or self.l1 < 0 or self.l2 < 0:
            raise ValidationError(f"invalid form <{self.l1},{self.l2}>")


@dataclass(frozen=True)
class Spectrum:
    frequencies: tuple
    forms: frozenset

    def __contains__(self, freq):
        return any(abs(freq - f) <= DEDUP_TOL for f in self.frequencies)

    def issuperset(self, other):
        return all(f in self for f in other.frequencies)


def _dedup(values):
    """Sorted unique values, merging anything within DEDUP_TOL."""
    out = []
    for v in sorted(values):
        if not out or v - out[-1] > DEDUP_TOL:
            out.append(v)
    return out


def _sums(eigenvalues, count):
    """All distinct sums of ``count`` eigenvalues (with repetition)."""
    if count == 0:
        return [0.0]
    acc = list(eigenvalues)
    for _ in range(count - 1):
        acc = _dedup(a + w for a in _dedup(acc) for w in eigenvalues)
    return _dedup(acc)


def _check_cap(gen, layers):
    if len(gen.eigenvalues) ** layers > ENUM_CAP:
        raise CapacityError(
            f"d**l = {len(gen.eigenvalues)}**{layers} exceeds the enumeration cap"
        )


def _symmetrize(values):
    both = list(values) + [-v for v in values]
    return tuple(_dedup(both))


def traditional_spectrum(gen, layers):
    """Frequencies of an l-layer traditional encoding: sums-of-l differences."""
    if layers < 1:
        raise ValidationError("layers must be >= 1")
    _check_cap(gen, layers)
    sums = _sums(gen.eigenvalues, layers)
    freqs = _dedup(a - b for a in sums for b in sums)
    return Spectrum(_symmetrize(freqs), frozenset({FrequencyForm(layers, layers)}))


def residual_forms(layers):
    """Every <l1, l2> combination form reachable with l residual layers."""
    if layers < 1:
        raise ValidationError("layers must be >= 1")
    forms = set()
    for l1 in range(math.ceil(layers / 2), layers + 1):
        for l2 in range(layers - l1, l1 + 1):
            forms.add(FrequencyForm(l1, l2))
    return frozenset(forms)


def form_count(layers):
    """Closed-form number of residual combination forms."""
    if layers < 1:
        raise ValidationError("layers must be >= 1")
    return (math.ceil(layers / 2) + 1) * (math.floor(layers / 2) + 1)


def residual_spectrum(gen, layers):
    """Frequencies of an l-layer residual encoding: union over all forms."""
    if layers < 1:
        raise ValidationError("layers must be >= 1")
    _check_cap(gen, layers)
    forms = residual_forms(layers)
    freqs = []
    for form in forms:
        left = _sums(gen.eigenvalues, form.l1)
        right = _sums(gen.eigenvalues, form.l2)
        freqs.extend(a - b for a in left for b in right)
    return Spectrum(_symmetrize(freqs), forms)


def enrichment_condition(gen):
    """True when some |eigenvalue| is not already a pairwise |difference|."""
    eig = gen.eigenvalues
    diffs = {round(abs(a - b), 12) for a in eig for b in eig}
    return any(
        all(abs(abs(w) - d) > DEDUP_TOL for d in diffs) for w in eig
    )


@dataclass(frozen=True)
class CoefficientFit:
    """Recovered complex coefficients keyed by frequency, plus the fit residual."""

    coefficients: dict
    residual: float

    def at(self, freq):
        for f, c in self.coefficients.items():
            if abs(f - freq) <= DEDUP_TOL:
                return c
        raise KeyError(freq)


def default_grid(candidate_freqs):
    """Uniform sample grid over one period of the candidate frequency lattice.

    4*pi when any half-integer frequency is present, else 2*pi; four samples
    per real unknown.
    """
    pos = [f for f in _dedup(abs(f) for f in candidate_freqs) if f > DEDUP_TOL]
    half_integer = any(abs(f - round(f)) > DEDUP_TOL for f in pos)
    period = 4.0 * np.pi if half_integer else 2.0 * np.pi
    n_unknowns = 2 * len(pos) + 1
    m = 4 * n_unknowns
    return np.arange(m) * period / m


def extract_coefficients(evaluate, candidate_freqs, grid=None):
    """Least-squares Fourier coefficients of ``evaluate`` on the candidate set.

    Solves f(x) = sum_w c_w exp(i w x) with c_{-w} = conj(c_w) via normal
    equations; rejects aliasing grids through a conditioning guard. Returns a
    CoefficientFit whose keys are exactly the (deduplicated) candidates.
    """
    cands = _dedup(candidate_freqs)
    if len(cands) != len(tuple(candidate_freqs)):
        raise ValidationError("candidate frequencies must be distinct")
    pos = [f for f in _dedup(abs(f) for f in cands) if f > DEDUP_TOL]
    has_zero = any(abs(f) <= DEDUP_TOL for f in cands)
    n_unknowns = 2 * len(pos) + 1
    if grid is None:
        grid = default_grid(cands)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size < n_unknowns:
        raise ValidationError(
            f"grid of {grid.size} points cannot determine {n_unknowns} unknowns"
        )
    y = np.asarray([float(evaluate(float(x))) for x in grid])
    cols = [np.ones_like(grid)]
    for w in pos:
        cols.append(2.0 * np.cos(w * grid))
        cols.append(-2.0 * np.sin(w * grid))
    design = np.column_stack(cols)
    gram = design.T @ design
    cond = np.linalg.cond(gram)
    if cond > 1e8:
        raise ConditioningError(
            f"design matrix condition estimate {cond:.2e} exceeds 1e8 (grid aliasing?)"
        )
    sol = np.linalg.solve(gram, design.T @ y)
    resid = float(np.linalg.norm(design @ sol - y))
    by_abs = {0.0: complex(sol[0])}
    for i, w in enumerate(pos):
        by_abs[w] = complex(sol[1 + 2 * i], sol[2 + 2 * i])
    coeffs = {}
    for f in cands:
        if abs(f) <= DEDUP_TOL:
            if has_zero:
                coeffs[0.0] = by_abs[0.0]
            continue
        key = min(by_abs, key=lambda w: abs(w - abs(f)))
        coeffs[f] = by_abs[key] if f > 0 else np.conj(by_abs[key])
    return CoefficientFit(coeffs, resid)


def sample_coefficient_cloud(model, n_samples, seed, candidate_freqs, grid=None):
    """Coefficient clouds over random parameter draws of a model family.

    Every sample draws the full trainable vector uniformly from [0, 2pi) on
    its own derived RNG stream, so serial and parallel evaluation orders agree
    bit for bit. Returns {frequency: complex array of n_samples coefficients}.
    """
    from .residual import evaluate_direct  # local import, avoids a cycle

    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    if grid is None:
        grid = default_grid(candidate_freqs)
    grid = np.asarray(grid, dtype=np.float64)
    X = grid.reshape(-1, 1)
    streams = np.random.SeedSequence(seed).spawn(n_samples)
    cloud = None
    for stream in streams:
        theta = np.random.default_rng(stream).uniform(0.0, 2.0 * np.pi, model.n_params)
        y = iter(evaluate_direct(model, X, theta))
        fit = extract_coefficients(lambda _x: next(y), candidate_freqs, grid=grid)
        if cloud is None:
            cloud = {f: [] for f in fit.coefficients}
        for f, c in fit.coefficients.items():
            cloud[f].append(c)
    return {f: np.asarray(v) for f, v in cloud.items()}
