"""MSE objective, parameter-shift / finite-difference gradients, Adam training.

Gradient dispatch ("mixed", the default): the exact two-term shift rule for
trainable angles whose every occurrence is a plain Pauli-rotation-form gate,
central finite differences for residual angles and anything driving a
controlled or residual-wrapped gate.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ShiftIneligibleError, ValidationError
from .residual import as_feature_batch, evaluate_direct

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

PARAMETER_SHIFT = "parameter_shift"
FINITE_DIFFERENCE = "finite_difference"
MIXED = "mixed"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.3
    max_steps: int = 200
    batch_fraction: float = 0.7
    convergence_window: int = 10
    convergence_variance: float = 1e-8
    seed: int = 0
    gradient_mode: str = MIXED
    fd_step: float = 1e-5

    def __post_init__(self):
        if not 0.0 < self.batch_fraction <= 1.0:
            raise ValidationError("batch_fraction must be in (0, 1]")
        if self.gradient_mode not in (PARAMETER_SHIFT, FINITE_DIFFERENCE, MIXED):
            raise ValidationError(f"unknown gradient mode {self.gradient_mode!r}")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0


def adam_init(n_params):
    return AdamState(np.zeros(n_params), np.zeros(n_params))


def adam_step(state, theta, grad, lr):
    """One bias-corrected Adam update; returns fresh (state, theta)."""
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != theta.shape or state.m.shape != theta.shape:
        raise ValidationError("parameter/gradient/state shapes disagree")
    t = state.t + 1
    m = ADAM_BETA1 * state.m + (1.0 - ADAM_BETA1) * grad
    v = ADAM_BETA2 * state.v + (1.0 - ADAM_BETA2) * grad**2
    m_hat = m / (1.0 - ADAM_BETA1**t)
    v_hat = v / (1.0 - ADAM_BETA2**t)
    return AdamState(m, v, t), theta - lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


@dataclass
class TrainResult:
    best_params: np.ndarray
    loss_history: np.ndarray
    steps: int
    converged: bool


def mse_loss(model, theta, data):
    """(1/2D) * sum (y_i - f(x_i, theta))^2."""
    X, y = _check_data(model, data)
    f = evaluate_direct(model, X, theta)
    return float(np.sum((y - f) ** 2) / (2.0 * len(y)))


def _check_data(model, data):
    X, y = data
    X = as_feature_batch(X, model.n_features)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if len(y) == 0:
        raise ValidationError("dataset is empty")
    if X.shape[0] != len(y):
        raise ValidationError("feature/label counts disagree")
    return X, y


def parameter_shift_grad(model, theta, x, j):
    """Exact df/dtheta_j at one sample via +/- pi/2 shifts.

    Sums the shift rule over every gate occurrence of the parameter. Raises
    ShiftIneligibleError when the rule does not apply (residual angles,
    controlled gates); callers fall back to finite differences.
    """
    if not model.shift_eligible(j):
        raise ShiftIneligibleError(f"parameter {j} is not shift-eligible")
    X = as_feature_batch(x, model.n_features)
    return float(_shift_grad_batch(model, theta, X, j)[0])


def _shift_grad_batch(model, theta, X, j):
    grad = np.zeros(X.shape[0])
    for occ in model.occurrences(j):
        up = evaluate_direct(model, X, theta, shift=(occ, +np.pi / 2))
        dn = evaluate_direct(model, X, theta, shift=(occ, -np.pi / 2))
        grad += 0.5 * (up - dn)
    return grad


def _fd_grad_batch(model, theta, X, j, h):
    up = np.array(theta, dtype=np.float64)
    dn = np.array(theta, dtype=np.float64)
    up[j] += h
    dn[j] -= h
    return (evaluate_direct(model, X, up) - evaluate_direct(model, X, dn)) / (2.0 * h)


def output_grad(model, theta, X, config=TrainConfig()):
    """d f(x_i)/d theta_j for every sample and parameter; shape (P, B)."""
    X = np.asarray(X, dtype=np.float64)
    grads = np.zeros((model.n_params, X.shape[0]))
    for j in range(model.n_params):
        if not model.occurrences(j):
            continue
        eligible = model.shift_eligible(j)
        if config.gradient_mode == PARAMETER_SHIFT and not eligible:
            raise ShiftIneligibleError(
                f"parameter {j} is not shift-eligible; use mixed or finite_difference"
            )
        if config.gradient_mode != FINITE_DIFFERENCE and eligible:
            grads[j] = _shift_grad_batch(model, theta, X, j)
        else:
            grads[j] = _fd_grad_batch(model, theta, X, j, config.fd_step)
    return grads


def _loss_and_weights(f, y, objective):
    """Loss value and dL/df_i (already divided by D)."""
    d = len(y)
    if objective == "mse":
        return float(np.sum((y - f) ** 2) / (2 * d)), (f - y) / d
    if objective == "abs":
        a = np.abs(f)
        return float(np.sum((a - y) ** 2) / (2 * d)), (a - y) * np.sign(f) / d
    raise ValidationError(f"unknown objective {objective!r}")


def _window_converged(history, window, threshold):
    return len(history) >= window and float(np.var(history[-window:])) < threshold


def minimize(loss_fn, grad_fn, theta0, config):
    """Generic Adam loop with the windowed-variance stop rule.

    loss_fn/grad_fn take the parameter vector only; used directly by tests
    and indirectly by ``train``.
    """
    theta = np.array(theta0, dtype=np.float64)
    state = adam_init(len(theta))
    history = []
    best_loss, best_theta = math.inf, theta.copy()
    converged = False
    for _ in range(config.max_steps):
        state, theta = adam_step(state, theta, grad_fn(theta), config.learning_rate)
        loss = float(loss_fn(theta))
        history.append(loss)
        if loss < best_loss:
            best_loss, best_theta = loss, theta.copy()
        if _window_converged(
            history, config.convergence_window, config.convergence_variance
        ):
            converged = True
            break
    return TrainResult(best_theta, np.asarray(history), len(history), converged)


def train(model, config, data, objective="mse"):
    """Mini-batch Adam training of a circuit model.

    Deterministic in (model, config, data): the run seed drives the parameter
    initialization and every batch draw. The loss history records the
    full-data loss after each update; best-seen parameters are returned.
    """
    X, y = _check_data(model, data)
    d = len(y)
    rng = np.random.default_rng(config.seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, model.n_params)
    for idx, value in model.init_overrides:
        theta[idx] = value
    batch_size = math.ceil(config.batch_fraction * d)
    state = adam_init(model.n_params)
    history = []
    best_loss, best_theta = math.inf, theta.copy()
    converged = False
    for _ in range(config.max_steps):
        idx = rng.choice(d, size=batch_size, replace=False)
        Xb, yb = X[idx], y[idx]
        _, weights = _loss_and_weights(evaluate_direct(model, Xb, theta), yb, objective)
        grad = output_grad(model, theta, Xb, config) @ weights
        state, theta = adam_step(state, theta, grad, config.learning_rate)
        full_f = evaluate_direct(model, X, theta)
        loss, _ = _loss_and_weights(full_f, y, objective)
        history.append(loss)
        if loss < best_loss:
            best_loss, best_theta = loss, theta.copy()
        if _window_converged(
            history, config.convergence_window, config.convergence_variance
        ):
            converged = True
            break
    return TrainResult(best_theta, np.asarray(history), len(history), converged)
