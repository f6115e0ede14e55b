"""Numeric substrate shared by every model module.

Everything is float64 numpy; backpropagation is hand-derived per module, so
the finite-difference checker here is the safety net for all of them. The
seeded generator is PCG64 throughout, which keeps training bit-reproducible.
"""

from dataclasses import dataclass

import numpy as np


class ShapeError(ValueError):
    """Operand shapes are incompatible for the requested operation."""


class NumericError(ValueError):
    """A parameter produced non-finite values."""


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(eq=False)
class Param:
    """A trainable matrix paired with its gradient accumulator.

    Compared by identity: two distinct instances are never equal, even with
    the same values."""

    value: np.ndarray
    grad: np.ndarray
    name: str

    @classmethod
    def zeros(cls, shape, name: str) -> "Param":
        return cls(np.zeros(shape), np.zeros(shape), name)

    @classmethod
    def of(cls, value: np.ndarray, name: str) -> "Param":
        value = np.asarray(value, dtype=np.float64)
        return cls(value, np.zeros_like(value), name)

    def zero_grad(self) -> None:
        self.grad.fill(0.0)


@dataclass
class SgdConfig:
    learning_rate: float = 0.01
    clip_norm: float = 5.0
    dropout_rate: float = 0.5

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.clip_norm <= 0:
            raise ValueError(f"clip_norm must be > 0, got {self.clip_norm}")
        if not 0 <= self.dropout_rate < 1:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")


# ---------------------------------------------------------------------------
# elementary ops (mostly thin shape-checked numpy wrappers)

def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} are not aligned")
    return a @ b

def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise ShapeError(f"add: shapes {a.shape} and {b.shape} differ")
    return a + b

def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise ShapeError(f"hadamard: shapes {a.shape} and {b.shape} differ")
    return a * b

def concat_rows(*mats: np.ndarray) -> np.ndarray:
    cols = {m.shape[-1] for m in mats}
    if len(cols) != 1:
        raise ShapeError(f"concat_rows: column counts differ: {[m.shape for m in mats]}")
    return np.concatenate([np.atleast_2d(m) for m in mats], axis=0)

def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign to avoid overflow in exp
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out

def tanh(x: np.ndarray) -> np.ndarray:
    return np.tanh(x)


def glorot_uniform(shape, rng: np.random.Generator) -> np.ndarray:
    fan_in, fan_out = (shape[0], shape[1]) if len(shape) == 2 else (shape[0], shape[0])
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


# ---------------------------------------------------------------------------
# optimization

def clip_gradients(params, clip_norm: float) -> float:
    """Scale all gradients so their global norm is at most clip_norm.

    Returns the applied scale factor (1.0 when no clipping was needed).
    """
    if clip_norm <= 0:
        raise ValueError(f"clip_norm must be > 0, got {clip_norm}")
    total = 0.0
    for p in params:
        sq = float(np.sum(p.grad * p.grad))
        if not np.isfinite(sq):
            raise NumericError(f"non-finite gradient in parameter {p.name!r}")
        total += sq
    norm = np.sqrt(total)
    if norm <= clip_norm:
        return 1.0
    scale = clip_norm / norm
    for p in params:
        p.grad *= scale
    return scale


def sgd_step(params, cfg: SgdConfig) -> float:
    """Clip, apply value -= lr * grad, zero the gradients. Returns the clip factor."""
    scale = clip_gradients(params, cfg.clip_norm)
    for p in params:
        p.value -= cfg.learning_rate * p.grad
        p.zero_grad()
    return scale


def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask: zeros with probability rate, else 1/(1-rate)."""
    if not 0 <= rate < 1:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0:
        return np.ones(shape)
    return (rng.random(shape) >= rate) / (1.0 - rate)


# ---------------------------------------------------------------------------
# verification

def grad_check(f, params, epsilon: float = 1e-5) -> float:
    """Compare the analytic gradients already stored in params against central
    finite differences of the scalar function f.

    f must recompute the loss from the current param values and have no lasting
    side effects. Returns the worst relative error
    |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
    """
    analytic = [p.grad.copy() for p in params]
    worst = 0.0
    for p, a in zip(params, analytic):
        flat = p.value.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            f_plus = f()
            flat[i] = orig - epsilon
            f_minus = f()
            flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * epsilon)
            ana = a.reshape(-1)[i]
            err = abs(ana - numeric) / max(1e-8, abs(ana) + abs(numeric))
            worst = max(worst, err)
    return worst
