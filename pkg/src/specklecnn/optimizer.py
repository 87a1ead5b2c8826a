"""Adamax: Adam's infinity-norm variant.

Per tensor element, with gradient g and step counter t:

    m <- beta1 * m + (1 - beta1) * g
    u <- max(beta2 * u, |g|)
    theta <- theta - (alpha / (1 - beta1**t)) * m / (u + epsilon)

epsilon sits in the denominator (rather than inside the max) so an
all-zero-gradient first step leaves parameters untouched.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError


@dataclass
class AdamaxState:
    """Per-tensor first moments and infinity norms plus hyperparameters."""
    m: dict
    u: dict
    t: int = 0
    alpha: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def adamax_init(params, alpha=0.001, beta1=0.9, beta2=0.999, epsilon=1e-8):
    """Fresh optimizer state: zero moments, step counter zero."""
    return AdamaxState(
        m={name: np.zeros_like(t) for name, t in params.tensors.items()},
        u={name: np.zeros_like(t) for name, t in params.tensors.items()},
        t=0, alpha=alpha, beta1=beta1, beta2=beta2, epsilon=epsilon)


def adamax_step(params, grads, state):
    """Apply one update in place; returns (params, state).

    Requires exclusive access to both. Raises on shape disagreement or
    non-finite gradients (training guard).
    """
    for name, theta in params.tensors.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise ShapeError(f"adamax_step: gradient for '{name}' has "
                             f"shape {g.shape}, parameter has {theta.shape}")
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"adamax_step: non-finite gradient "
                                     f"in '{name}'")

    state.t += 1
    dtype = params.dtype
    beta1 = dtype.type(state.beta1)
    beta2 = dtype.type(state.beta2)
    one_minus_beta1 = dtype.type(1.0 - state.beta1)
    scale = dtype.type(state.alpha / (1.0 - state.beta1 ** state.t))
    eps = dtype.type(state.epsilon)

    for name, theta in params.tensors.items():
        g = grads[name]
        m = state.m[name]
        u = state.u[name]
        m *= beta1
        m += one_minus_beta1 * g
        np.maximum(beta2 * u, np.abs(g), out=u)
        theta -= scale * m / (u + eps)
    return params, state
