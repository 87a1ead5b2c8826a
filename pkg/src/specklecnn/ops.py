"""Differentiable layer primitives: forward and backward passes.

All functions are pure and operate on single images/vectors (no batch
axis), stored as row-major numpy arrays in float32 or float64. float32 is
the training dtype; float64 exists for gradient verification.

Convolution and pooling dispatch to the selected kernel backend (compiled
extension when available, numpy otherwise); both satisfy the same
contracts and match a naive nested-loop reference within 1e-6 relative
error in float64.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ShapeError

_FLOAT_DTYPES = (np.float32, np.float64)


def _check_float(name, a):
    if a.dtype not in _FLOAT_DTYPES:
        raise TypeError(f"{name}: expected float32 or float64, got {a.dtype}")


def _as_input(name, a, rank):
    a = np.ascontiguousarray(a)
    if a.ndim != rank:
        raise ShapeError(f"{name}: expected rank {rank}, got shape {a.shape}")
    _check_float(name, a)
    return a


@dataclass
class PoolTrace:
    """Max-pool result plus what the backward pass needs.

    `argmax` holds, for every output cell, the flat row-major index of the
    selected element in the pooling input.
    """
    output: np.ndarray
    argmax: np.ndarray
    input_shape: tuple


def conv2d_valid(x, kernels_, bias):
    """Valid (unpadded) stride-1 correlation of x[H,W,Cin] with
    kernels[kh,kw,Cin,Cout] plus per-channel bias."""
    x = _as_input("conv2d_valid input", x, 3)
    kernels_ = _as_input("conv2d_valid kernels", kernels_, 4)
    bias = _as_input("conv2d_valid bias", bias, 1)
    h, w, cin = x.shape
    kh, kw, kcin, cout = kernels_.shape
    if h < kh or w < kw:
        raise ShapeError(f"conv2d_valid: input {h}x{w} smaller than "
                         f"kernel {kh}x{kw}")
    if kcin != cin:
        raise ShapeError(f"conv2d_valid: input has {cin} channels but "
                         f"kernels expect {kcin}")
    if bias.shape[0] != cout:
        raise ShapeError(f"conv2d_valid: bias length {bias.shape[0]} != "
                         f"output channels {cout}")
    return kernels.conv2d_forward(x, kernels_, bias)


def conv2d_valid_backward(x, kernels_, gy):
    """Gradients of conv2d_valid: returns (grad_input, grad_kernels,
    grad_bias) for upstream gradient gy of the forward output."""
    x = _as_input("conv2d_valid_backward input", x, 3)
    kernels_ = _as_input("conv2d_valid_backward kernels", kernels_, 4)
    gy = _as_input("conv2d_valid_backward upstream", gy, 3)
    h, w, cin = x.shape
    kh, kw, kcin, cout = kernels_.shape
    if kcin != cin:
        raise ShapeError(f"conv2d_valid_backward: input has {cin} channels "
                         f"but kernels expect {kcin}")
    expected = (h - kh + 1, w - kw + 1, cout)
    if gy.shape != expected:
        raise ShapeError(f"conv2d_valid_backward: upstream shape {gy.shape} "
                         f"!= forward output shape {expected}")
    return kernels.conv2d_backward(x, kernels_, gy)


def maxpool2(x):
    """2x2 stride-2 max pooling of x[H,W,C]; odd trailing row/column is
    dropped. Window ties break to the first element in row-major order."""
    x = _as_input("maxpool2 input", x, 3)
    h, w, _ = x.shape
    if h < 2 or w < 2:
        raise ShapeError(f"maxpool2: input {h}x{w} smaller than 2x2 window")
    out, argmax = kernels.maxpool2_forward(x)
    return PoolTrace(output=out, argmax=argmax, input_shape=x.shape)


def maxpool2_backward(trace, gy):
    """Route each upstream value to its recorded argmax input position."""
    gy = _as_input("maxpool2_backward upstream", gy, 3)
    if gy.shape != trace.output.shape:
        raise ShapeError(f"maxpool2_backward: upstream shape {gy.shape} != "
                         f"pool output shape {trace.output.shape}")
    return kernels.maxpool2_backward(trace.argmax, gy, trace.input_shape)


def relu(x):
    """Element-wise max(0, x)."""
    return np.maximum(x, 0)


def relu_backward(x, gy):
    """Pass upstream where x > 0; the derivative at exactly 0 is 0."""
    return np.where(x > 0, gy, gy.dtype.type(0))


def dense(x, weights, bias):
    """Affine map of a vector: out[j] = bias[j] + sum_i x[i] * W[i, j]."""
    x = _as_input("dense input", x, 1)
    weights = _as_input("dense weights", weights, 2)
    bias = _as_input("dense bias", bias, 1)
    n, m = weights.shape
    if x.shape[0] != n:
        raise ShapeError(f"dense: input length {x.shape[0]} != weight "
                         f"rows {n}")
    if bias.shape[0] != m:
        raise ShapeError(f"dense: bias length {bias.shape[0]} != weight "
                         f"columns {m}")
    return x @ weights + bias


def dense_backward(x, weights, gy):
    """Gradients of dense: (grad_input, grad_weights, grad_bias)."""
    x = _as_input("dense_backward input", x, 1)
    weights = _as_input("dense_backward weights", weights, 2)
    gy = _as_input("dense_backward upstream", gy, 1)
    n, m = weights.shape
    if x.shape[0] != n or gy.shape[0] != m:
        raise ShapeError(f"dense_backward: got input length {x.shape[0]} "
                         f"and upstream length {gy.shape[0]} for weights "
                         f"{n}x{m}")
    gx = weights @ gy
    gw = np.outer(x, gy)
    gb = gy.copy()
    return gx, gw, gb


def softmax(logits):
    """Probabilities exp(x_i) / sum_j exp(x_j), computed with the maximum
    subtracted first so large logits stay finite."""
    logits = _as_input("softmax logits", logits, 1)
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def _check_onehot(onehot):
    onehot = np.asarray(onehot)
    if onehot.ndim != 1:
        raise ShapeError(f"one-hot label: expected a vector, got shape "
                         f"{onehot.shape}")
    ones = np.count_nonzero(onehot == 1)
    if ones != 1 or np.count_nonzero(onehot) != 1:
        raise ShapeError("one-hot label: expected exactly one entry equal "
                         "to 1 and the rest 0")
    return int(np.argmax(onehot))


#: Probability floor inside the loss; caps a single-sample loss at ~27.63.
PROB_CLAMP = 1e-12


def cross_entropy(probs, onehot):
    """Categorical cross-entropy -log(p[true]) with the true-class
    probability clamped to at least PROB_CLAMP."""
    probs = _as_input("cross_entropy probs", probs, 1)
    true = _check_onehot(onehot)
    if true >= probs.shape[0]:
        raise ShapeError(f"cross_entropy: label index {true} out of range "
                         f"for {probs.shape[0]} classes")
    p = min(max(float(probs[true]), PROB_CLAMP), 1.0)
    return float(-np.log(p))


def softmax_xent_grad(probs, onehot):
    """Gradient of cross_entropy(softmax(logits)) wrt the logits:
    probs - onehot."""
    probs = _as_input("softmax_xent_grad probs", probs, 1)
    true = _check_onehot(onehot)
    if true >= probs.shape[0]:
        raise ShapeError(f"softmax_xent_grad: label index {true} out of "
                         f"range for {probs.shape[0]} classes")
    grad = probs.copy()
    grad[true] -= 1
    return grad


def flatten(x):
    """Row-major flattening of x[H,W,C] to a vector of length H*W*C."""
    x = _as_input("flatten input", x, 3)
    return x.reshape(-1)
