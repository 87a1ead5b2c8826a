"""Numpy fallback for the hot kernels.

Convolutions are lowered to patch matrices and dispatched to BLAS; pooling
uses window reshapes. Shapes are validated by the caller (specklecnn.ops),
so these functions assume well-formed HWC inputs.
"""

import numpy as np
from numpy.lib.stride_tricks import as_strided

NAME = "numpy"


def _patch_matrix(x, kh, kw):
    """Lower x[H,W,C] to a (OH*OW, kh*kw*C) matrix of valid patches."""
    h, w, c = x.shape
    oh, ow = h - kh + 1, w - kw + 1
    sh, sw, sc = x.strides
    windows = as_strided(x, shape=(oh, ow, kh, kw, c),
                         strides=(sh, sw, sh, sw, sc))
    return np.ascontiguousarray(windows).reshape(oh * ow, kh * kw * c)


def conv2d_forward(x, kernels, bias):
    h, w, cin = x.shape
    kh, kw, _, cout = kernels.shape
    oh, ow = h - kh + 1, w - kw + 1
    col = _patch_matrix(x, kh, kw)
    y = col @ kernels.reshape(kh * kw * cin, cout)
    y += bias
    return y.reshape(oh, ow, cout)


def conv2d_backward(x, kernels, gy):
    h, w, cin = x.shape
    kh, kw, _, cout = kernels.shape
    oh, ow = h - kh + 1, w - kw + 1
    gy2 = gy.reshape(oh * ow, cout)

    gb = gy.sum(axis=(0, 1))
    gk = (_patch_matrix(x, kh, kw).T @ gy2).reshape(kernels.shape)

    # scatter-add of gy * K back onto the input footprint
    gcol = (gy2 @ kernels.reshape(kh * kw * cin, cout).T)
    gcol = gcol.reshape(oh, ow, kh, kw, cin)
    gx = np.zeros_like(x)
    for dy in range(kh):
        for dx in range(kw):
            gx[dy:dy + oh, dx:dx + ow, :] += gcol[:, :, dy, dx, :]
    return gx, gk, gb


def maxpool2_forward(x):
    h, w, c = x.shape
    th, tw = h // 2, w // 2
    win = x[:2 * th, :2 * tw, :].reshape(th, 2, tw, 2, c)
    win = win.transpose(0, 2, 1, 3, 4).reshape(th, tw, 4, c)
    # np.argmax picks the first maximum: row-major tie-break inside the window
    sel = win.argmax(axis=2)
    out = win.max(axis=2)

    ys = 2 * np.arange(th)[:, None, None] + sel // 2
    xs = 2 * np.arange(tw)[None, :, None] + sel % 2
    cs = np.arange(c)[None, None, :]
    argmax = ((ys * w + xs) * c + cs).astype(np.int64)
    return np.ascontiguousarray(out), argmax


def maxpool2_backward(argmax, gy, in_shape):
    gx = np.zeros(in_shape, dtype=gy.dtype)
    # windows are disjoint, so each input cell receives at most one value
    gx.ravel()[argmax.ravel()] = gy.ravel()
    return gx
