# cython: boundscheck=False, wraparound=False, cdivision=True
"""Native kernels for the convolution/pooling hot paths.

Convolutions are lowered to patch matrices: the patch gather/scatter and
the pooling loops run as compiled C, while the single large matrix
product goes through numpy's BLAS (reimplementing GEMM would be a loss
on every axis). Results are bit-identical to the numpy fallback, which
assembles the same matrices with strided copies instead.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

NAME = "native"

ctypedef fused real:
    float
    double


cdef void _im2col(real[:, :, ::1] x, real[:, ::1] col,
                  Py_ssize_t kh, Py_ssize_t kw) noexcept nogil:
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1], c = x.shape[2]
    cdef Py_ssize_t oh = h - kh + 1, ow = w - kw + 1
    cdef Py_ssize_t i, j, dy, dx, ci, row, base
    for i in range(oh):
        for j in range(ow):
            row = i * ow + j
            base = 0
            for dy in range(kh):
                for dx in range(kw):
                    for ci in range(c):
                        col[row, base + ci] = x[i + dy, j + dx, ci]
                    base += c


cdef void _col2im_add(real[:, ::1] gcol, real[:, :, ::1] gx,
                      Py_ssize_t kh, Py_ssize_t kw) noexcept nogil:
    # Descending (i, j) streams gcol while giving every gx cell its
    # contributions in ascending (dy, dx) order, the same accumulation
    # order as the fallback's slice adds: backends stay bit-identical.
    cdef Py_ssize_t h = gx.shape[0], w = gx.shape[1], c = gx.shape[2]
    cdef Py_ssize_t oh = h - kh + 1, ow = w - kw + 1
    cdef Py_ssize_t i, j, dy, dx, ci, row, base
    for i in range(oh - 1, -1, -1):
        for j in range(ow - 1, -1, -1):
            row = i * ow + j
            base = 0
            for dy in range(kh):
                for dx in range(kw):
                    for ci in range(c):
                        gx[i + dy, j + dx, ci] += gcol[row, base + ci]
                    base += c


def conv2d_forward(x, kernels, bias):
    h, w, cin = x.shape
    kh, kw, _, cout = kernels.shape
    oh, ow = h - kh + 1, w - kw + 1
    col = np.empty((oh * ow, kh * kw * cin), dtype=x.dtype)
    _dispatch_im2col(x, col, kh, kw)
    y = col @ kernels.reshape(kh * kw * cin, cout)
    y += bias
    return y.reshape(oh, ow, cout)


def conv2d_backward(x, kernels, gy):
    h, w, cin = x.shape
    kh, kw, _, cout = kernels.shape
    oh, ow = h - kh + 1, w - kw + 1
    gy2 = gy.reshape(oh * ow, cout)

    col = np.empty((oh * ow, kh * kw * cin), dtype=x.dtype)
    _dispatch_im2col(x, col, kh, kw)
    gb = gy.sum(axis=(0, 1))
    gk = (col.T @ gy2).reshape(kernels.shape)

    gcol = np.ascontiguousarray(gy2 @ kernels.reshape(-1, cout).T)
    gx = np.zeros_like(x)
    _dispatch_col2im(gcol, gx, kh, kw)
    return gx, gk, gb


def _dispatch_im2col(x, col, Py_ssize_t kh, Py_ssize_t kw):
    if x.dtype == np.float32:
        _im2col[float](x, col, kh, kw)
    else:
        _im2col[double](x, col, kh, kw)


def _dispatch_col2im(gcol, gx, Py_ssize_t kh, Py_ssize_t kw):
    if gx.dtype == np.float32:
        _col2im_add[float](gcol, gx, kh, kw)
    else:
        _col2im_add[double](gcol, gx, kh, kw)


def maxpool2_forward(real[:, :, ::1] x):
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1], c = x.shape[2]
    cdef Py_ssize_t th = h // 2, tw = w // 2

    out_arr = np.empty((th, tw, c), dtype=np.asarray(x).dtype)
    idx_arr = np.empty((th, tw, c), dtype=np.int64)
    cdef real[:, :, ::1] y = out_arr
    cdef cnp.int64_t[:, :, ::1] argmax = idx_arr
    cdef Py_ssize_t i, j, k, dy, dx
    cdef real best, v
    cdef Py_ssize_t bi

    with nogil:
        for i in range(th):
            for j in range(tw):
                for k in range(c):
                    best = x[2 * i, 2 * j, k]
                    bi = (2 * i * w + 2 * j) * c + k
                    for dy in range(2):
                        for dx in range(2):
                            v = x[2 * i + dy, 2 * j + dx, k]
                            if v > best:
                                best = v
                                bi = ((2 * i + dy) * w
                                      + (2 * j + dx)) * c + k
                    y[i, j, k] = best
                    argmax[i, j, k] = bi
    return out_arr, idx_arr


def maxpool2_backward(cnp.int64_t[:, :, ::1] argmax, real[:, :, ::1] gy,
                      in_shape):
    gx_arr = np.zeros(in_shape, dtype=np.asarray(gy).dtype)
    cdef real[::1] gx = gx_arr.ravel()
    cdef Py_ssize_t th = gy.shape[0], tw = gy.shape[1], c = gy.shape[2]
    cdef Py_ssize_t i, j, k

    with nogil:
        for i in range(th):
            for j in range(tw):
                for k in range(c):
                    gx[argmax[i, j, k]] = gy[i, j, k]
    return gx_arr
