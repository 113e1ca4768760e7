# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the CNN: 2-d convolution, max-pooling and the
bulk PRNG fill. Semantics are identical to btd._kernels.pykernels; the
dispatch in btd._kernels picks whichever is available."""

import numpy as np

from libc.stdint cimport int64_t, uint64_t


def conv2d_forward(double[:, :, ::1] x, double[:, :, :, ::1] w,
                   double[::1] b, int stride, int pad):
    cdef Py_ssize_t C = x.shape[0], H = x.shape[1], W = x.shape[2]
    cdef Py_ssize_t OC = w.shape[0], KH = w.shape[2], KW = w.shape[3]
    cdef Py_ssize_t OH = (H + 2 * pad - KH) // stride + 1
    cdef Py_ssize_t OW = (W + 2 * pad - KW) // stride + 1
    out_arr = np.empty((OC, OH, OW), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t o, c, oy, ox, i, j, iy, ix
    cdef double acc
    with nogil:
        for o in range(OC):
            for oy in range(OH):
                for ox in range(OW):
                    acc = b[o]
                    for c in range(C):
                        for i in range(KH):
                            iy = oy * stride + i - pad
                            if iy < 0 or iy >= H:
                                continue
                            for j in range(KW):
                                ix = ox * stride + j - pad
                                if ix < 0 or ix >= W:
                                    continue
                                acc += x[c, iy, ix] * w[o, c, i, j]
                    out[o, oy, ox] = acc
    return out_arr


def conv2d_backward(double[:, :, ::1] gout, double[:, :, ::1] x,
                    double[:, :, :, ::1] w, int stride, int pad):
    cdef Py_ssize_t C = x.shape[0], H = x.shape[1], W = x.shape[2]
    cdef Py_ssize_t OC = w.shape[0], KH = w.shape[2], KW = w.shape[3]
    cdef Py_ssize_t OH = gout.shape[1], OW = gout.shape[2]
    gx_arr = np.zeros((C, H, W), dtype=np.float64)
    gw_arr = np.zeros((OC, C, KH, KW), dtype=np.float64)
    gb_arr = np.zeros(OC, dtype=np.float64)
    cdef double[:, :, ::1] gx = gx_arr
    cdef double[:, :, :, ::1] gw = gw_arr
    cdef double[::1] gb = gb_arr
    cdef Py_ssize_t o, c, oy, ox, i, j, iy, ix
    cdef double g
    with nogil:
        for o in range(OC):
            for oy in range(OH):
                for ox in range(OW):
                    g = gout[o, oy, ox]
                    gb[o] += g
                    for c in range(C):
                        for i in range(KH):
                            iy = oy * stride + i - pad
                            if iy < 0 or iy >= H:
                                continue
                            for j in range(KW):
                                ix = ox * stride + j - pad
                                if ix < 0 or ix >= W:
                                    continue
                                gw[o, c, i, j] += g * x[c, iy, ix]
                                gx[c, iy, ix] += g * w[o, c, i, j]
    return gx_arr, gw_arr, gb_arr


def maxpool_forward(double[:, :, ::1] x, int size, int stride):
    cdef Py_ssize_t C = x.shape[0], H = x.shape[1], W = x.shape[2]
    cdef Py_ssize_t OH = (H - size) // stride + 1
    cdef Py_ssize_t OW = (W - size) // stride + 1
    out_arr = np.empty((C, OH, OW), dtype=np.float64)
    arg_arr = np.empty((C, OH, OW), dtype=np.int64)
    cdef double[:, :, ::1] out = out_arr
    cdef int64_t[:, :, ::1] arg = arg_arr
    cdef Py_ssize_t c, oy, ox, i, j, iy, ix
    cdef double best, v
    cdef int64_t besti
    with nogil:
        for c in range(C):
            for oy in range(OH):
                for ox in range(OW):
                    best = x[c, oy * stride, ox * stride]
                    besti = (oy * stride) * W + ox * stride
                    for i in range(size):
                        iy = oy * stride + i
                        for j in range(size):
                            ix = ox * stride + j
                            v = x[c, iy, ix]
                            if v > best:
                                best = v
                                besti = iy * W + ix
                    out[c, oy, ox] = best
                    arg[c, oy, ox] = besti
    return out_arr, arg_arr


def maxpool_backward(double[:, :, ::1] gout, int64_t[:, :, ::1] arg,
                     Py_ssize_t h, Py_ssize_t w):
    cdef Py_ssize_t C = gout.shape[0], OH = gout.shape[1], OW = gout.shape[2]
    gx_arr = np.zeros((C, h, w), dtype=np.float64)
    cdef double[:, :, ::1] gx = gx_arr
    cdef Py_ssize_t c, oy, ox
    cdef int64_t flat
    with nogil:
        for c in range(C):
            for oy in range(OH):
                for ox in range(OW):
                    flat = arg[c, oy, ox]
                    gx[c, flat // w, flat % w] += gout[c, oy, ox]
    return gx_arr


def fill_u64(state, uint64_t[::1] out):
    """Advance the xorshift64* generator, writing one output per step.
    Returns the final state. Bit-identical to the pykernels version."""
    cdef uint64_t x = <uint64_t> state
    cdef Py_ssize_t i, n = out.shape[0]
    with nogil:
        for i in range(n):
            x ^= x >> 12
            x ^= x << 25
            x ^= x >> 27
            out[i] = x * <uint64_t> 0x2545F4914F6CDD1D
    return x
