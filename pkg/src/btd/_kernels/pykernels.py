"""Numpy fallback for the hot kernels.

Convolution runs as an im2col matrix product, pooling as a stacked-window
argmax. Results agree with the compiled Cython kernels to floating-point
rounding (the PRNG fill agrees bit for bit); see tests/test_backends.py
and benchmarks/bench_kernels.py.
"""

import numpy as np

MASK64 = (1 << 64) - 1
_XORSHIFT_MULT = 0x2545F4914F6CDD1D


def _im2col(xp, kh, kw, stride, oh, ow):
    c = xp.shape[0]
    cols = np.empty((c, kh, kw, oh, ow), dtype=np.float64)
    for i in range(kh):
        for j in range(kw):
            cols[:, i, j] = xp[:, i:i + stride * oh:stride, j:j + stride * ow:stride]
    return cols.reshape(c * kh * kw, oh * ow)


def conv2d_forward(x, w, b, stride, pad):
    c, h, wd = x.shape
    oc, _, kh, kw = w.shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (wd + 2 * pad - kw) // stride + 1
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad))) if pad else x
    cols = _im2col(xp, kh, kw, stride, oh, ow)
    out = w.reshape(oc, -1) @ cols + b[:, None]
    return out.reshape(oc, oh, ow)


def conv2d_backward(gout, x, w, stride, pad):
    c, h, wd = x.shape
    oc, _, kh, kw = w.shape
    oh, ow = gout.shape[1], gout.shape[2]
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad))) if pad else x
    cols = _im2col(xp, kh, kw, stride, oh, ow)
    gmat = gout.reshape(oc, -1)
    gb = gmat.sum(axis=1)
    gw = (gmat @ cols.T).reshape(w.shape)
    gcols = (w.reshape(oc, -1).T @ gmat).reshape(c, kh, kw, oh, ow)
    gxp = np.zeros_like(xp)
    for i in range(kh):
        for j in range(kw):
            gxp[:, i:i + stride * oh:stride, j:j + stride * ow:stride] += gcols[:, i, j]
    gx = gxp[:, pad:pad + h, pad:pad + wd] if pad else gxp
    return gx, gw, gb


def maxpool_forward(x, size, stride):
    c, h, w = x.shape
    oh = (h - size) // stride + 1
    ow = (w - size) // stride + 1
    # window positions stacked in row-major order so argmax picks the
    # first element of a tied window
    stack = np.empty((c, oh, ow, size * size), dtype=np.float64)
    for i in range(size):
        for j in range(size):
            stack[..., i * size + j] = x[:, i:i + stride * oh:stride, j:j + stride * ow:stride]
    widx = stack.argmax(axis=-1)
    out = np.take_along_axis(stack, widx[..., None], axis=-1)[..., 0]
    oy = np.arange(oh)[None, :, None] * stride
    ox = np.arange(ow)[None, None, :] * stride
    arg = (oy + widx // size) * w + (ox + widx % size)
    return out, arg.astype(np.int64)


def maxpool_backward(gout, arg, h, w):
    c = gout.shape[0]
    gx = np.zeros((c, h * w), dtype=np.float64)
    ch = np.broadcast_to(np.arange(c)[:, None, None], gout.shape)
    np.add.at(gx, (ch.reshape(-1), arg.reshape(-1)), gout.reshape(-1))
    return gx.reshape(c, h, w)


def fill_u64(state, out):
    """Advance the xorshift64* generator, writing one output per step.
    Returns the final state."""
    x = state & MASK64
    for i in range(out.shape[0]):
        x ^= x >> 12
        x = (x ^ (x << 25)) & MASK64
        x ^= x >> 27
        out[i] = (x * _XORSHIFT_MULT) & MASK64
    return x
