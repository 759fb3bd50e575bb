"""Network primitives with explicit forward and backward passes.

Everything is plain numpy.  Gate pre-activations are packed in blocks of
four in the order (input, forget, candidate, output); recurrent state starts
at zero.  Batched helpers use channels-last layout: sequences are
``(batch, time, features)`` and 1-d frames are ``(batch, length, channels)``.
"""

from __future__ import annotations

import numpy as np


class KernelTooWide(ValueError):
    """Convolution kernel is wider than its input."""


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _split_gates(z: np.ndarray, n: int):
    i = sigmoid(z[..., :n])
    f = sigmoid(z[..., n : 2 * n])
    g = np.tanh(z[..., 2 * n : 3 * n])
    o = sigmoid(z[..., 3 * n :])
    return i, f, g, o


# ---------------------------------------------------------------------------
# LSTM
# ---------------------------------------------------------------------------

def lstm_cell_forward(x_t, h_prev, c_prev, wx, wh, b):
    """One LSTM step: gates i, f, o are sigmoids, candidate g is tanh.

    c = f * c_prev + i * g and h = o * tanh(c).  Works on single vectors or
    on batches (leading axis); ``wx`` is (input, 4*units), ``wh`` is
    (units, 4*units), ``b`` is (4*units,).
    """
    x_t = np.asarray(x_t, dtype=float)
    h_prev = np.asarray(h_prev, dtype=float)
    c_prev = np.asarray(c_prev, dtype=float)
    n = h_prev.shape[-1]
    if wx.shape[1] != 4 * n or wh.shape != (n, 4 * n) or b.shape != (4 * n,):
        raise ValueError("gate weight shapes do not match the state size")
    z = x_t @ wx + h_prev @ wh + b
    i, f, g, o = _split_gates(z, n)
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, c


def lstm_forward(x: np.ndarray, wx, wh, b):
    """Run an LSTM over ``x`` (batch, time, features): hidden sequence plus cache."""
    batch, steps, _ = x.shape
    n = wh.shape[0]
    h = np.zeros((batch, n))
    c = np.zeros((batch, n))
    hs = np.empty((batch, steps, n))
    cache = []
    for t in range(steps):
        z = x[:, t] @ wx + h @ wh + b
        i, f, g, o = _split_gates(z, n)
        c_new = f * c + i * g
        tanh_c = np.tanh(c_new)
        cache.append((x[:, t], h, c, i, f, g, o, tanh_c))
        h = o * tanh_c
        c = c_new
        hs[:, t] = h
    return hs, cache


def lstm_backward(d_hs: np.ndarray, cache, wx, wh):
    """Backprop through time given gradients for every hidden output.

    Returns (d_input, d_wx, d_wh, d_b).
    """
    batch, steps, n = d_hs.shape
    dx = np.empty((batch, steps, wx.shape[0]))
    dwx = np.zeros_like(wx)
    dwh = np.zeros_like(wh)
    db = np.zeros(4 * n)
    dh_next = np.zeros((batch, n))
    dc_next = np.zeros((batch, n))
    for t in reversed(range(steps)):
        x_t, h_prev, c_prev, i, f, g, o, tanh_c = cache[t]
        dh = d_hs[:, t] + dh_next
        dc = dh * o * (1.0 - tanh_c**2) + dc_next
        do = dh * tanh_c
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dz = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g**2),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        dwx += x_t.T @ dz
        dwh += h_prev.T @ dz
        db += dz.sum(axis=0)
        dx[:, t] = dz @ wx.T
        dh_next = dz @ wh.T
        dc_next = dc * f
    return dx, dwx, dwh, db


# ---------------------------------------------------------------------------
# 1-d convolution and pooling
# ---------------------------------------------------------------------------

def conv1d_forward(x, kernels, biases) -> np.ndarray:
    """Valid 1-d convolution of a single sequence with ReLU activation.

    ``x`` is (length,), ``kernels`` is (filters, width), ``biases`` is
    (filters,); output is (filters, length - width + 1).
    """
    x = np.asarray(x, dtype=float)
    kernels = np.asarray(kernels, dtype=float)
    biases = np.asarray(biases, dtype=float)
    n_f, width = kernels.shape
    if width > x.size:
        raise KernelTooWide(f"kernel width {width} exceeds input length {x.size}")
    out = np.empty((n_f, x.size - width + 1))
    for j in range(out.shape[1]):
        out[:, j] = kernels @ x[j : j + width] + biases
    return np.maximum(out, 0.0)


def conv1d_valid(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Linear valid convolution: (B, L, Cin) with (K, Cin, Cout) -> (B, L-K+1, Cout)."""
    k = w.shape[0]
    if k > x.shape[1]:
        raise KernelTooWide(f"kernel width {k} exceeds input length {x.shape[1]}")
    length = x.shape[1] - k + 1
    out = np.zeros((x.shape[0], length, w.shape[2]))
    for offset in range(k):
        out += x[:, offset : offset + length, :] @ w[offset]
    return out + b


def conv1d_valid_backward(d_out: np.ndarray, x: np.ndarray, w: np.ndarray):
    """Gradients of a linear valid convolution: (d_input, d_kernels, d_biases)."""
    k = w.shape[0]
    length = d_out.shape[1]
    dx = np.zeros_like(x)
    dw = np.empty_like(w)
    for offset in range(k):
        dx[:, offset : offset + length, :] += d_out @ w[offset].T
        dw[offset] = np.einsum("blc,blf->cf", x[:, offset : offset + length, :], d_out)
    return dx, dw, d_out.sum(axis=(0, 1))


def _same_pad_widths(k: int) -> tuple[int, int]:
    left = (k - 1) // 2
    return left, k - 1 - left


def conv1d_same(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Same-length convolution via zero padding; output keeps x's length."""
    left, right = _same_pad_widths(w.shape[0])
    padded = np.pad(x, ((0, 0), (left, right), (0, 0)))
    return conv1d_valid(padded, w, b)


def conv1d_same_backward(d_out: np.ndarray, x: np.ndarray, w: np.ndarray):
    left, right = _same_pad_widths(w.shape[0])
    padded = np.pad(x, ((0, 0), (left, right), (0, 0)))
    dpadded, dw, db = conv1d_valid_backward(d_out, padded, w)
    dx = dpadded[:, left : padded.shape[1] - right, :]
    return dx, dw, db


def maxpool1d(x, pool_size: int) -> np.ndarray:
    """Non-overlapping windowed max over a sequence; a trailing partial window
    is kept as its own max."""
    x = np.asarray(x, dtype=float)
    if pool_size < 1:
        raise ValueError("pool_size must be at least 1")
    return np.array([x[s : s + pool_size].max() for s in range(0, x.size, pool_size)])


def maxpool_forward(x: np.ndarray, pool_size: int):
    """Batched channelwise max pooling of (B, L, C); returns output and argmax cache."""
    batch, length, channels = x.shape
    starts = range(0, length, pool_size)
    out = np.empty((batch, len(starts), channels))
    argmax = np.empty((batch, len(starts), channels), dtype=int)
    for window, start in enumerate(starts):
        segment = x[:, start : start + pool_size, :]
        local = segment.argmax(axis=1)
        out[:, window, :] = np.take_along_axis(segment, local[:, None, :], axis=1)[:, 0, :]
        argmax[:, window, :] = local + start
    return out, argmax


def maxpool_backward(d_out: np.ndarray, argmax: np.ndarray, length: int) -> np.ndarray:
    batch, _, channels = d_out.shape
    dx = np.zeros((batch, length, channels))
    b_idx = np.arange(batch)[:, None, None]
    c_idx = np.arange(channels)[None, None, :]
    np.add.at(dx, (b_idx, argmax, c_idx), d_out)
    return dx


# ---------------------------------------------------------------------------
# LSTM with convolutional gates
# ---------------------------------------------------------------------------

def convlstm_cell_forward(x_t, h_prev, c_prev, wx, wh, b):
    """One step of an LSTM whose gate pre-activations are same-padding 1-d
    convolutions over the frame instead of dense products.

    ``x_t`` is a frame (length, in_channels) or (length,); ``h_prev`` and
    ``c_prev`` are (length, filters) state maps.  ``wx`` is
    (width, in_channels, 4*filters) and ``wh`` is (width, filters,
    4*filters).  Same padding keeps the state shape stable across steps.
    """
    x_t = np.asarray(x_t, dtype=float)
    if x_t.ndim == 1:
        x_t = x_t[:, None]
    h_prev = np.asarray(h_prev, dtype=float)
    c_prev = np.asarray(c_prev, dtype=float)
    n_f = h_prev.shape[-1]
    if wx.shape[2] != 4 * n_f or wh.shape[1:] != (n_f, 4 * n_f) or b.shape != (4 * n_f,):
        raise ValueError("gate kernel shapes do not match the state channels")
    z = conv1d_same(x_t[None], wx, np.zeros(4 * n_f))[0]
    z += conv1d_same(h_prev[None], wh, np.zeros(4 * n_f))[0]
    z += b
    i, f, g, o = _split_gates(z, n_f)
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    return h, c


def convlstm_forward(x: np.ndarray, wx, wh, b):
    """Run convolutional-gate LSTM over frames (B, T, L, Cin): hidden maps plus cache."""
    batch, steps, length, _ = x.shape
    n_f = wh.shape[1]
    h = np.zeros((batch, length, n_f))
    c = np.zeros((batch, length, n_f))
    hs = np.empty((batch, steps, length, n_f))
    zero_bias = np.zeros(4 * n_f)
    cache = []
    for t in range(steps):
        z = conv1d_same(x[:, t], wx, zero_bias) + conv1d_same(h, wh, zero_bias) + b
        i, f, g, o = _split_gates(z, n_f)
        c_new = f * c + i * g
        tanh_c = np.tanh(c_new)
        cache.append((x[:, t], h, c, i, f, g, o, tanh_c))
        h = o * tanh_c
        c = c_new
        hs[:, t] = h
    return hs, cache


def convlstm_backward(d_hs: np.ndarray, cache, wx, wh):
    """Backprop through time and through the gate convolutions.

    Returns (d_input, d_wx, d_wh, d_b).
    """
    batch, steps, length, n_f = d_hs.shape
    dx = np.empty((batch, steps, length, wx.shape[1]))
    dwx = np.zeros_like(wx)
    dwh = np.zeros_like(wh)
    db = np.zeros(4 * n_f)
    dh_next = np.zeros((batch, length, n_f))
    dc_next = np.zeros((batch, length, n_f))
    for t in reversed(range(steps)):
        x_t, h_prev, c_prev, i, f, g, o, tanh_c = cache[t]
        dh = d_hs[:, t] + dh_next
        dc = dh * o * (1.0 - tanh_c**2) + dc_next
        do = dh * tanh_c
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dz = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g**2),
                do * o * (1.0 - o),
            ],
            axis=2,
        )
        dxt, dwx_t, db_t = conv1d_same_backward(dz, x_t, wx)
        dhp, dwh_t, _ = conv1d_same_backward(dz, h_prev, wh)
        dx[:, t] = dxt
        dwx += dwx_t
        dwh += dwh_t
        db += db_t
        dh_next = dhp
        dc_next = dc * f
    return dx, dwx, dwh, db
