# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled indicator kernels.

Mirror of _kernels_py (same recurrences, same evaluation order); keep the
two in sync. The sequential smoothing loops here dominate indicator
runtime, hence the extension.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

BACKEND = "cython"


def ema(x, double alpha):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = \
        np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    if n == 0:
        return out
    cdef double acc = xs[0]
    cdef Py_ssize_t i
    out[0] = acc
    for i in range(1, n):
        acc = acc + alpha * (xs[i] - acc)
        out[i] = acc
    return out


def rsi_kernel(close, int period):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c = \
        np.ascontiguousarray(close, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t warm = period if period < n else n
    cdef Py_ssize_t i
    cdef double avg_gain = 0.0, avg_loss = 0.0, d, gain, loss
    for i in range(warm):
        out[i] = 50.0
    if n <= period:
        return out
    for i in range(1, period + 1):
        d = c[i] - c[i - 1]
        if d > 0.0:
            avg_gain += d
        else:
            avg_loss -= d
    avg_gain /= period
    avg_loss /= period
    for i in range(period, n):
        if i > period:
            d = c[i] - c[i - 1]
            gain = d if d > 0.0 else 0.0
            loss = -d if d < 0.0 else 0.0
            avg_gain = (avg_gain * (period - 1) + gain) / period
            avg_loss = (avg_loss * (period - 1) + loss) / period
        if avg_loss == 0.0 and avg_gain == 0.0:
            out[i] = 50.0
        elif avg_loss == 0.0:
            out[i] = 100.0
        else:
            out[i] = 100.0 - 100.0 / (1.0 + avg_gain / avg_loss)
    return out


def cci_kernel(tp, int period):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = \
        np.ascontiguousarray(tp, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double sma, mad
    for i in range(period - 1, n):
        sma = 0.0
        for j in range(i - period + 1, i + 1):
            sma += x[j]
        sma /= period
        mad = 0.0
        for j in range(i - period + 1, i + 1):
            mad += fabs(x[j] - sma)
        mad /= period
        if mad > 0.0:
            out[i] = (x[i] - sma) / (0.015 * mad)
    return out


def adx_kernel(high, low, close, int period):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h = \
        np.ascontiguousarray(high, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] l = \
        np.ascontiguousarray(low, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c = \
        np.ascontiguousarray(close, dtype=np.float64)
    cdef Py_ssize_t n = h.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n, dtype=np.float64)
    if n <= period:
        return out

    cdef cnp.ndarray[cnp.float64_t, ndim=1] plus_dm = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] minus_dm = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tr = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dx = np.zeros(n, dtype=np.float64)
    cdef Py_ssize_t i, first
    cdef double up, down, t1, t2, t3, atr = 0.0, sp = 0.0, sm = 0.0
    cdef double plus_di, minus_di, s, acc

    for i in range(1, n):
        up = h[i] - h[i - 1]
        down = l[i - 1] - l[i]
        if up > down and up > 0.0:
            plus_dm[i] = up
        if down > up and down > 0.0:
            minus_dm[i] = down
        t1 = h[i] - l[i]
        t2 = fabs(h[i] - c[i - 1])
        t3 = fabs(l[i] - c[i - 1])
        tr[i] = t1
        if t2 > tr[i]:
            tr[i] = t2
        if t3 > tr[i]:
            tr[i] = t3

    for i in range(1, period + 1):
        atr += tr[i]
        sp += plus_dm[i]
        sm += minus_dm[i]
    atr /= period
    sp /= period
    sm /= period

    for i in range(period, n):
        if i > period:
            atr = (atr * (period - 1) + tr[i]) / period
            sp = (sp * (period - 1) + plus_dm[i]) / period
            sm = (sm * (period - 1) + minus_dm[i]) / period
        if atr > 0.0:
            plus_di = 100.0 * sp / atr
            minus_di = 100.0 * sm / atr
        else:
            plus_di = 0.0
            minus_di = 0.0
        s = plus_di + minus_di
        if s > 0.0:
            dx[i] = 100.0 * fabs(plus_di - minus_di) / s

    first = 2 * period - 1
    if n <= first:
        return out
    acc = 0.0
    for i in range(period, first + 1):
        acc += dx[i]
    acc /= period
    out[first] = acc
    for i in range(first + 1, n):
        acc = (acc * (period - 1) + dx[i]) / period
        out[i] = acc
    return out
