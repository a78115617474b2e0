"""Compiled exact-integer kernels for dense cube boxes.

Arrays are C-ordered with axis j holding coordinate n_j - 1, so flat order is
lexicographic order and every proper divisor of n precedes n.  All arithmetic
is int64; callers get ``None`` back whenever the magnitude guard cannot rule
out overflow, and then take the rational path instead.
"""

import os

import numpy as np
from numba import njit, prange, set_num_threads, config

_INT_LIMIT = 2**62

# The default probe warns about old TBB builds; workqueue is always present.
if config.THREADING_LAYER == "default":
    config.THREADING_LAYER = "workqueue"

_threads = os.environ.get("MDIR_THREADS")
if _threads:
    try:
        set_num_threads(max(1, min(int(_threads), config.NUMBA_NUM_THREADS)))
    except ValueError:
        pass


def _max_divisor_count(T):
    counts = np.zeros(T + 1, dtype=np.int64)
    for d in range(1, T + 1):
        counts[d::d] += 1
    return int(counts.max())


def _divisor_table(T):
    counts = np.zeros(T + 1, dtype=np.int64)
    for d in range(1, T + 1):
        counts[d::d] += 1
    start = np.zeros(T + 2, dtype=np.int64)
    start[1:] = np.cumsum(counts)
    fill = start[:-1].copy()
    table = np.empty(start[-1], dtype=np.int64)
    for d in range(1, T + 1):
        for m in range(d, T + 1, d):
            table[fill[m]] = d
            fill[m] += 1
    return start, table


@njit(cache=True)
def _invert_scatter(f, T, k, f1, gmax, g):
    size = T**k
    stride = np.empty(k, np.int64)
    s = 1
    for j in range(k - 1, -1, -1):
        stride[j] = s
        s *= T
    n = np.ones(k, np.int64)
    a = np.ones(k, np.int64)
    lim = np.empty(k, np.int64)
    last = k - 1
    for idx in range(size):
        target = 1 if idx == 0 else 0
        val = (target - g[idx]) * f1
        g[idx] = val
        if val != 0:
            if val > gmax or -val > gmax:
                return False
            for j in range(k):
                lim[j] = T // n[j]
                a[j] = 1
            while True:
                base_f = 0
                base_g = 0
                prefix_one = True
                for j in range(last):
                    base_f += (a[j] - 1) * stride[j]
                    base_g += (a[j] * n[j] - 1) * stride[j]
                    if a[j] != 1:
                        prefix_one = False
                t0 = 2 if prefix_one else 1
                nl = n[last]
                for t in range(t0, lim[last] + 1):
                    fv = f[base_f + t - 1]
                    if fv != 0:
                        g[base_g + t * nl - 1] += fv * val
                j = last - 1
                while j >= 0:
                    a[j] += 1
                    if a[j] <= lim[j]:
                        break
                    a[j] = 1
                    j -= 1
                if j < 0:
                    break
        # advance the lexicographic odometer on n
        j = last
        while j >= 0:
            n[j] += 1
            if n[j] <= T:
                break
            n[j] = 1
            j -= 1
    return True


@njit(cache=True)
def _unravel(idx, T, k, n, stride):
    rem = idx
    s = 1
    for j in range(k - 1, -1, -1):
        stride[j] = s
        n[j] = rem % T + 1
        rem //= T
        s *= T


@njit(parallel=True, cache=True)
def _convolve_gather(f, g, T, k, dstart, dtable, out):
    size = T**k
    for idx in prange(size):
        n = np.empty(k, np.int64)
        stride = np.empty(k, np.int64)
        _unravel(idx, T, k, n, stride)
        pos = np.zeros(k, np.int64)
        acc = 0
        while True:
            ia = 0
            ib = 0
            for j in range(k):
                d = dtable[dstart[n[j]] + pos[j]]
                ia += (d - 1) * stride[j]
                ib += (n[j] // d - 1) * stride[j]
            fv = f[ia]
            if fv != 0:
                acc += fv * g[ib]
            j = k - 1
            while j >= 0:
                pos[j] += 1
                if dstart[n[j]] + pos[j] < dstart[n[j] + 1]:
                    break
                pos[j] = 0
                j -= 1
            if j < 0:
                break
        out[idx] = acc


def invert_dense(f, T, k):
    """Exact inverse of an integer array with f[0] = +-1, or None on overflow risk."""
    flat = np.ascontiguousarray(f).reshape(-1)
    f1 = int(flat[0])
    if f1 not in (1, -1):
        return None
    fmax = int(np.abs(flat.astype(np.int64)).max())
    terms = _max_divisor_count(T) ** k
    gmax = _INT_LIMIT // max(1, fmax * terms)
    if gmax < 1:
        return None
    g = np.zeros(T**k, dtype=np.int64)
    if not _invert_scatter(flat, T, k, f1, gmax, g):
        return None
    return g.reshape((T,) * k)


def convolve_dense(f, g, T, k):
    """Exact convolution of two integer arrays, or None on overflow risk."""
    ff = np.ascontiguousarray(f, dtype=np.int64).reshape(-1)
    gg = np.ascontiguousarray(g, dtype=np.int64).reshape(-1)
    fmax = int(np.abs(ff.astype(np.int64)).max()) if ff.size else 0
    gmax = int(np.abs(gg.astype(np.int64)).max()) if gg.size else 0
    terms = _max_divisor_count(T) ** k
    if fmax * gmax * terms >= _INT_LIMIT:
        return None
    dstart, dtable = _divisor_table(T)
    out = np.zeros(T**k, dtype=np.int64)
    _convolve_gather(ff, gg, T, k, dstart, dtable, out)
    return out.reshape((T,) * k)
