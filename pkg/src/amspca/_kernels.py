"""Fixed-order product kernels.

Every output entry is accumulated in ascending index order and parallel
work is split by output entry only, so a column of a batched product is
bitwise equal to the same column computed alone.  ``fastmath`` stays off:
reassociation would break that guarantee.
"""

import os

import numba
import numpy as np
from numba import njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]


@njit(parallel=True, cache=True)
def dense_mult_narrow(a, x, out):
    # a: (n, p) F-order, x: (p, r) C-order, out: (n, r) zeroed; axpy over columns of a
    n, p = a.shape
    r = x.shape[1]
    nblk = (n + 255) // 256
    for b in prange(nblk):
        lo = b * 256
        hi = min(n, lo + 256)
        for k in range(p):
            for j in range(r):
                xkj = x[k, j]
                for i in range(lo, hi):
                    out[i, j] += a[i, k] * xkj


@njit(parallel=True, cache=True)
def dense_mult_wide(a, x, out):
    # same sums as dense_mult_narrow, accumulated per 16-row block in a local tile
    n, p = a.shape
    r = x.shape[1]
    nblk = (n + 15) // 16
    for b in prange(nblk):
        lo = b * 16
        hi = min(n, lo + 16)
        acc = np.zeros((hi - lo, r))
        for k in range(p):
            for i in range(lo, hi):
                aik = a[i, k]
                for j in range(r):
                    acc[i - lo, j] += aik * x[k, j]
        for i in range(lo, hi):
            for j in range(r):
                out[i, j] = acc[i - lo, j]


WIDE_MIN = 4


def dense_mult(a, x, out):
    if x.shape[1] >= WIDE_MIN:
        dense_mult_wide(a, x, out)
    else:
        dense_mult_narrow(a, x, out)


@njit(parallel=True, cache=True)
def dense_mult_t(a, yt, out):
    # a: (n, p) F-order, yt: (n, r) C-order, out: (p, r)
    n, p = a.shape
    r = yt.shape[1]
    for k in prange(p):
        acc = np.zeros(r)
        for i in range(n):
            aik = a[i, k]
            for j in range(r):
                acc[j] += aik * yt[i, j]
        for j in range(r):
            out[k, j] = acc[j]


@njit(parallel=True, cache=True)
def csc_mult(data, indices, indptr, x, out):
    p = indptr.shape[0] - 1
    r = x.shape[1]
    for j in prange(r):
        for k in range(p):
            xkj = x[k, j]
            for t in range(indptr[k], indptr[k + 1]):
                out[indices[t], j] += data[t] * xkj


@njit(parallel=True, cache=True)
def csc_mult_t(data, indices, indptr, yt, out):
    p = indptr.shape[0] - 1
    r = yt.shape[1]
    for k in prange(p):
        acc = np.zeros(r)
        for t in range(indptr[k], indptr[k + 1]):
            v = data[t]
            i = indices[t]
            for j in range(r):
                acc[j] += v * yt[i, j]
        for j in range(r):
            out[k, j] = acc[j]


@njit(cache=True)
def seq_dot(a, b):
    acc = 0.0
    for i in range(a.shape[0]):
        acc += a[i] * b[i]
    return acc


@njit(cache=True)
def seq_norm2(a):
    acc = 0.0
    for i in range(a.shape[0]):
        acc += a[i] * a[i]
    return np.sqrt(acc)


@njit(cache=True)
def seq_norm1(a):
    acc = 0.0
    for i in range(a.shape[0]):
        acc += abs(a[i])
    return acc
