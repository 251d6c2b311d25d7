"""Compiled inner loops: Pfaffians and the even-subset moment enumeration."""

import numpy as np
from numba import config, njit, prange

# skip the TBB probe, which only warns on this platform
config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


@njit(cache=True)
def _pfaffian_inplace(a, n):
    # Parlett-Reid on the leading n x n block of ``a`` (overwritten)
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1
        big = abs(a[k + 1, k])
        for i in range(k + 2, n):
            v = abs(a[i, k])
            if v > big:
                big = v
                kp = i
        if big == 0.0:
            return 0.0
        if kp != k + 1:
            for j in range(k, n):
                tmp = a[k + 1, j]
                a[k + 1, j] = a[kp, j]
                a[kp, j] = tmp
            for i in range(k, n):
                tmp = a[i, k + 1]
                a[i, k + 1] = a[i, kp]
                a[i, kp] = tmp
            pf = -pf
        piv = a[k, k + 1]
        pf *= piv
        inv = 1.0 / piv
        for i in range(k + 2, n):
            ti = a[k, i] * inv
            ci = a[i, k + 1]
            for j in range(i + 1, n):
                v = a[i, j] + ti * a[j, k + 1] - ci * a[k, j] * inv
                a[i, j] = v
                a[j, i] = -v
    return pf


@njit(cache=True)
def pfaffian(a):
    n = a.shape[0]
    if n == 0:
        return 1.0
    work = a.copy()
    return _pfaffian_inplace(work, n)


@njit(cache=True)
def _parity(m):
    p = 0
    while m:
        p ^= 1
        m &= m - 1
    return p


@njit(parallel=True, cache=True)
def even_subset_moments(gamma, chunks):
    """Per-chunk sums of Pf(gamma_S)^2 and Pf(gamma_S)^4 over even subsets S."""
    n = gamma.shape[0]
    total = 1 << (n - 1)
    sq = np.zeros(chunks)
    quad = np.zeros(chunks)
    for c in prange(chunks):
        lo = (total * c) // chunks
        hi = (total * (c + 1)) // chunks
        work = np.empty((n, n))
        idx = np.empty(n, dtype=np.int64)
        s2 = 0.0
        s4 = 0.0
        for m in range(lo, hi):
            # low bit fixes even popcount; the other n-1 bits come from m
            mask = (m << 1) | _parity(m)
            size = 0
            for b in range(n):
                if (mask >> b) & 1:
                    idx[size] = b
                    size += 1
            for i in range(size):
                for j in range(size):
                    work[i, j] = gamma[idx[i], idx[j]]
            if size == 0:
                p = 1.0
            else:
                p = _pfaffian_inplace(work, size)
            p2 = p * p
            s2 += p2
            s4 += p2 * p2
        sq[c] = s2
        quad[c] = s4
    return sq, quad
