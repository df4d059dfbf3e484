"""Compiled inner loops for Latin-square enumeration and signed evaluation sums."""

from __future__ import annotations

import contextlib
import os

import numba
import numpy as np
from numba import njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    # the bundled TBB is too old and only produces a warning
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int64)


@contextlib.contextmanager
def thread_limit(workers: int | None):
    """Temporarily cap the number of threads used by parallel kernels."""
    if workers is None:
        yield
        return
    previous = numba.get_num_threads()
    numba.set_num_threads(max(1, min(int(workers), numba.config.NUMBA_NUM_THREADS)))
    try:
        yield
    finally:
        numba.set_num_threads(previous)


@njit(cache=True)
def _popcount(x, table):
    return table[x & 255] + table[(x >> 8) & 255]


@njit(cache=True)
def _count_completions(n, prefix, depth, table):
    """Count completions of a Latin-square prefix by inversion parity.

    ``prefix`` holds the first ``depth`` rows (0-based symbols). Returns
    ``(even, odd)`` counts of the raw product of symbol-permutation signs;
    the caller applies the global sign convention.

    The column of symbol s in earlier rows is tracked as a bitmask, so the
    inversions that placing s at column c contributes to the permutation of
    s are the earlier rows holding s to the right of c.
    """
    full = (1 << n) - 1
    rowmask = np.zeros(n, dtype=np.int64)
    colmask = np.zeros(n, dtype=np.int64)
    symcols = np.zeros(n, dtype=np.int64)
    parity0 = 0
    for r in range(depth):
        for c in range(n):
            s = prefix[r, c]
            colmask[c] |= 1 << s
            rowmask[r] |= 1 << s
            parity0 ^= _popcount(symcols[s] >> (c + 1), table) & 1
            symcols[s] |= 1 << c

    start = depth * n
    end = (n - 1) * n
    even = 0
    odd = 0
    if start >= end:
        # only the forced last row remains
        par = parity0
        for c in range(n):
            miss = full & ~colmask[c]
            s = 0
            while not (miss >> s) & 1:
                s += 1
            par ^= _popcount(symcols[s] >> (c + 1), table) & 1
        if par:
            odd += 1
        else:
            even += 1
        return even, odd

    cells = np.zeros(n * n, dtype=np.int64)
    cand = np.zeros(n * n, dtype=np.int64)
    parity = np.zeros(n * n + 1, dtype=np.int64)
    p = start
    parity[p] = parity0
    cand[p] = full & ~rowmask[p // n] & ~colmask[p % n]
    while True:
        if cand[p] == 0:
            p -= 1
            if p < start:
                break
            r = p // n
            c = p % n
            s = cells[p]
            rowmask[r] ^= 1 << s
            colmask[c] ^= 1 << s
            symcols[s] ^= 1 << c
            continue
        low = cand[p] & -cand[p]
        cand[p] ^= low
        s = 0
        while (low >> s) != 1:
            s += 1
        r = p // n
        c = p % n
        cells[p] = s
        rowmask[r] |= low
        colmask[c] |= low
        par = parity[p] ^ (_popcount(symcols[s] >> (c + 1), table) & 1)
        symcols[s] |= 1 << c
        if p + 1 == end:
            for cc in range(n):
                miss = full & ~colmask[cc]
                t = 0
                while not (miss >> t) & 1:
                    t += 1
                par ^= _popcount(symcols[t] >> (cc + 1), table) & 1
            if par:
                odd += 1
            else:
                even += 1
            rowmask[r] ^= low
            colmask[c] ^= low
            symcols[s] ^= 1 << c
        else:
            p += 1
            parity[p] = par
            cand[p] = full & ~rowmask[p // n] & ~colmask[p % n]
    return even, odd


@njit(parallel=True, cache=True)
def census_prefixes(n, prefixes, depth, table):
    """Per-prefix (even, odd) raw-parity counts; one task per prefix."""
    t = prefixes.shape[0]
    out = np.zeros((t, 2), dtype=np.int64)
    for i in prange(t):
        e, o = _count_completions(n, prefixes[i], depth, table)
        out[i, 0] = e
        out[i, 1] = o
    return out


@njit(cache=True)
def _det_int(a, n):
    # Bareiss elimination in place; entries stay integral
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k, k] == 0:
            piv = -1
            for i in range(k + 1, n):
                if a[i, k] != 0:
                    piv = i
                    break
            if piv < 0:
                return 0
            for j in range(n):
                tmp = a[k, j]
                a[k, j] = a[piv, j]
                a[piv, j] = tmp
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i, j] = (a[i, j] * a[k, k] - a[i, k] * a[k, j]) // prev
        prev = a[k, k]
    return sign * a[n - 1, n - 1]


@njit(parallel=True, cache=True)
def signed_det_histogram(n, rows, cols, hbound, chunks):
    """Signed histogram of det(A_eps) over all sign vectors eps.

    ``A_eps`` has ``eps_i`` at position ``(rows[i], cols[i])`` and zero
    elsewhere. Entry ``d + hbound`` of the result accumulates the product of
    the ``eps_i`` over every eps with det(A_eps) = d. Each chunk spans a
    fixed contiguous range of sign vectors and owns one histogram row.
    """
    m = rows.shape[0]
    total = np.int64(1) << m
    hist = np.zeros((chunks, 2 * hbound + 1), dtype=np.int64)
    step = (total + chunks - 1) // chunks
    for ch in prange(chunks):
        a = np.zeros((n, n), dtype=np.int64)
        lo = ch * step
        hi = min(total, lo + step)
        for mask in range(lo, hi):
            a[:, :] = 0
            neg = 0
            for i in range(m):
                if (mask >> i) & 1:
                    a[rows[i], cols[i]] = -1
                    neg += 1
                else:
                    a[rows[i], cols[i]] = 1
            d = _det_int(a, n)
            if neg & 1:
                hist[ch, d + hbound] -= 1
            else:
                hist[ch, d + hbound] += 1
    return hist.sum(axis=0)
