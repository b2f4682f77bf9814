# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_pykernels`` for the reference versions."""

import numpy as np

from libc.stdint cimport int64_t

BACKEND = "cython"


cdef inline int64_t _mod(int64_t a, int64_t p) nogil:
    a %= p
    return a + p if a < 0 else a


cdef int64_t _powmod(int64_t b, int64_t e, int64_t p) nogil:
    cdef int64_t r = 1
    b = _mod(b, p)
    while e > 0:
        if e & 1:
            r = r * b % p
        b = b * b % p
        e >>= 1
    return r


def rank_mod_p(a, int64_t p):
    cdef int64_t[:, ::1] m = np.array(a, dtype=np.int64) % p
    cdef Py_ssize_t nrows = m.shape[0], ncols = m.shape[1]
    cdef Py_ssize_t r = 0, c, i, j, piv
    cdef int64_t inv, f, tmp
    with nogil:
        for c in range(ncols):
            if r == nrows:
                break
            piv = -1
            for i in range(r, nrows):
                if m[i, c] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != r:
                for j in range(c, ncols):
                    tmp = m[r, j]
                    m[r, j] = m[piv, j]
                    m[piv, j] = tmp
            inv = _powmod(m[r, c], p - 2, p)
            for j in range(c, ncols):
                m[r, j] = m[r, j] * inv % p
            for i in range(r + 1, nrows):
                f = m[i, c]
                if f == 0:
                    continue
                for j in range(c, ncols):
                    if m[r, j] != 0:
                        m[i, j] = _mod(m[i, j] - f * m[r, j], p)
            r += 1
    return int(r)


def wedge_search_chunk(int bound, prefix, target):
    cdef int64_t t[9]
    cdef int64_t a[9]
    cdef int k, npre = len(prefix), pos
    cdef int64_t checked = 0
    cdef bint ok
    tgt = [int(v) for v in np.asarray(target).ravel()]
    for k in range(9):
        t[k] = tgt[k]
    for k in range(npre):
        a[k] = prefix[k]
    for k in range(npre, 9):
        a[k] = -bound
    hits = []
    while True:
        checked += 1
        # rows/cols of the wedge square indexed by pairs (0,1), (0,2), (1,2)
        ok = (
            a[0] * a[4] - a[3] * a[1] == t[0]
            and a[0] * a[5] - a[3] * a[2] == t[1]
            and a[1] * a[5] - a[4] * a[2] == t[2]
            and a[0] * a[7] - a[6] * a[1] == t[3]
            and a[0] * a[8] - a[6] * a[2] == t[4]
            and a[1] * a[8] - a[7] * a[2] == t[5]
            and a[3] * a[7] - a[6] * a[4] == t[6]
            and a[3] * a[8] - a[6] * a[5] == t[7]
            and a[4] * a[8] - a[7] * a[5] == t[8]
        )
        if ok:
            hits.append(tuple(int(a[k]) for k in range(9)))
        pos = 8
        while pos >= npre:
            if a[pos] < bound:
                a[pos] += 1
                break
            a[pos] = -bound
            pos -= 1
        if pos < npre:
            break
    return int(checked), hits


def check_pairs(perms, phases, ix, iy, iz, shifts, int64_t m, batch=None):
    cdef int64_t[:, ::1] P = np.ascontiguousarray(perms, dtype=np.int64)
    cdef int64_t[:, ::1] H = np.ascontiguousarray(phases, dtype=np.int64)
    cdef int64_t[::1] X = np.ascontiguousarray(ix, dtype=np.int64)
    cdef int64_t[::1] Y = np.ascontiguousarray(iy, dtype=np.int64)
    cdef int64_t[::1] Z = np.ascontiguousarray(iz, dtype=np.int64)
    cdef int64_t[::1] SH = np.ascontiguousarray(shifts, dtype=np.int64)
    cdef Py_ssize_t npairs = X.shape[0], d = P.shape[1], t, v
    cdef int64_t x, y, z, w
    cdef Py_ssize_t bad = -1
    with nogil:
        for t in range(npairs):
            x = X[t]
            y = Y[t]
            z = Z[t]
            for v in range(d):
                w = P[y, v]
                if P[x, w] != P[z, v] or _mod(H[y, v] + H[x, w] - H[z, v] - SH[t], m) != 0:
                    bad = t
                    break
            if bad >= 0:
                break
    return int(bad)
