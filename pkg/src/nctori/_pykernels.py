"""Reference (numpy) implementations of the hot kernels.

Same signatures and results as the compiled ``_ckernels`` module.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

# basis order e1^e2, e1^e3, e2^e3
_PAIRS = ((0, 1), (0, 2), (1, 2))


def rank_mod_p(a, p: int) -> int:
    """Rank of an integer matrix over GF(p); ``p < 2**31``."""
    a = np.array(a, dtype=np.int64) % p
    nrows, ncols = a.shape
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = a[r] * inv % p
        below = r + 1 + np.flatnonzero(a[r + 1 :, c])
        if below.size:
            f = a[below, c][:, None]
            a[below] = (a[below] - f * a[r]) % p
        r += 1
    return r


def wedge_search_chunk(bound: int, prefix, target) -> tuple[int, list[tuple[int, ...]]]:
    """Enumerate 3x3 integer matrices with entries in ``[-bound, bound]``
    whose first ``len(prefix)`` row-major entries are fixed, and return
    ``(checked, hits)`` where hits have ``wedge_square(A) == target``."""
    prefix = [int(v) for v in prefix]
    free = 9 - len(prefix)
    vals = np.arange(-bound, bound + 1, dtype=np.int64)
    grids = np.meshgrid(*([vals] * free), indexing="ij")
    cols = [np.full(grids[0].size if free else 1, v, dtype=np.int64) for v in prefix]
    cols += [g.ravel() for g in grids]
    A = np.stack(cols, axis=1).reshape(-1, 3, 3)
    target = np.asarray(target, dtype=np.int64).reshape(3, 3)
    match = np.ones(A.shape[0], dtype=bool)
    for r, (i, l) in enumerate(_PAIRS):
        for c, (j, k) in enumerate(_PAIRS):
            minor = A[:, i, j] * A[:, l, k] - A[:, l, j] * A[:, i, k]
            match &= minor == target[r, c]
    hits = [tuple(int(x) for x in A[idx].ravel()) for idx in np.flatnonzero(match)]
    return int(A.shape[0]), hits


def check_pairs(perms, phases, ix, iy, iz, shifts, m: int, batch: int = 256) -> int:
    """First ``t`` with ``U[ix[t]] U[iy[t]] != zeta^shifts[t] U[iz[t]]``, or -1.

    Row ``k`` of ``perms``/``phases`` is the phase-permutation matrix
    sending basis vector ``j`` to ``zeta^phases[k, j] e_{perms[k, j]}``.
    """
    perms = np.asarray(perms, dtype=np.int64)
    phases = np.asarray(phases, dtype=np.int64)
    ix, iy, iz = (np.asarray(v, dtype=np.int64) for v in (ix, iy, iz))
    shifts = np.asarray(shifts, dtype=np.int64)
    for start in range(0, ix.size, batch):
        sl = slice(start, start + batch)
        px, hx = perms[ix[sl]], phases[ix[sl]]
        py, hy = perms[iy[sl]], phases[iy[sl]]
        pz, hz = perms[iz[sl]], phases[iz[sl]]
        perm = np.take_along_axis(px, py, axis=1)
        phase = hy + np.take_along_axis(hx, py, axis=1) - hz - shifts[sl][:, None]
        bad = (perm != pz).any(axis=1) | (phase % m != 0).any(axis=1)
        if bad.any():
            return start + int(np.flatnonzero(bad)[0])
    return -1
