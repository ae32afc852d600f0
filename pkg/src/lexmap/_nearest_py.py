"""NumPy implementation of the nearest-seed scan (fallback kernel lane).

Bulk squared distances come from one GEMM pass. Entries that are near
zero or within 1e-12 of their row minimum are recomputed with the exact
difference form, so identical vectors score exactly 0.0 and duplicate
seed rows tie bit-exactly — that keeps tie-breaking identical to the
compiled lane, which computes every pair with the difference form.
"""

from __future__ import annotations

import numpy as np

_REFINE_EPS = 1e-12


def nearest_scan(x, s, factors):
    """Top-2 squared-euclidean scan with (factor, ordinal) tie-breaking.

    Returns ``(best_factor, best_sq, second_sq)`` per row of ``x``;
    ``second_sq`` is the second-smallest squared distance over all seeds
    (equal to ``best_sq`` when only one seed exists).
    """
    n, m = x.shape[0], s.shape[0]
    order = np.lexsort((np.arange(m), factors))
    sp = np.ascontiguousarray(s[order])
    fp = np.asarray(factors, dtype=np.int64)[order]

    gram = x @ sp.T
    nx = np.einsum("ij,ij->i", x, x)
    ns = np.einsum("ij,ij->i", sp, sp)
    dist = nx[:, None] + ns[None, :] - 2.0 * gram

    row_min = dist.min(axis=1)
    refine = (dist < _REFINE_EPS) | (dist <= row_min[:, None] + _REFINE_EPS)
    for i, j in zip(*np.nonzero(refine)):
        diff = x[i] - sp[j]
        dist[i, j] = np.dot(diff, diff)

    best_j = np.argmin(dist, axis=1)
    rows = np.arange(n)
    best_sq = dist[rows, best_j]
    best_factor = fp[best_j]
    if m == 1:
        second_sq = best_sq.copy()
    else:
        second_sq = np.partition(dist, 1, axis=1)[:, 1]
    return best_factor, best_sq, second_sq
