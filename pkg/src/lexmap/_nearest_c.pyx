# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled nearest-seed scan: fused squared-distance + top-2 selection.

Every pair is computed with the difference form (see _nearest_impl.h), so
identical vectors score exactly 0.0 and bitwise-equal seed rows tie
bitwise-exactly; no n*m distance matrix is materialized. Rows are
independent: the scan vectorizes per pair and runs under OpenMP across
rows when cores are available.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange

cnp.import_array()

cdef extern from "math.h":
    double INFINITY

cdef extern from "_nearest_impl.h":
    double lexmap_sqdist(const double* a, const double* b, Py_ssize_t d) nogil
    void lexmap_sqdist4(const double* x0, const double* x1, const double* x2,
                        const double* x3, const double* s, Py_ssize_t d,
                        double* out) nogil


def nearest_scan(double[:, ::1] x, double[:, ::1] s, long long[::1] factors):
    """Top-2 squared-euclidean scan with (factor, ordinal) tie-breaking.

    Mirrors ``lexmap._nearest_py.nearest_scan``: returns per-row
    ``(best_factor, best_sq, second_sq)``. Rows are processed in tiles of
    four so each seed row is read once per tile.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = s.shape[0]
    cdef Py_ssize_t d = x.shape[1]

    best_f_arr = np.empty(n, dtype=np.int64)
    best_arr = np.empty(n, dtype=np.float64)
    second_arr = np.empty(n, dtype=np.float64)
    cdef long long[::1] best_f = best_f_arr
    cdef double[::1] best = best_arr
    cdef double[::1] second = second_arr

    cdef Py_ssize_t tiles = n // 4
    cdef Py_ssize_t i, j, t, r, base
    cdef double acc, best_d, second_d
    cdef long long bf, fj

    # per-tile scratch row: each prange iteration owns its row (no races)
    quad_arr = np.empty((max(tiles, 1), 4), dtype=np.float64)
    cdef double[:, ::1] quad = quad_arr

    with nogil:
        for t in prange(tiles, schedule="static"):
            base = t * 4
            for r in range(4):
                best[base + r] = INFINITY
                second[base + r] = INFINITY
                best_f[base + r] = -1
            for j in range(m):
                lexmap_sqdist4(&x[base, 0], &x[base + 1, 0], &x[base + 2, 0],
                               &x[base + 3, 0], &s[j, 0], d, &quad[t, 0])
                fj = factors[j]
                for r in range(4):
                    acc = quad[t, r]
                    if acc < best[base + r]:
                        second[base + r] = best[base + r]
                        best[base + r] = acc
                        best_f[base + r] = fj
                    elif acc == best[base + r]:
                        second[base + r] = best[base + r]
                        if fj < best_f[base + r]:
                            best_f[base + r] = fj
                    elif acc < second[base + r]:
                        second[base + r] = acc
            for r in range(4):
                if second[base + r] == INFINITY:
                    second[base + r] = best[base + r]

        # remainder rows, scalar path
        for i in range(tiles * 4, n):
            best_d = INFINITY
            second_d = INFINITY
            bf = -1
            for j in range(m):
                acc = lexmap_sqdist(&x[i, 0], &s[j, 0], d)
                if acc < best_d:
                    second_d = best_d
                    best_d = acc
                    bf = factors[j]
                elif acc == best_d:
                    second_d = best_d
                    if factors[j] < bf:
                        bf = factors[j]
                elif acc < second_d:
                    second_d = acc
            if second_d == INFINITY:
                second_d = best_d
            best_f[i] = bf
            best[i] = best_d
            second[i] = second_d

    return best_f_arr, best_arr, second_arr
