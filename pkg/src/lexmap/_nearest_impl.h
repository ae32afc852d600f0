#ifndef LEXMAP_NEAREST_IMPL_H
#define LEXMAP_NEAREST_IMPL_H

#include <stddef.h>

/* Squared euclidean distance in difference form. The simd reduction may
 * reassociate the sum, which is safe here: identical inputs still give
 * exactly 0.0 (every term is 0.0), and bitwise-equal rows take the same
 * code path, so exact ties stay exact. */
static inline double lexmap_sqdist(const double *restrict a,
                                   const double *restrict b,
                                   ptrdiff_t d) {
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (ptrdiff_t k = 0; k < d; k++) {
        double t = a[k] - b[k];
        acc += t * t;
    }
    return acc;
}

/* Four query rows against one seed row: the seed is loaded once per
 * vector lane, and the four accumulator chains hide FMA latency. */
static inline void lexmap_sqdist4(const double *restrict x0,
                                  const double *restrict x1,
                                  const double *restrict x2,
                                  const double *restrict x3,
                                  const double *restrict s, ptrdiff_t d,
                                  double *restrict out) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
#pragma omp simd reduction(+ : a0, a1, a2, a3)
    for (ptrdiff_t k = 0; k < d; k++) {
        double sv = s[k];
        double t0 = x0[k] - sv;
        double t1 = x1[k] - sv;
        double t2 = x2[k] - sv;
        double t3 = x3[k] - sv;
        a0 += t0 * t0;
        a1 += t1 * t1;
        a2 += t2 * t2;
        a3 += t3 * t3;
    }
    out[0] = a0;
    out[1] = a1;
    out[2] = a2;
    out[3] = a3;
}

#endif
