"""Independent reference implementations used to check the library's math.

These deliberately take different computational routes from the library
(plain Python double loops, a generic optimizer) so agreement is evidence
of correctness rather than shared code.
"""

from __future__ import annotations

import numpy as np
from scipy import optimize


def brute_force_r(sc):
    """Row-normalized positive-difference scores via explicit double loops."""
    n = len(sc)
    out = []
    for i in range(n):
        numer = 0.0
        for j in range(n):
            if j != i:
                numer += max(0.0, sc[i][i] - sc[i][j])
        denom = 0.0
        for k in range(n):
            for j in range(n):
                if j != k:
                    denom += max(0.0, sc[i][k] - sc[i][j])
        out.append(numer / denom if denom > 0 else 0.0)
    return np.array(out)


def scipy_logit_oracle(X, y, ridge):
    """Ridge-penalized Bernoulli maximum likelihood via L-BFGS-B."""
    X1 = np.hstack([np.ones((X.shape[0], 1)), X])

    def neg_loglik(beta):
        eta = X1 @ beta
        return -(np.sum(y * eta - np.logaddexp(0, eta)) - 0.5 * ridge * beta @ beta)

    def grad(beta):
        mu = 1 / (1 + np.exp(-np.clip(X1 @ beta, -40, 40)))
        return -(X1.T @ (y - mu) - ridge * beta)

    res = optimize.minimize(
        neg_loglik, np.zeros(X1.shape[1]), jac=grad, method="L-BFGS-B",
        options={"ftol": 1e-16, "gtol": 1e-12, "maxiter": 5000},
    )
    return res.x
