"""Nearest-seed kernel dispatch: compiled extension if available, NumPy otherwise.

Set ``LEXMAP_KERNEL=c`` or ``LEXMAP_KERNEL=py`` to force a lane (``c``
raises if the extension is missing); the default ``auto`` prefers the
compiled lane. ``ACTIVE_BACKEND`` reports which lane is live.

Both lanes implement the same scan: for each query row, the squared
euclidean distance to every seed row, keeping the best and second-best.
Ties at exactly equal distance resolve to the lowest factor id, then the
lowest seed ordinal. Cosine distance is the scan run on L2-normalized
rows, halved.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ConfigError

_mode = os.environ.get("LEXMAP_KERNEL", "auto")
_impl = None
if _mode in ("auto", "c"):
    try:
        from . import _nearest_c as _impl_mod

        _impl = _impl_mod.nearest_scan
        ACTIVE_BACKEND = "c"
    except ImportError:
        if _mode == "c":
            raise ImportError(
                "LEXMAP_KERNEL=c but the compiled kernel is not built; "
                "reinstall with a C compiler or unset LEXMAP_KERNEL"
            )
if _impl is None:
    from ._nearest_py import nearest_scan as _impl

    ACTIVE_BACKEND = "py"


def nearest_seeds(queries, seeds, seed_factors, metric="cosine"):
    """Assign each query row its nearest seed's factor.

    Args:
        queries: (n, d) array of query vectors.
        seeds: (m, d) array of seed vectors, m >= 1.
        seed_factors: length-m int array, the factor id of each seed.
        metric: "cosine" or "euclidean".

    Returns:
        ``(factors, distances, margins)`` — per query, the winning factor
        id, the distance to the winning seed, and (second-best distance −
        best distance). The margin is 0 when a single seed exists.
    """
    x = np.ascontiguousarray(queries, dtype=np.float64)
    s = np.ascontiguousarray(seeds, dtype=np.float64)
    f = np.ascontiguousarray(seed_factors, dtype=np.int64)
    if x.ndim != 2 or s.ndim != 2:
        raise ConfigError("nearest_seeds: queries and seeds must be 2-D")
    if x.shape[1] != s.shape[1]:
        raise ConfigError(
            f"nearest_seeds: dim mismatch {x.shape[1]} vs {s.shape[1]}"
        )
    if s.shape[0] == 0:
        raise ConfigError("nearest_seeds: no seeds")
    if f.shape != (s.shape[0],):
        raise ConfigError("nearest_seeds: seed_factors length != seed count")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(s))):
        raise ConfigError("nearest_seeds: non-finite vector components")

    if metric == "cosine":
        xn = np.sqrt(np.einsum("ij,ij->i", x, x))
        sn = np.sqrt(np.einsum("ij,ij->i", s, s))
        if np.any(xn == 0.0) or np.any(sn == 0.0):
            raise ConfigError("cosine metric undefined for zero-norm rows")
        x = x / xn[:, None]
        s = s / sn[:, None]
    elif metric != "euclidean":
        raise ConfigError(f"unknown metric: {metric!r}")

    best_f, best_sq, second_sq = _impl(x, s, f)

    if metric == "cosine":
        dist = 0.5 * best_sq
        margin = 0.5 * (second_sq - best_sq)
    else:
        dist = np.sqrt(best_sq)
        margin = np.sqrt(second_sq) - dist
    return np.asarray(best_f, dtype=np.int64), dist, np.maximum(margin, 0.0)
