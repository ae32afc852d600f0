"""Per-(Act, year-bucket) logistic models of Act presence on factor shares.

Each model regresses a binary indicator (does the complaint cite the Act)
on the complaint's 6-vector of factor proportions, via a logit link
fitted by ridge-penalized IRLS with step-halving. Slope coefficients are
then z-scored within each bucket (pooled across all fitted Act cells,
intercepts excluded) and bucketed into high / moderate / low; negative
standardized values are set aside rather than interpreted.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .thematic import N_FACTORS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class YearBucket:
    label: str
    years: frozenset

    def __contains__(self, year):
        return year in self.years


DEFAULT_BUCKETS = (
    YearBucket("2012-2016", frozenset(range(2012, 2017))),
    YearBucket("2017", frozenset({2017})),
    YearBucket("2018", frozenset({2018})),
    YearBucket("2019", frozenset({2019})),
    YearBucket("2020", frozenset({2020})),
    YearBucket("2021", frozenset({2021})),
    YearBucket("2022", frozenset({2022})),
    YearBucket("2023+", frozenset({2023, 2024})),
)

BUCKET_LABELS = tuple(b.label for b in DEFAULT_BUCKETS)


def bucket_for_year(year, buckets=DEFAULT_BUCKETS):
    for bucket in buckets:
        if year in bucket:
            return bucket
    raise DataError(f"filing year {year} maps to no bucket")


@dataclass
class GlmOptions:
    tol: float = 1e-8
    max_iter: int = 100
    ridge: float = 1e-6
    ridge_cap: float = 1.0
    min_positives: int = 2
    high_threshold: float = 1.0
    moderate_threshold: float = 0.5

    def __post_init__(self):
        if not self.high_threshold >= self.moderate_threshold >= 0.0:
            raise ConfigError("thresholds must satisfy high >= moderate >= 0")
        if self.ridge < 0 or self.tol <= 0 or self.max_iter < 1:
            raise ConfigError("bad GLM options")


@dataclass
class GlmFit:
    act: str
    bucket: str
    beta0: float
    betas: np.ndarray
    converged: bool
    iterations: int
    n_obs: int
    ridge: float


@dataclass
class CoefficientCell:
    act: str
    factor: int
    bucket: str
    raw: float | None
    standardized: float | None
    category: str


@dataclass
class PairRanking:
    pairs: list = field(default_factory=list)


class DegenerateDesign(Exception):
    """Raised when a (act, bucket) cell cannot support a fit."""


def assemble_design(proportions, acts_per_case, act, bucket):
    """Design matrix for one (act, bucket): X rows are p vectors, y is citation."""
    rows = []
    y = []
    for prop in proportions:
        if prop.year not in bucket:
            continue
        rows.append(prop.p)
        y.append(1.0 if act in acts_per_case.get(prop.case_id, ()) else 0.0)
    if len(rows) < 3:
        raise DegenerateDesign(f"{act} / {bucket.label}: only {len(rows)} observations")
    y = np.asarray(y, dtype=np.float64)
    if y.min() == y.max():
        raise DegenerateDesign(f"{act} / {bucket.label}: response is constant")
    return np.vstack(rows), y


def _sigmoid(eta):
    return 1.0 / (1.0 + np.exp(-np.clip(eta, -40.0, 40.0)))


def _penalized_loglik(X1, y, beta, ridge):
    eta = X1 @ beta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)) - 0.5 * ridge * np.dot(beta, beta))


def _gradient(X1, y, beta, ridge):
    return X1.T @ (y - _sigmoid(X1 @ beta)) - ridge * beta


def _irls(X1, y, ridge, tol, max_iter, trace=None):
    """One IRLS run. Returns (beta, converged, iterations, diverged)."""
    p = X1.shape[1]
    beta = np.zeros(p, dtype=np.float64)
    loglik = _penalized_loglik(X1, y, beta, ridge)
    if trace is not None:
        trace.append(loglik)
    iterations = 0
    for _ in range(max_iter):
        grad = _gradient(X1, y, beta, ridge)
        if np.max(np.abs(grad)) <= tol:
            return beta, True, iterations, False
        mu = _sigmoid(X1 @ beta)
        w = mu * (1.0 - mu)
        hess = X1.T @ (w[:, None] * X1) + ridge * np.eye(p)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            return beta, False, iterations, True

        # Step-halving keeps the penalized log-likelihood non-decreasing.
        t = 1.0
        accepted = False
        while t > 1e-10:
            candidate = beta + t * step
            cand_loglik = _penalized_loglik(X1, y, candidate, ridge)
            if math.isfinite(cand_loglik) and cand_loglik >= loglik:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        beta = candidate
        loglik = cand_loglik
        iterations += 1
        if trace is not None:
            trace.append(loglik)
        if not np.all(np.isfinite(beta)) or np.max(np.abs(beta)) > 1e2:
            return beta, False, iterations, True

    grad = _gradient(X1, y, beta, ridge)
    return beta, bool(np.max(np.abs(grad)) <= tol), iterations, False


def fit_logit(X, y, opts=None, act="", bucket="", trace=None):
    """Ridge-penalized logistic fit by IRLS with step-halving.

    Converged means max |gradient of the penalized log-likelihood| <= tol
    at the returned coefficients. On step divergence (quasi-separation)
    the ridge escalates tenfold up to ``opts.ridge_cap``; the value
    actually applied is recorded on the fit. ``trace``, when a list is
    passed, collects the penalized log-likelihood at each accepted step.
    """
    opts = opts or GlmOptions()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DataError(f"bad design shapes: X {X.shape}, y {y.shape}")
    if X.shape[0] < 3:
        raise DataError("fit_logit needs at least 3 observations")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise DataError("non-finite values in the design")
    if not set(np.unique(y)) <= {0.0, 1.0}:
        raise DataError("response must be binary")

    X1 = np.hstack([np.ones((X.shape[0], 1)), X])
    ridge = opts.ridge if opts.ridge > 0 else 1e-12
    while True:
        if trace is not None:
            trace.clear()
        beta, converged, iterations, diverged = _irls(X1, y, ridge, opts.tol, opts.max_iter, trace)
        if diverged and ridge * 10 <= opts.ridge_cap:
            logger.debug("%s/%s: separation detected, escalating ridge to %g", act, bucket, ridge * 10)
            ridge *= 10
            continue
        break

    return GlmFit(
        act=act,
        bucket=bucket,
        beta0=float(beta[0]),
        betas=beta[1:].copy(),
        converged=converged,
        iterations=iterations,
        n_obs=X.shape[0],
        ridge=ridge,
    )


def fit_bucket_models(proportions, acts_per_case, opts=None, buckets=DEFAULT_BUCKETS):
    """Fit every (act, bucket) cell with enough signal.

    Acts with fewer than ``opts.min_positives`` citing cases in a bucket,
    and degenerate designs, are skipped: those cells are absent. Returns
    ``(fits, absent)`` where absent is a list of (act, bucket_label).
    """
    opts = opts or GlmOptions()
    all_acts = sorted({a for acts in acts_per_case.values() for a in acts})
    fits = []
    absent = []
    for bucket in buckets:
        in_bucket = [p for p in proportions if p.year in bucket]
        if not in_bucket:
            absent.extend((act, bucket.label) for act in all_acts)
            continue
        for act in all_acts:
            positives = sum(
                1 for p in in_bucket if act in acts_per_case.get(p.case_id, ())
            )
            if positives < opts.min_positives:
                absent.append((act, bucket.label))
                continue
            try:
                X, y = assemble_design(proportions, acts_per_case, act, bucket)
            except DegenerateDesign as exc:
                logger.debug("skipping cell: %s", exc)
                absent.append((act, bucket.label))
                continue
            fits.append(fit_logit(X, y, opts, act=act, bucket=bucket.label))
    return fits, absent


def standardize_coefficients(fits, opts=None):
    """Z-score slope coefficients pooled within one bucket and categorize.

    Pooling covers every (act, factor) slope in the bucket; intercepts are
    excluded. Categories: standardized >= high threshold -> high,
    > moderate threshold -> moderate, >= 0 -> low, < 0 ->
    excluded-negative. Zero pooled stdev degrades every cell to low.
    """
    opts = opts or GlmOptions()
    if not fits:
        return []
    bucket_labels = {f.bucket for f in fits}
    if len(bucket_labels) != 1:
        raise DataError(f"standardize_coefficients: mixed buckets {sorted(bucket_labels)}")
    bucket = fits[0].bucket

    pooled = np.concatenate([f.betas for f in fits])
    if pooled.size < 2:
        raise DataError("standardize_coefficients: fewer than 2 slope coefficients")
    mean = float(np.mean(pooled))
    std = float(np.std(pooled))
    if std == 0.0:
        logger.warning("bucket %s: zero coefficient variance; all cells categorized low", bucket)

    cells = []
    for fit in fits:
        for j in range(N_FACTORS):
            raw = float(fit.betas[j])
            if std == 0.0:
                z, category = 0.0, "low"
            else:
                z = (raw - mean) / std
                category = categorize(z, opts)
            cells.append(
                CoefficientCell(
                    act=fit.act,
                    factor=j,
                    bucket=bucket,
                    raw=raw,
                    standardized=z,
                    category=category,
                )
            )
    return cells


def categorize(standardized, opts=None):
    opts = opts or GlmOptions()
    if standardized >= opts.high_threshold:
        return "high"
    if standardized > opts.moderate_threshold:
        return "moderate"
    if standardized >= 0.0:
        return "low"
    return "excluded-negative"


def absent_cells(absent, n_factors=N_FACTORS):
    return [
        CoefficientCell(act=act, factor=j, bucket=bucket, raw=None, standardized=None, category="absent")
        for act, bucket in absent
        for j in range(n_factors)
    ]


def rank_pairs(cells):
    """Order (act, factor) pairs by how often they hit the high category.

    high_year_count counts buckets where the pair is high; ties break on
    the pair's maximum standardized coefficient. Pairs that are absent
    everywhere are dropped.
    """
    by_pair = {}
    for cell in cells:
        by_pair.setdefault((cell.act, cell.factor), []).append(cell)

    pairs = []
    for (act, factor), pair_cells in by_pair.items():
        present = [c for c in pair_cells if c.standardized is not None]
        if not present:
            continue
        high_count = sum(1 for c in present if c.category == "high")
        best = max(present, key=lambda c: c.standardized)
        pairs.append((act, factor, high_count, best.standardized, best.bucket))
    pairs.sort(key=lambda t: (-t[2], -t[3], t[0], t[1]))
    return PairRanking(pairs=pairs)
