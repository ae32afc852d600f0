"""Per-case alignment against the fitted coefficient surface, by category.

A case's score compares its actual factor mix with a uniform mix over the
coefficients of the Acts it cites in its year bucket:

    score = sum_{act, j} p_j * C[act][j]  /  sum_{act, j} C[act][j] / n

so a case whose proportions are exactly uniform scores 1 for any surface,
and the score scales out any common rescaling of the coefficients. Raw
(unstandardized) coefficients feed both sums.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .thematic import N_FACTORS
from .trendmodel import bucket_for_year

logger = logging.getLogger(__name__)

HIGH_SCORE = 1.0


@dataclass
class AlignmentScore:
    case_id: str
    category: str
    score: float
    bucket: str


@dataclass
class CategoryReport:
    category: str
    avg_score: float
    pct_high: float
    top_pairs: list = field(default_factory=list)
    case_count: int = 0


def build_surface(cells):
    """Coefficient lookup (act, bucket) -> length-6 raw vector, from cells."""
    surface = {}
    for cell in cells:
        if cell.raw is None:
            continue
        vec = surface.setdefault((cell.act, cell.bucket), np.full(N_FACTORS, np.nan))
        vec[cell.factor] = cell.raw
    for key, vec in surface.items():
        if np.any(np.isnan(vec)):
            raise DataError(f"incomplete coefficient vector for {key}")
    return surface


def alignment_score(prop, surface, n_factors=N_FACTORS, clamp_negative=False):
    """Score one case, or None when it is excluded.

    Acts with no fitted cell in the case's bucket are skipped in both
    sums; a case with no fitted Acts, or a zero denominator, is excluded.
    ``clamp_negative`` floors coefficients at 0 in both sums (sensitivity
    switch; off by default).
    """
    acts = list(prop.acts)
    if len(set(acts)) != len(acts):
        raise DataError(f"case {prop.case_id}: duplicate act citations")
    bucket = bucket_for_year(prop.year).label

    numer = 0.0
    denom = 0.0
    fitted = 0
    for act in acts:
        coefs = surface.get((act, bucket))
        if coefs is None:
            continue
        fitted += 1
        if clamp_negative:
            coefs = np.maximum(coefs, 0.0)
        numer += float(np.dot(prop.p, coefs))
        denom += float(np.sum(coefs / n_factors))
    if fitted == 0:
        logger.warning("case %s: no fitted Acts in bucket %s; excluded", prop.case_id, bucket)
        return None
    if denom == 0.0:
        logger.warning("case %s: zero alignment denominator; excluded", prop.case_id)
        return None
    return AlignmentScore(
        case_id=prop.case_id,
        category=prop.category or "Uncategorized",
        score=numer / denom,
        bucket=bucket,
    )


def score_cases(proportions, surface, clamp_negative=False):
    scores = []
    for prop in proportions:
        score = alignment_score(prop, surface, clamp_negative=clamp_negative)
        if score is not None:
            scores.append(score)
    return scores


def category_report(scores, cells, acts_by_case, top_k=3):
    """Aggregate scores per category and surface the strongest cell pairs.

    top_pairs are the (act, factor, raw coefficient) triples with the
    highest coefficients among the cells the category's cases actually
    touch (their cited Acts in their buckets).
    """
    surface = build_surface(cells)
    by_category = {}
    for s in scores:
        by_category.setdefault(s.category, []).append(s)

    reports = []
    for category in sorted(by_category):
        cat_scores = by_category[category]
        values = np.array([s.score for s in cat_scores])

        best = {}
        for s in cat_scores:
            for act in acts_by_case.get(s.case_id, ()):
                coefs = surface.get((act, s.bucket))
                if coefs is None:
                    continue
                for j in range(N_FACTORS):
                    key = (act, j)
                    if key not in best or coefs[j] > best[key]:
                        best[key] = float(coefs[j])
        ranked = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
        top_pairs = [(act, j, coef) for (act, j), coef in ranked[:top_k]]

        reports.append(
            CategoryReport(
                category=category,
                avg_score=float(values.mean()),
                pct_high=float((values >= HIGH_SCORE).mean()),
                top_pairs=top_pairs,
                case_count=len(cat_scores),
            )
        )
    return reports
