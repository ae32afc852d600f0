"""Label-free mapping quality: factor-anchored term scores and the R metric.

Anchor terms (a small lexicon per factor, or zero-shot NER labels) are
extracted from segments. For segments assigned factor i, sc[i][j] is the
confidence-weighted count of factor-j terms scaled by 1/N (N = number of
factors). R_i then measures how dominant the diagonal is within row i:
the positive part of (sc[i][i] − sc[i][j]) summed over j, normalized by
the positive differences over all ordered pairs in the row. R_i is 1 when
own-factor terms strictly dominate a flat background and 0 when the row
is flat (zero denominator).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .remote import auth_headers, post_json
from .thematic import N_FACTORS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnchorTerm:
    factor_id: int
    text: str
    weight: float = 1.0


@dataclass
class AnchoredEntity:
    """One extracted span, tied to a factor with an extractor confidence."""

    surface: str
    factor_label: int
    weight: float
    case_id: str
    segment_index: int


@dataclass
class ScoreMatrix:
    sc: np.ndarray
    segment_counts: np.ndarray


@dataclass
class EvalReport:
    R: np.ndarray
    mean: float
    stdev: float
    provider_ids: tuple

    def as_dict(self):
        from .thematic import FACTORS

        return {
            "R": {FACTORS[i].abbrev: float(self.R[i]) for i in range(len(self.R))},
            "mean": self.mean,
            "stdev": self.stdev,
            "providers": {
                "encoder": self.provider_ids[0],
                "generator": self.provider_ids[1],
                "extractor": self.provider_ids[2],
            },
        }


def load_anchors(path):
    """Anchor config: JSON mapping factor_id -> [{phrase|label, weight?}, …]."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"anchor config not found: {path}")
    anchors = []
    for key, items in doc.items():
        fid = int(key)
        if not 0 <= fid < N_FACTORS:
            raise ConfigError(f"{path}: bad factor id {key!r}")
        for item in items:
            text = item.get("phrase") or item.get("label")
            if not text:
                raise ConfigError(f"{path}: anchor item for factor {fid} has no phrase/label")
            weight = float(item.get("weight", 1.0))
            if not 0.0 <= weight <= 1.0:
                raise ConfigError(f"{path}: anchor weight {weight} outside [0, 1]")
            anchors.append(AnchorTerm(factor_id=fid, text=text, weight=weight))
    _check_coverage(anchors)
    return anchors


def _check_coverage(anchors):
    covered = {a.factor_id for a in anchors}
    missing = sorted(set(range(N_FACTORS)) - covered)
    if missing:
        raise ConfigError(f"anchor config has no terms for factors: {missing}")


class LexiconMatcher:
    """Deterministic extractor: case-insensitive whole-phrase matches."""

    def __init__(self, anchors):
        import re

        if not anchors:
            raise ConfigError("empty anchor config")
        _check_coverage(anchors)
        self.model_id = "lexicon"
        self._patterns = [
            (re.compile(r"\b" + re.escape(a.text).replace(r"\ ", r"\s+") + r"\b", re.IGNORECASE), a)
            for a in anchors
        ]

    def extract(self, text):
        hits = []
        for pattern, anchor in self._patterns:
            for m in pattern.finditer(text):
                hits.append((m.group(0), anchor.factor_id, anchor.weight))
        return hits


class RemoteNerExtractor:
    """Zero-shot NER endpoint: POST {model, text, labels[]} -> {entities[]}.

    Returned labels map back to factors through the anchor terms; spans
    whose label is not an anchor term are dropped. Confidence scores are
    clamped to [0, 1].
    """

    def __init__(self, anchors, model_id, endpoint, api_key_env=None, max_retries=3, timeout=60.0):
        if not anchors:
            raise ConfigError("empty anchor config")
        _check_coverage(anchors)
        self.model_id = model_id
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.max_retries = max_retries
        self.timeout = timeout
        self._factor_by_label = {a.text: a.factor_id for a in anchors}

    def extract(self, text):
        doc = post_json(
            self.endpoint,
            {
                "model": self.model_id,
                "text": text,
                "labels": sorted(self._factor_by_label),
            },
            headers=auth_headers(self.api_key_env),
            retries=self.max_retries,
            timeout=self.timeout,
        )
        hits = []
        for ent in doc.get("entities", []):
            fid = self._factor_by_label.get(ent.get("label"))
            if fid is None:
                continue
            weight = min(1.0, max(0.0, float(ent.get("score", 1.0))))
            hits.append((ent.get("text", ""), fid, weight))
        return hits


def extract_anchored_entities(corpus, assignments, extractor):
    """Run the extractor over every assigned segment."""
    assigned = {(a.case_id, a.segment_index) for a in assignments}
    entities = []
    for case in corpus:
        for seg in case.segments:
            if (case.case_id, seg.index) not in assigned:
                continue
            for surface, fid, weight in extractor.extract(seg.text):
                entities.append(
                    AnchoredEntity(
                        surface=surface,
                        factor_label=fid,
                        weight=weight,
                        case_id=case.case_id,
                        segment_index=seg.index,
                    )
                )
    return entities


def score_matrix(entities, assignments, n_factors=N_FACTORS):
    """sc[i][j] = (1/N) * sum of factor-j term weights in factor-i segments."""
    factor_of = {(a.case_id, a.segment_index): a.factor for a in assignments}
    sc = np.zeros((n_factors, n_factors), dtype=np.float64)
    for ent in entities:
        key = (ent.case_id, ent.segment_index)
        if key not in factor_of:
            raise DataError(f"entity in unassigned segment {key}")
        sc[factor_of[key], ent.factor_label] += ent.weight / n_factors
    counts = np.zeros(n_factors, dtype=np.int64)
    for fid in factor_of.values():
        counts[fid] += 1
    return ScoreMatrix(sc=sc, segment_counts=counts)


def positive_difference(a, b):
    return max(0.0, a - b)


def normalized_scores(sc_matrix, provider_ids=("", "", "")):
    """Normalize each row of the score matrix into R_i ∈ [0, 1].

    R_i = Σ_{j≠i} max(0, sc[i][i] − sc[i][j]) over the positive
    differences of all ordered pairs (k, j), k ≠ j, within row i. A row
    with no positive differences (flat) gets R_i = 0.
    """
    sc = sc_matrix.sc if isinstance(sc_matrix, ScoreMatrix) else np.asarray(sc_matrix, dtype=np.float64)
    n = sc.shape[0]
    if sc.shape != (n, n):
        raise DataError(f"score matrix must be square, got {sc.shape}")
    r = np.zeros(n, dtype=np.float64)
    for i in range(n):
        row = sc[i]
        delta = np.maximum(row[:, None] - row[None, :], 0.0)
        # summing per-pivot subtotals keeps the numerator an exact addend of
        # the denominator, so R_i <= 1 holds in floating point, not just math
        pivot_sums = delta.sum(axis=1)
        denom = float(pivot_sums.sum())
        r[i] = float(pivot_sums[i]) / denom if denom > 0.0 else 0.0
    return EvalReport(
        R=r,
        mean=float(np.mean(r)),
        stdev=float(np.std(r)),
        provider_ids=tuple(provider_ids),
    )
