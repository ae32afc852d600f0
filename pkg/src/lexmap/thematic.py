"""The six-factor taxonomy, seed-sentence banks, and segment-to-factor mapping.

Each factor carries the generation prompt used to elicit seed sentences.
A segment is assigned the factor of its nearest seed vector; ties at
exactly equal distance go to the lowest factor id, then the lowest seed
ordinal in the bank. Assignment is hard: one factor per segment.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .embedding import embed_texts
from .errors import ConfigError, DataError, SeedBankError
from .kernels import nearest_seeds
from .remote import auth_headers, post_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThematicFactor:
    id: int
    abbrev: str
    name: str
    prompt: str


FACTORS = (
    ThematicFactor(
        0,
        "FM",
        "Financial Misconduct & Investor Impact",
        "Focus on mentions of how the complaints describe the impact on investors, "
        "such as specific harms or financial losses. This includes improper "
        "accounting practices and bribery, highlighting the importance of "
        "compliance with internal controls and transparency in financial dealings.",
    ),
    ThematicFactor(
        1,
        "RC",
        "Regulatory Compliance",
        "Focus on mentions of companies failing to comply with regulations, such "
        "as not properly registering securities or failing to disclose critical "
        "information, and how these shortcomings subject them to lawsuits, "
        "emphasizing the importance of adherence to established securities laws.",
    ),
    ThematicFactor(
        2,
        "PM",
        "Promotion & Misrepresentation",
        "Focus on mentions of any misrepresentations, particularly on instances "
        "of asymmetric information and over-promotion. Detail how information was "
        "misleading, exaggerated, or deceptively presented, offering insights "
        "into subtle forms of fraud.",
    ),
    ThematicFactor(
        3,
        "SO",
        "Scope and Scale of Operations",
        "Focus on mentions of how the scope and scale of the company's operations "
        "are described. Pay attention to numeric facts such as the amount of "
        "money involved, the number of investors, and the geographic reach of "
        "operations.",
    ),
    ThematicFactor(
        4,
        "TR",
        "Technological Risks",
        "Focus on mentions of specific technological vulnerabilities or failures, "
        "such as inadequacies in the blockchain technology itself, security "
        "breaches, or technical misrepresentations.",
    ),
    ThematicFactor(
        5,
        "KI",
        "Key Individuals",
        "Focus on mentions of key individuals within the company. Observe how "
        "their actions, statements, and roles might reveal individual culpability "
        "or highlight leadership issues that contribute to legal violations.",
    ),
)

N_FACTORS = len(FACTORS)
FACTOR_BY_ABBREV = {f.abbrev: f for f in FACTORS}


def factor_by_id(factor_id):
    if not 0 <= factor_id < N_FACTORS:
        raise DataError(f"factor id out of range: {factor_id}")
    return FACTORS[factor_id]


@dataclass
class SeedSentence:
    """A factor-anchored sentence whose embedding acts as a class prototype."""

    factor_id: int
    text: str
    length_limit: int = 0
    vector: np.ndarray | None = None

    def __post_init__(self):
        words = len(self.text.split())
        if self.length_limit <= 0:
            self.length_limit = words
        if words > self.length_limit:
            raise SeedBankError(
                f"seed exceeds length limit ({words} > {self.length_limit}): {self.text[:50]!r}"
            )


@dataclass
class FactorAssignment:
    case_id: str
    segment_index: int
    factor: int
    distance: float
    runner_up_margin: float


@dataclass
class FactorProportions:
    """Per-case share of segments assigned to each factor; sums to 1."""

    case_id: str
    p: np.ndarray
    year: int
    acts: list = field(default_factory=list)
    category: str | None = None


# ---------------------------------------------------------------------------
# Seed banks
# ---------------------------------------------------------------------------

def load_seed_bank(path, length_limit=None):
    """Load a seed bank: a JSON array of ``{"factor_id": int, "text": str}``.

    Every factor must have at least one seed; single-seed factors load
    with a sparsity warning.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise SeedBankError(f"seed bank not found: {path}")
    except json.JSONDecodeError as exc:
        raise SeedBankError(f"{path}:{exc.lineno}: malformed seed bank: {exc.msg}") from exc
    if not isinstance(doc, list):
        raise SeedBankError(f"{path}: expected a JSON array of seed records")

    seeds = []
    for pos, rec in enumerate(doc):
        if not isinstance(rec, dict) or "factor_id" not in rec or "text" not in rec:
            raise SeedBankError(f"{path}: record {pos}: need factor_id and text")
        fid = rec["factor_id"]
        if not isinstance(fid, int) or not 0 <= fid < N_FACTORS:
            raise SeedBankError(f"{path}: record {pos}: bad factor_id {fid!r}")
        if not isinstance(rec["text"], str) or not rec["text"].strip():
            raise SeedBankError(f"{path}: record {pos}: empty text")
        seeds.append(
            SeedSentence(
                factor_id=fid,
                text=rec["text"],
                length_limit=length_limit or rec.get("length_limit", 0),
            )
        )

    counts = [0] * N_FACTORS
    for s in seeds:
        counts[s.factor_id] += 1
    missing = [FACTORS[i].abbrev for i, c in enumerate(counts) if c == 0]
    if missing:
        raise SeedBankError(f"{path}: factors with no seeds: {', '.join(missing)}")
    sparse = [FACTORS[i].abbrev for i, c in enumerate(counts) if c == 1]
    if sparse:
        logger.warning("seed bank %s is sparse (1 seed) for: %s", path, ", ".join(sparse))
    logger.info(
        "loaded %d seeds from %s (%s)",
        len(seeds),
        path,
        ", ".join(f"{FACTORS[i].abbrev}={c}" for i, c in enumerate(counts)),
    )
    return seeds


def save_seed_bank(seeds, path):
    records = [{"factor_id": s.factor_id, "text": s.text} for s in seeds]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


class RemoteTextGenerator:
    """Seed-sentence generator endpoint: POST {model, prompt, max_words} -> {text}."""

    def __init__(self, model_id, endpoint, api_key_env=None, max_retries=3, timeout=60.0):
        self.model_id = model_id
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.max_retries = max_retries
        self.timeout = timeout

    def generate(self, prompt, max_words):
        doc = post_json(
            self.endpoint,
            {"model": self.model_id, "prompt": prompt, "max_words": max_words},
            headers=auth_headers(self.api_key_env),
            retries=self.max_retries,
            timeout=self.timeout,
        )
        return doc.get("text", "")


class DeterministicTextGenerator:
    """Test stand-in: echoes prompt words, tagged with the request ordinal."""

    model_id = "deterministic-test"

    def __init__(self):
        self._calls = 0

    def generate(self, prompt, max_words):
        self._calls += 1
        words = prompt.split()[: max(1, max_words - 1)]
        return " ".join(words + [f"variant{self._calls}"])


def generate_seeds(count, length_limit, generator, factors=FACTORS):
    """Generate ``count`` seed sentences per factor from its prompt.

    An over-length response is re-requested up to 3 times, then truncated
    at ``length_limit`` words. Banks may equally be authored by hand; the
    mapping pipeline only ever consumes the persisted file.
    """
    if count <= 0 or length_limit <= 0:
        raise ConfigError("generate_seeds: count and length_limit must be positive")
    seeds = []
    for factor in factors:
        for _ in range(count):
            text = ""
            for _attempt in range(3):
                text = generator.generate(factor.prompt, length_limit).strip()
                if text and len(text.split()) <= length_limit:
                    break
            if not text:
                raise ConfigError(f"generator returned no text for factor {factor.abbrev}")
            words = text.split()
            if len(words) > length_limit:
                text = " ".join(words[:length_limit])
            seeds.append(
                SeedSentence(factor_id=factor.id, text=text, length_limit=length_limit)
            )
    return seeds


# ---------------------------------------------------------------------------
# Mapping and proportions
# ---------------------------------------------------------------------------

def map_segments(corpus, bank, cfg, cache=None, metric="cosine"):
    """Assign every segment of every complaint the factor of its nearest seed.

    Seeds and segments are embedded under the same provider config (one
    semantic space); seeds that already carry vectors of a different
    dimension are a configuration error.
    """
    if not bank:
        raise SeedBankError("map_segments: empty seed bank")
    for s in bank:
        if s.vector is not None and len(s.vector) != cfg.dim:
            raise ConfigError(
                f"seed vector dim {len(s.vector)} != provider dim {cfg.dim}; "
                "seeds and segments must share one embedding model"
            )

    seed_vecs = embed_texts([s.text for s in bank], cfg, cache=cache)
    for s, v in zip(bank, seed_vecs):
        s.vector = v

    seg_refs = []
    seg_texts = []
    for case in corpus:
        for seg in case.segments:
            seg_refs.append((case.case_id, seg.index))
            seg_texts.append(seg.text)
    if not seg_refs:
        raise DataError("map_segments: corpus has no segments")
    seg_vecs = embed_texts(seg_texts, cfg, cache=cache)

    factors, dists, margins = nearest_seeds(
        np.vstack(seg_vecs),
        np.vstack(seed_vecs),
        np.array([s.factor_id for s in bank], dtype=np.int64),
        metric=metric,
    )
    return [
        FactorAssignment(
            case_id=ref[0],
            segment_index=ref[1],
            factor=int(factors[i]),
            distance=float(dists[i]),
            runner_up_margin=float(margins[i]),
        )
        for i, ref in enumerate(seg_refs)
    ]


def factor_proportions(assignments, corpus):
    """Per-case factor shares: p[j] = segments assigned j / total segments.

    Cases with no segments are excluded with a warning; a case with an
    unassigned segment is an error (the mapping stage must be complete).
    """
    by_case = {}
    for a in assignments:
        by_case.setdefault(a.case_id, {})[a.segment_index] = a.factor

    out = []
    for case in corpus:
        if not case.segments:
            logger.warning("case %s has no segments; excluded from proportions", case.case_id)
            continue
        assigned = by_case.get(case.case_id, {})
        counts = np.zeros(N_FACTORS, dtype=np.float64)
        for seg in case.segments:
            if seg.index not in assigned:
                raise DataError(
                    f"case {case.case_id} segment {seg.index} has no factor assignment"
                )
            counts[assigned[seg.index]] += 1.0
        out.append(
            FactorProportions(
                case_id=case.case_id,
                p=counts / counts.sum(),
                year=case.year,
                acts=[a.canonical_id for a in case.acts],
                category=case.category,
            )
        )
    return out
