"""lexmap: complaint corpus -> thematic factor mapping -> enforcement trends.

Pipeline stages: ingest numbered-paragraph complaints, embed segments,
assign each segment the factor of its nearest seed sentence, evaluate the
mapping with factor-anchored terms, fit per-(Act, year-bucket) logistic
models on factor proportions, and score per-case alignment against the
fitted surface. See the CLI (``lexmap --help``) for the stage verbs.
"""

__version__ = "0.1.0"

from .corpus import (
    ActCitation,
    Complaint,
    CorpusStats,
    Segment,
    corpus_stats,
    extract_act_citations,
    load_corpus,
    parse_complaint,
    save_corpus,
)
from .embedding import ProviderConfig, VectorCache, distance, embed_texts
from .errors import ConfigError, DataError, LexmapError, ProviderError
from .thematic import (
    FACTORS,
    FactorAssignment,
    FactorProportions,
    SeedSentence,
    factor_proportions,
    generate_seeds,
    load_seed_bank,
    map_segments,
)
from .anchored_eval import (
    AnchoredEntity,
    EvalReport,
    LexiconMatcher,
    ScoreMatrix,
    extract_anchored_entities,
    normalized_scores,
    score_matrix,
)
from .trendmodel import (
    CoefficientCell,
    DEFAULT_BUCKETS,
    GlmFit,
    GlmOptions,
    YearBucket,
    assemble_design,
    fit_bucket_models,
    fit_logit,
    rank_pairs,
    standardize_coefficients,
)
from .alignment import AlignmentScore, CategoryReport, alignment_score, category_report

__all__ = [
    "ActCitation",
    "AlignmentScore",
    "AnchoredEntity",
    "CategoryReport",
    "CoefficientCell",
    "Complaint",
    "ConfigError",
    "CorpusStats",
    "DEFAULT_BUCKETS",
    "DataError",
    "EvalReport",
    "FACTORS",
    "FactorAssignment",
    "FactorProportions",
    "GlmFit",
    "GlmOptions",
    "LexiconMatcher",
    "LexmapError",
    "ProviderConfig",
    "ProviderError",
    "ScoreMatrix",
    "SeedSentence",
    "Segment",
    "VectorCache",
    "YearBucket",
    "alignment_score",
    "assemble_design",
    "category_report",
    "corpus_stats",
    "distance",
    "embed_texts",
    "extract_act_citations",
    "extract_anchored_entities",
    "factor_proportions",
    "fit_bucket_models",
    "fit_logit",
    "generate_seeds",
    "load_corpus",
    "load_seed_bank",
    "map_segments",
    "normalized_scores",
    "parse_complaint",
    "rank_pairs",
    "save_corpus",
    "score_matrix",
    "standardize_coefficients",
]
