"""Command-line entry points for every pipeline stage.

Verbs: ingest, stats, seeds, embed, map, eval, fit, align, report, run.
Exit codes: 0 success, 2 configuration error, 3 provider error, 4 data
error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .alignment import build_surface, category_report, score_cases
from .anchored_eval import (
    LexiconMatcher,
    RemoteNerExtractor,
    extract_anchored_entities,
    load_anchors,
    normalized_scores,
    score_matrix,
)
from .corpus import corpus_stats, ingest_directory, load_corpus, save_corpus
from .embedding import ProviderConfig, VectorCache, embed_texts
from .errors import ConfigError, LexmapError
from .pipeline import PipelineConfig, run_pipeline
from .reports import (
    default_act_descriptions,
    read_assignments,
    read_categories_csv,
    read_cells_csv,
    read_proportions,
    render_category_table,
    render_eval_row,
    render_trend_table,
    write_assignments,
    write_categories_csv,
    write_cells_csv,
    write_json,
    write_proportions,
    write_scores,
)
from .thematic import (
    DeterministicTextGenerator,
    RemoteTextGenerator,
    factor_proportions,
    generate_seeds,
    load_seed_bank,
    map_segments,
    save_seed_bank,
)
from .trendmodel import (
    DEFAULT_BUCKETS,
    GlmOptions,
    absent_cells,
    fit_bucket_models,
    standardize_coefficients,
)

logger = logging.getLogger(__name__)


def _add_provider_args(parser):
    parser.add_argument("--provider", required=True,
                        choices=["remote-api", "precomputed-file", "deterministic-test"])
    parser.add_argument("--model", required=True, help="encoder model id")
    parser.add_argument("--dim", type=int, required=True, help="embedding dimension")
    parser.add_argument("--endpoint", help="remote-api endpoint URL")
    parser.add_argument("--api-key-env", help="env var holding the API key")
    parser.add_argument("--vectors-path", help="precomputed-file vector store")
    parser.add_argument("--batch-size", type=int, default=64)
    parser.add_argument("--cache", default=".lexmap-cache", help="vector cache directory")


def _provider_config(args):
    return ProviderConfig(
        provider_kind=args.provider,
        model_id=args.model,
        dim=args.dim,
        endpoint=args.endpoint,
        api_key_env=args.api_key_env,
        vectors_path=args.vectors_path,
        batch_size=args.batch_size,
    )


def _add_glm_args(parser):
    parser.add_argument("--min-positives", type=int, default=2)
    parser.add_argument("--tol", type=float, default=1e-8)
    parser.add_argument("--max-iter", type=int, default=100)
    parser.add_argument("--ridge", type=float, default=1e-6)
    parser.add_argument("--high-threshold", type=float, default=1.0)
    parser.add_argument("--moderate-threshold", type=float, default=0.5)


def _glm_options(args):
    return GlmOptions(
        tol=args.tol,
        max_iter=args.max_iter,
        ridge=args.ridge,
        min_positives=args.min_positives,
        high_threshold=args.high_threshold,
        moderate_threshold=args.moderate_threshold,
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lexmap",
        description="Complaint corpus to thematic-factor enforcement trends",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a directory of complaint .txt files")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True, help="corpus JSONL to write")

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("corpus")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")

    p = sub.add_parser("seeds", help="generate a seed-sentence bank from the factor prompts")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=100, help="seeds per factor")
    p.add_argument("--length-limit", type=int, default=106, help="max words per seed")
    p.add_argument("--generator-kind", choices=["remote", "deterministic-test"],
                   default="remote")
    p.add_argument("--endpoint")
    p.add_argument("--model", default="generator")
    p.add_argument("--api-key-env")

    p = sub.add_parser("embed", help="warm the vector cache for all corpus segments")
    p.add_argument("corpus")
    _add_provider_args(p)

    p = sub.add_parser("map", help="assign each segment its nearest seed's factor")
    p.add_argument("corpus")
    p.add_argument("--bank", required=True, help="seed bank JSON")
    p.add_argument("--out", required=True, help="assignments JSONL to write")
    p.add_argument("--props", help="also write per-case factor proportions JSONL")
    p.add_argument("--metric", choices=["cosine", "euclidean"], default="cosine")
    _add_provider_args(p)

    p = sub.add_parser("eval", help="anchored-term evaluation of a mapping")
    p.add_argument("--assignments", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--anchors", help="anchor config JSON (default: bundled lexicon)")
    p.add_argument("--extractor", choices=["lexicon", "remote"], default="lexicon")
    p.add_argument("--extractor-endpoint")
    p.add_argument("--extractor-model", default="ner")
    p.add_argument("--api-key-env")
    p.add_argument("--out", help="eval report JSON to write")

    p = sub.add_parser("fit", help="fit per-(Act, bucket) logistic trend models")
    p.add_argument("--proportions", required=True, help="props JSONL from `lexmap map`")
    p.add_argument("--out", required=True, help="coefficient cells CSV to write")
    _add_glm_args(p)

    p = sub.add_parser("align", help="score cases against the fitted surface")
    p.add_argument("--cells", required=True)
    p.add_argument("--proportions", required=True)
    p.add_argument("--out", required=True, help="category report CSV to write")
    p.add_argument("--scores", help="also write per-case scores JSONL")
    p.add_argument("--clamp-negative", action="store_true")

    p = sub.add_parser("report", help="render markdown trend and category tables")
    p.add_argument("--dir", required=True, help="directory holding cells.csv and categories.csv")
    p.add_argument("--excluded-acts", default="", help="comma-separated canonical ids to hide")
    p.add_argument("--act-descriptions", help="JSON of canonical id -> description")
    p.add_argument("--rows-per-factor", type=int, default=3)

    p = sub.add_parser("run", help="run the whole pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--force", action="store_true", help="ignore stage markers")

    return parser


def _cmd_ingest(args):
    corpus = ingest_directory(args.in_dir)
    save_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} complaints to {args.out}")


def _cmd_stats(args):
    stats = corpus_stats(load_corpus(args.corpus))
    if args.json:
        print(json.dumps(stats.as_dict(), sort_keys=True, indent=2))
    else:
        print(f"cases:              {stats.case_count}")
        print(f"vocabulary:         {stats.vocabulary_size}")
        print(f"avg words/case:     {stats.avg_words_per_case:.1f}")
        print(f"avg segments/case:  {stats.avg_segments_per_case:.1f}")
        print(f"avg segment length: {stats.avg_segment_length:.1f}")


def _cmd_seeds(args):
    if args.generator_kind == "remote":
        if not args.endpoint:
            raise ConfigError("seeds --generator-kind remote needs --endpoint")
        generator = RemoteTextGenerator(args.model, args.endpoint, args.api_key_env)
    else:
        generator = DeterministicTextGenerator()
    seeds = generate_seeds(args.count, args.length_limit, generator)
    save_seed_bank(seeds, args.out)
    print(f"wrote {len(seeds)} seeds to {args.out}")


def _cmd_embed(args):
    corpus = load_corpus(args.corpus)
    cache = VectorCache(args.cache)
    texts = [seg.text for case in corpus for seg in case.segments]
    embed_texts(texts, _provider_config(args), cache=cache)
    print(f"embedded {len(texts)} segments into {args.cache}")


def _cmd_map(args):
    corpus = load_corpus(args.corpus)
    bank = load_seed_bank(args.bank)
    cache = VectorCache(args.cache)
    assignments = map_segments(
        corpus, bank, _provider_config(args), cache=cache, metric=args.metric
    )
    write_assignments(assignments, args.out)
    print(f"wrote {len(assignments)} assignments to {args.out}")
    if args.props:
        props = factor_proportions(assignments, corpus)
        write_proportions(props, args.props)
        print(f"wrote {len(props)} proportion records to {args.props}")


def _cmd_eval(args):
    corpus = load_corpus(args.corpus)
    assignments = read_assignments(args.assignments)
    anchors_path = args.anchors
    if not anchors_path:
        from .reports import default_anchors_path

        anchors_path = default_anchors_path()
    anchors = load_anchors(anchors_path)
    if args.extractor == "remote":
        if not args.extractor_endpoint:
            raise ConfigError("eval --extractor remote needs --extractor-endpoint")
        extractor = RemoteNerExtractor(
            anchors, args.extractor_model, args.extractor_endpoint, args.api_key_env
        )
    else:
        extractor = LexiconMatcher(anchors)
    entities = extract_anchored_entities(corpus, assignments, extractor)
    report = normalized_scores(
        score_matrix(entities, assignments),
        provider_ids=("", "", extractor.model_id),
    )
    print(render_eval_row(report))
    if args.out:
        doc = report.as_dict()
        doc["row"] = render_eval_row(report)
        write_json(doc, args.out)


def _cmd_fit(args):
    proportions = read_proportions(args.proportions)
    opts = _glm_options(args)
    acts_per_case = {p.case_id: set(p.acts) for p in proportions}
    fits, absent = fit_bucket_models(proportions, acts_per_case, opts)
    cells = []
    for bucket in DEFAULT_BUCKETS:
        bucket_fits = [f for f in fits if f.bucket == bucket.label]
        if bucket_fits:
            cells.extend(standardize_coefficients(bucket_fits, opts))
    cells.extend(absent_cells(absent))
    cells.sort(key=lambda c: (c.act, c.factor, c.bucket))
    write_cells_csv(cells, args.out)
    print(f"wrote {len(cells)} cells ({len(fits)} fits) to {args.out}")


def _cmd_align(args):
    cells = read_cells_csv(args.cells)
    proportions = read_proportions(args.proportions)
    scores = score_cases(proportions, build_surface(cells), clamp_negative=args.clamp_negative)
    if args.scores:
        write_scores(scores, args.scores)
    acts_by_case = {p.case_id: list(p.acts) for p in proportions}
    reports = category_report(scores, cells, acts_by_case)
    write_categories_csv(reports, args.out)
    print(f"scored {len(scores)} cases across {len(reports)} categories -> {args.out}")


def _cmd_report(args):
    run_dir = Path(args.dir)
    cells = read_cells_csv(run_dir / "cells.csv")
    excluded = [a.strip() for a in args.excluded_acts.split(",") if a.strip()]
    (run_dir / "table3.md").write_text(
        render_trend_table(cells, excluded_acts=excluded, rows_per_factor=args.rows_per_factor),
        encoding="utf-8",
    )
    descriptions = (
        json.loads(Path(args.act_descriptions).read_text(encoding="utf-8"))
        if args.act_descriptions
        else default_act_descriptions()
    )
    categories = read_categories_csv(run_dir / "categories.csv")
    (run_dir / "table4.md").write_text(
        render_category_table(categories, descriptions), encoding="utf-8"
    )
    print(f"wrote {run_dir / 'table3.md'} and {run_dir / 'table4.md'}")


def _cmd_run(args):
    cfg = PipelineConfig.from_file(args.config)
    manifest = run_pipeline(cfg, force=args.force)
    print(f"pipeline complete; {len(manifest['outputs'])} artifacts in {cfg.output_dir}")


_COMMANDS = {
    "ingest": _cmd_ingest,
    "stats": _cmd_stats,
    "seeds": _cmd_seeds,
    "embed": _cmd_embed,
    "map": _cmd_map,
    "eval": _cmd_eval,
    "fit": _cmd_fit,
    "align": _cmd_align,
    "report": _cmd_report,
    "run": _cmd_run,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        _COMMANDS[args.command](args)
    except LexmapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
