"""End-to-end orchestration with content-hash stage markers and a run manifest.

Stages run in order (ingest, stats, embed, map, proportions, eval, fit,
align, report); each writes its outputs under the configured output
directory plus a marker keyed by the hashes of everything it consumed. A
rerun skips stages whose marker still matches, so interrupted runs resume
and unchanged inputs reproduce outputs byte for byte. The manifest
records input hashes, provider identities and output hashes; with
deterministic providers it is itself deterministic.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .alignment import category_report, score_cases
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
from .errors import ConfigError
from .reports import (
    default_act_descriptions,
    read_categories_csv,
    read_cells_csv,
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
from .thematic import factor_proportions, load_seed_bank, map_segments
from .trendmodel import (
    DEFAULT_BUCKETS,
    GlmOptions,
    absent_cells,
    fit_bucket_models,
    standardize_coefficients,
)

logger = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    corpus: str | None = None
    input_dir: str | None = None
    seed_bank: str = ""
    output_dir: str = "out"
    cache_dir: str = ".lexmap-cache"
    anchors: str | None = None
    act_descriptions: str | None = None
    distance: str = "cosine"
    seed_count: int = 100
    seed_length_limit: int = 106
    encoder: dict = field(default_factory=dict)
    generator: dict | None = None
    extractor: dict = field(default_factory=lambda: {"kind": "lexicon"})
    glm: dict = field(default_factory=dict)
    excluded_acts: list = field(default_factory=list)
    clamp_negative: bool = False

    @classmethod
    def from_file(cls, path):
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}")
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"{path}: unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    def validate(self):
        if bool(self.corpus) == bool(self.input_dir):
            raise ConfigError("config needs exactly one of 'corpus' or 'input_dir'")
        for label, path in (
            ("corpus", self.corpus),
            ("input_dir", self.input_dir),
            ("seed_bank", self.seed_bank or None),
            ("anchors", self.anchors),
            ("act_descriptions", self.act_descriptions),
        ):
            if path is not None and not Path(path).exists():
                raise ConfigError(f"{label} path does not exist: {path}")
        if not self.seed_bank:
            raise ConfigError("config needs a seed_bank path")
        if not self.encoder:
            raise ConfigError("config needs an encoder provider")
        self.encoder_config()
        self.glm_options()

    def encoder_config(self):
        return ProviderConfig.from_dict(self.encoder)

    def glm_options(self):
        known = set(GlmOptions.__dataclass_fields__)
        unknown = set(self.glm) - known
        if unknown:
            raise ConfigError(f"unknown glm option keys: {sorted(unknown)}")
        return GlmOptions(**self.glm)


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _key_of(parts):
    return hashlib.sha256(
        json.dumps(parts, sort_keys=True, ensure_ascii=False).encode("utf-8")
    ).hexdigest()


class StageRunner:
    """Runs stages once per input fingerprint; markers live in .stages/."""

    def __init__(self, out_dir, force=False):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.marker_dir = self.out_dir / ".stages"
        self.marker_dir.mkdir(exist_ok=True)
        self.force = force

    def run(self, name, key_parts, outputs, fn):
        key = _key_of(key_parts)
        marker = self.marker_dir / f"{name}.json"
        if not self.force and marker.exists():
            recorded = json.loads(marker.read_text(encoding="utf-8"))
            if recorded.get("key") == key and all(
                (self.out_dir / out).exists() for out in outputs
            ):
                logger.info("stage %-11s up to date, skipped", name)
                return False
        logger.info("stage %-11s running", name)
        fn()
        marker.write_text(json.dumps({"key": key, "outputs": outputs}), encoding="utf-8")
        return True


def make_extractor(cfg, anchors):
    kind = cfg.extractor.get("kind", "lexicon")
    if kind == "lexicon":
        return LexiconMatcher(anchors)
    if kind == "remote":
        return RemoteNerExtractor(
            anchors,
            model_id=cfg.extractor.get("model_id", "ner"),
            endpoint=cfg.extractor["endpoint"],
            api_key_env=cfg.extractor.get("api_key_env"),
        )
    raise ConfigError(f"unknown extractor kind: {kind!r}")


def run_pipeline(cfg, force=False):
    """Execute every stage and return the manifest (also written to disk)."""
    cfg.validate()
    out_dir = Path(cfg.output_dir)
    runner = StageRunner(out_dir, force=force)
    encoder_cfg = cfg.encoder_config()
    glm_opts = cfg.glm_options()
    cache = VectorCache(cfg.cache_dir)

    # -- ingest ------------------------------------------------------------
    corpus_path = out_dir / "corpus.jsonl"
    if cfg.input_dir:
        runner.run(
            "ingest",
            {"input_dir_files": _dir_fingerprint(cfg.input_dir)},
            ["corpus.jsonl"],
            lambda: save_corpus(ingest_directory(cfg.input_dir), corpus_path),
        )
    else:
        corpus_path = Path(cfg.corpus)
    corpus_hash = file_sha256(corpus_path)
    seed_hash = file_sha256(cfg.seed_bank)
    corpus = load_corpus(corpus_path)

    # -- stats ---------------------------------------------------------------
    runner.run(
        "stats",
        {"corpus": corpus_hash},
        ["stats.json"],
        lambda: write_json(corpus_stats(corpus).as_dict(), out_dir / "stats.json"),
    )

    # -- embed (cache warm) ----------------------------------------------
    def _embed():
        texts = [seg.text for case in corpus for seg in case.segments]
        embed_texts(texts, encoder_cfg, cache=cache)
        write_json({"segments_embedded": len(texts)}, out_dir / "embed.json")

    runner.run(
        "embed",
        {"corpus": corpus_hash, "encoder": cfg.encoder},
        ["embed.json"],
        _embed,
    )

    # -- map ---------------------------------------------------------------
    map_key = {
        "corpus": corpus_hash,
        "seeds": seed_hash,
        "encoder": cfg.encoder,
        "distance": cfg.distance,
    }

    def _map():
        bank = load_seed_bank(cfg.seed_bank)
        assignments = map_segments(corpus, bank, encoder_cfg, cache=cache, metric=cfg.distance)
        write_assignments(assignments, out_dir / "assignments.jsonl")

    runner.run("map", map_key, ["assignments.jsonl"], _map)
    from .reports import read_assignments

    assignments = read_assignments(out_dir / "assignments.jsonl")

    # -- proportions ---------------------------------------------------------
    runner.run(
        "proportions",
        {"map": map_key},
        ["props.jsonl"],
        lambda: write_proportions(factor_proportions(assignments, corpus), out_dir / "props.jsonl"),
    )
    from .reports import read_proportions

    proportions = read_proportions(out_dir / "props.jsonl")

    # -- eval (optional) ----------------------------------------------------
    if cfg.anchors:
        anchors_hash = file_sha256(cfg.anchors)

        def _eval():
            anchors = load_anchors(cfg.anchors)
            extractor = make_extractor(cfg, anchors)
            entities = extract_anchored_entities(corpus, assignments, extractor)
            sc = score_matrix(entities, assignments)
            report = normalized_scores(
                sc,
                provider_ids=(
                    encoder_cfg.model_id,
                    (cfg.generator or {}).get("model_id", ""),
                    extractor.model_id,
                ),
            )
            doc = report.as_dict()
            doc["row"] = render_eval_row(report)
            write_json(doc, out_dir / "eval.json")

        runner.run(
            "eval",
            {"map": map_key, "anchors": anchors_hash, "extractor": cfg.extractor},
            ["eval.json"],
            _eval,
        )

    # -- fit -----------------------------------------------------------------
    fit_key = {"map": map_key, "glm": cfg.glm}

    def _fit():
        acts_per_case = {p.case_id: set(p.acts) for p in proportions}
        fits, absent = fit_bucket_models(proportions, acts_per_case, glm_opts)
        cells = []
        for bucket in DEFAULT_BUCKETS:
            bucket_fits = [f for f in fits if f.bucket == bucket.label]
            if bucket_fits:
                cells.extend(standardize_coefficients(bucket_fits, glm_opts))
        cells.extend(absent_cells(absent))
        cells.sort(key=lambda c: (c.act, c.factor, c.bucket))
        write_cells_csv(cells, out_dir / "cells.csv")

    runner.run("fit", fit_key, ["cells.csv"], _fit)
    cells = read_cells_csv(out_dir / "cells.csv")

    # -- align ----------------------------------------------------------------
    def _align():
        from .alignment import build_surface

        surface = build_surface(cells)
        scores = score_cases(proportions, surface, clamp_negative=cfg.clamp_negative)
        write_scores(scores, out_dir / "scores.jsonl")
        acts_by_case = {p.case_id: list(p.acts) for p in proportions}
        write_categories_csv(
            category_report(scores, cells, acts_by_case), out_dir / "categories.csv"
        )

    runner.run(
        "align",
        {"fit": fit_key, "clamp_negative": cfg.clamp_negative},
        ["scores.jsonl", "categories.csv"],
        _align,
    )

    # -- report ---------------------------------------------------------------
    def _report():
        descriptions = (
            json.loads(Path(cfg.act_descriptions).read_text(encoding="utf-8"))
            if cfg.act_descriptions
            else default_act_descriptions()
        )
        (out_dir / "table3.md").write_text(
            render_trend_table(cells, excluded_acts=cfg.excluded_acts),
            encoding="utf-8",
        )
        (out_dir / "table4.md").write_text(
            render_category_table(read_categories_csv(out_dir / "categories.csv"), descriptions),
            encoding="utf-8",
        )

    runner.run(
        "report",
        {"fit": fit_key, "excluded": sorted(cfg.excluded_acts), "clamp": cfg.clamp_negative},
        ["table3.md", "table4.md"],
        _report,
    )

    # -- manifest ---------------------------------------------------------------
    outputs = ["stats.json", "assignments.jsonl", "props.jsonl", "cells.csv",
               "scores.jsonl", "categories.csv", "table3.md", "table4.md"]
    if cfg.input_dir:
        outputs.insert(0, "corpus.jsonl")
    if cfg.anchors:
        outputs.append("eval.json")
    manifest = {
        "version": __version__,
        "inputs": {
            "corpus": corpus_hash,
            "seed_bank": seed_hash,
            "anchors": file_sha256(cfg.anchors) if cfg.anchors else None,
        },
        "providers": {
            "encoder": {
                "kind": encoder_cfg.provider_kind,
                "model_id": encoder_cfg.model_id,
                "dim": encoder_cfg.dim,
            },
            "extractor": cfg.extractor,
            "generator": (cfg.generator or {}).get("model_id"),
        },
        "settings": {
            "distance": cfg.distance,
            "glm": cfg.glm,
            "excluded_acts": sorted(cfg.excluded_acts),
            "clamp_negative": cfg.clamp_negative,
        },
        "outputs": {name: file_sha256(out_dir / name) for name in outputs},
    }
    write_json(manifest, out_dir / "manifest.json")
    logger.info("pipeline complete: %s", out_dir / "manifest.json")
    return manifest


def _dir_fingerprint(path):
    return {
        p.name: file_sha256(p)
        for p in sorted(Path(path).iterdir())
        if p.is_file() and p.suffix in (".txt", ".json")
    }
