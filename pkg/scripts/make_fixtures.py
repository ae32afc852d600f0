#!/usr/bin/env python3
"""Regenerate the committed test fixtures and the golden pipeline snapshot.

Deterministic by construction (fixed RNG seed, deterministic embedding
provider). Run from the repository root:

    python3 scripts/make_fixtures.py

Outputs:
    tests/data/parser_fixture/   five documents + metadata + expectations
    tests/data/synthetic/        corpus dir, seed bank, anchors, config
    tests/data/golden/           pipeline outputs frozen for the acceptance suite

The script refuses to freeze a snapshot unless the synthetic corpus maps
100% of segments to their construction factors and every case scores.
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"
sys.path.insert(0, str(ROOT / "src"))

from lexmap.corpus import ingest_directory  # noqa: E402
from lexmap.embedding import ProviderConfig, VectorCache  # noqa: E402
from lexmap.pipeline import PipelineConfig, run_pipeline  # noqa: E402
from lexmap.thematic import load_seed_bank, map_segments  # noqa: E402

VOCAB = {
    0: ["defrauded", "investor", "losses", "restitution", "embezzled", "victims",
        "harmed", "deceit", "bribery", "kickback", "misused", "accounting"],
    1: ["unregistered", "registration", "exemption", "filings", "compliance",
        "disclosure", "prospectus", "licensing", "broker", "dealer", "registrant",
        "statements"],
    2: ["touted", "promotion", "endorsement", "hype", "influencer", "advertised",
        "misleading", "exaggerated", "promises", "celebrity", "tweets", "marketing"],
    3: ["million", "billion", "proceeds", "worldwide", "thousands", "scale",
        "operations", "global", "volume", "raised", "customers", "jurisdictions"],
    4: ["blockchain", "protocol", "exploit", "breach", "vulnerability", "outage",
        "wallet", "hack", "smartcontract", "node", "ledger", "cryptographic"],
    5: ["founder", "executive", "officer", "director", "insider", "principal",
        "chairman", "cofounder", "manager", "controlling", "figurehead",
        "leadership"],
}

PRIMARY_ACT = {
    0: "Section 17(a) of the Securities Act",
    1: "Section 13(a) of the Exchange Act",
    2: "Section 206(4) of the Advisers Act",
    3: "Section 5(a) of the Securities Act",
    4: "Section 15(b) of the Exchange Act",
    5: "Section 20(a) of the Exchange Act",
}
ENFORCEMENT_ACT = "Section 21(d) of the Exchange Act"

CATEGORIES = [
    "Crypto Assets",
    "Account Intrusions",
    "Hacking/Insider Trading",
    "Market Manipulation",
    "Regulated Entities",
    "Public Company Disclosure and Controls",
    "Trading Suspensions",
]

BUCKET_YEARS = [
    [2013, 2014, 2015, 2016, 2012],
    [2017] * 5,
    [2018] * 5,
    [2019] * 5,
    [2020] * 5,
    [2021] * 5,
    [2022] * 5,
    [2023, 2024, 2023, 2024, 2023],
]

SEEDS_PER_FACTOR = 3
SEGMENTS_PER_CASE = 10
ENCODER = {"provider_kind": "deterministic-test", "model_id": "hash-1024", "dim": 1024}


def check_vocab_disjoint():
    seen = {}
    for fid, words in VOCAB.items():
        for w in words:
            assert w not in seen, f"token {w!r} in factors {seen[w]} and {fid}"
            seen[w] = fid


def build_seed_bank(rng):
    seeds = []
    for fid, words in VOCAB.items():
        for k in range(SEEDS_PER_FACTOR):
            picked = list(rng.permutation(words))[:10]
            seeds.append({"factor_id": fid, "text": " ".join(picked)})
    return seeds


def segment_text(rng, fid):
    words = VOCAB[fid]
    count = int(rng.integers(6, 11))
    return " ".join(rng.choice(words, size=count, replace=True))


def build_synthetic(rng, seeds):
    """40 cases, 5 per bucket; case 0 of each bucket embeds a verbatim seed."""
    corpus_dir = DATA / "synthetic" / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    for old in corpus_dir.glob("*"):
        old.unlink()

    metadata = {}
    seed_texts = {fid: [s["text"] for s in seeds if s["factor_id"] == fid] for fid in VOCAB}
    case_no = 0
    for b, years in enumerate(BUCKET_YEARS):
        act1 = PRIMARY_ACT[b % 6]
        act2 = PRIMARY_ACT[(b + 1) % 6]
        citations = [
            [act1, ENFORCEMENT_ACT],
            [act1, ENFORCEMENT_ACT],
            [act1, act2, ENFORCEMENT_ACT],
            [act2, ENFORCEMENT_ACT],
            [act2],
        ]
        for i in range(5):
            dominant = (b + i) % 6
            case_id = f"case-{b}-{i}"
            name = VOCAB[dominant][i % 12].capitalize()
            title = f"SEC v. {name} Holdings {case_no}"

            factors = [dominant] * 6 + [
                int(rng.integers(0, 6)) for _ in range(SEGMENTS_PER_CASE - 6)
            ]
            rng.shuffle(factors)
            texts = [segment_text(rng, f) for f in factors]
            if i == 0:
                texts[0] = seed_texts[dominant][0]
                factors[0] = dominant

            cited = " and ".join(citations[i])
            preamble = (
                "UNITED STATES DISTRICT COURT\n"
                f"{title}\n"
                f"Civil Action No. {2000 + case_no}\n"
                f"Plaintiff alleges violations of {cited}.\n"
            )
            body = "\n".join(f"{k}. {t}" for k, t in enumerate(texts, start=1))
            (corpus_dir / f"{case_id}.txt").write_text(preamble + body + "\n", encoding="utf-8")
            metadata[case_id] = {
                "case_id": case_id,
                "title": title,
                "date_filed": f"{years[i]}-{(i * 2 + 1):02d}-{(5 + i * 3):02d}",
                "category": CATEGORIES[case_no % 7],
            }
            case_no += 1

    (corpus_dir / "metadata.json").write_text(
        json.dumps(metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return corpus_dir


def build_anchors():
    anchors = {}
    for fid, words in VOCAB.items():
        anchors[str(fid)] = [
            {"phrase": words[0], "weight": 1.0},
            {"phrase": words[1], "weight": 0.9},
        ]
    path = DATA / "synthetic" / "anchors.json"
    path.write_text(json.dumps(anchors, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def build_parser_fixture(rng):
    fixture = DATA / "parser_fixture"
    fixture.mkdir(parents=True, exist_ok=True)
    for old in fixture.glob("*"):
        old.unlink()
    expected = {}

    # 400 indexed paragraphs behind a caption page
    lines = [
        "UNITED STATES DISTRICT COURT",
        "SEC v. Ripple Like Labs",
        "The Commission alleges violations of Sections 5(a) and 5(c) of the Securities Act.",
    ]
    for k in range(1, 401):
        filler = " ".join(rng.choice(VOCAB[k % 6], size=8, replace=True))
        lines.append(f"{k}. Paragraph about {filler}.")
    (fixture / "ripple_like.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    expected["ripple_like"] = {
        "segments": 400,
        "first_index": 1,
        "last_index": 400,
        "acts": [
            "Section 5(a) of the Securities Act",
            "Section 5(c) of the Securities Act",
        ],
    }

    (fixture / "preamble_doc.txt").write_text(
        "Caption page with court header\nCase No. 21-1234\n"
        "1. First allegation text.\n2. Second allegation text.\n3. Third allegation text.\n",
        encoding="utf-8",
    )
    expected["preamble_doc"] = {"segments": 3, "indices": [1, 2, 3], "acts": []}

    (fixture / "no_markers.txt").write_text(
        "A short notice document with no numbered paragraphs at all, "
        "kept as a single block of text.\n",
        encoding="utf-8",
    )
    expected["no_markers"] = {"segments": 1, "indices": [1], "acts": []}

    (fixture / "nonmono.txt").write_text(
        "1. Opening allegation.\n5. Later paragraph after a gap.\n"
        "2. stray page number line\n7. Final paragraph.\n",
        encoding="utf-8",
    )
    expected["nonmono"] = {"segments": 3, "indices": [1, 5, 7], "acts": []}

    (fixture / "citations_doc.txt").write_text(
        "SEC v. Citation Heavy Corp\n"
        "1. Defendants violated Section 10(b) of the Exchange Act.\n"
        "2. They also violated Sections 5(a) and 5(c) of the Securities Act.\n"
        "3. Relief is sought under Section 21(d) of the Exchange Act.\n"
        "4. Further violations of Section 206(4) of the Investment Advisers Act of 1940.\n",
        encoding="utf-8",
    )
    expected["citations_doc"] = {
        "segments": 4,
        "indices": [1, 2, 3, 4],
        "acts": [
            "Section 10(b) of the Exchange Act",
            "Section 5(a) of the Securities Act",
            "Section 5(c) of the Securities Act",
            "Section 21(d) of the Exchange Act",
            "Section 206(4) of the Advisers Act",
        ],
    }

    metadata = {
        stem: {
            "case_id": stem,
            "title": f"SEC v. {stem}",
            "date_filed": f"20{14 + n}-04-0{n + 1}",
            "category": CATEGORIES[n % 7],
        }
        for n, stem in enumerate(sorted(expected))
    }
    (fixture / "metadata.json").write_text(
        json.dumps(metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (fixture / "manifest.json").write_text(
        json.dumps(expected, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def verify_mapping(corpus_dir, seeds_path):
    """Every synthetic segment must map to its construction factor."""
    corpus = ingest_directory(corpus_dir)
    bank = load_seed_bank(seeds_path)
    cfg = ProviderConfig.from_dict(ENCODER)
    with tempfile.TemporaryDirectory() as tmp:
        assignments = map_segments(corpus, bank, cfg, cache=VectorCache(tmp))

    text_factor = {}
    for case in corpus:
        for seg in case.segments:
            text_factor[(case.case_id, seg.index)] = seg.text
    token_owner = {w: fid for fid, words in VOCAB.items() for w in words}
    bad = []
    for a in assignments:
        text = text_factor[(a.case_id, a.segment_index)]
        owner = token_owner[text.split()[0]]
        if a.factor != owner:
            bad.append((a.case_id, a.segment_index, owner, a.factor))
    if bad:
        raise SystemExit(f"synthetic corpus does not map cleanly: {bad[:5]} …")
    print(f"mapping verified: {len(assignments)} segments all on construction factors")


def build_golden(config_path):
    golden = DATA / "golden"
    if golden.exists():
        shutil.rmtree(golden)
    golden.mkdir(parents=True)

    with tempfile.TemporaryDirectory() as tmp:
        out_dir = Path(tmp) / "out"
        cfg = PipelineConfig.from_file(config_path)
        cfg.output_dir = str(out_dir)
        cfg.cache_dir = str(Path(tmp) / "cache")
        manifest = run_pipeline(cfg)
        for name in sorted(manifest["outputs"]):
            shutil.copy2(out_dir / name, golden / name)
        shutil.copy2(out_dir / "manifest.json", golden / "manifest.json")
    print(f"golden snapshot frozen: {sorted(p.name for p in golden.iterdir())}")


def main():
    check_vocab_disjoint()
    rng = np.random.default_rng(20240612)

    synth = DATA / "synthetic"
    synth.mkdir(parents=True, exist_ok=True)

    seeds = build_seed_bank(rng)
    seeds_path = synth / "seeds.json"
    seeds_path.write_text(json.dumps(seeds, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    corpus_dir = build_synthetic(rng, seeds)
    anchors_path = build_anchors()
    build_parser_fixture(rng)

    config = {
        "input_dir": "corpus",
        "seed_bank": "seeds.json",
        "anchors": "anchors.json",
        "output_dir": "out",
        "cache_dir": ".cache",
        "distance": "cosine",
        "encoder": ENCODER,
        "extractor": {"kind": "lexicon"},
        "glm": {"ridge": 0.001, "max_iter": 200, "min_positives": 2},
        "excluded_acts": [ENFORCEMENT_ACT],
    }
    config_path = synth / "config.json"
    config_path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    verify_mapping(corpus_dir, seeds_path)

    # golden run uses absolute paths into the fixture tree
    resolved = dict(config)
    resolved["input_dir"] = str(corpus_dir)
    resolved["seed_bank"] = str(seeds_path)
    resolved["anchors"] = str(anchors_path)
    resolved_path = synth / ".config_resolved.json"
    resolved_path.write_text(json.dumps(resolved, indent=2, sort_keys=True), encoding="utf-8")
    try:
        build_golden(resolved_path)
    finally:
        resolved_path.unlink()


if __name__ == "__main__":
    main()
