"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one PASS line on success (run with ``pytest -s`` or
``-rP`` to see them); a failed assertion marks the criterion FAIL. The
bundled fixtures live under tests/data/ and were frozen once by
scripts/make_fixtures.py; the golden snapshot under tests/data/golden/ is
the byte-level contract for the end-to-end run.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np
import pytest

from lexmap.alignment import alignment_score
from lexmap.anchored_eval import normalized_scores
from lexmap.cli import main
from lexmap.corpus import extract_act_citations, ingest_directory
from lexmap.embedding import ProviderConfig, VectorCache
from lexmap.thematic import FactorProportions, load_seed_bank, map_segments
from lexmap.trendmodel import BUCKET_LABELS, GlmFit, GlmOptions, categorize, fit_logit, standardize_coefficients

from conftest import DATA_DIR
from oracles import brute_force_r, scipy_logit_oracle
from trend_replay_data import TREND_GRID

SYNTH = DATA_DIR / "synthetic"
GOLDEN = DATA_DIR / "golden"
ENCODER = ProviderConfig(provider_kind="deterministic-test", model_id="hash-1024", dim=1024)


def report(criterion, detail=""):
    print(f"ACCEPTANCE {criterion}: PASS {detail}".rstrip())


def test_criterion_1_parser_exactness():
    """Five-document fixture: segment counts and indices match the manifest."""
    fixture = DATA_DIR / "parser_fixture"
    manifest = json.loads((fixture / "manifest.json").read_text())

    start = time.perf_counter()
    corpus = {c.case_id: c for c in ingest_directory(fixture)}
    elapsed = time.perf_counter() - start

    assert set(corpus) == set(manifest)
    for stem, want in manifest.items():
        got = corpus[stem]
        indices = [s.index for s in got.segments]
        assert len(indices) == want["segments"], stem
        if "indices" in want:
            assert indices == want["indices"], stem
        else:
            assert indices == list(range(want["first_index"], want["last_index"] + 1)), stem
        assert [a.canonical_id for a in got.acts] == want["acts"], stem
    assert elapsed < 1.0, f"parsing took {elapsed:.3f}s"
    report(1, f"(5 documents incl. 400 markers in {elapsed * 1000:.0f} ms)")


def test_criterion_2_act_extraction():
    """The canonical two-citation sentence, then 30/30 fixture sentences."""
    got = [c.canonical_id for c in
           extract_act_citations("Sections 5(a) and 5(c) of the Securities Act")]
    assert got == [
        "Section 5(a) of the Securities Act",
        "Section 5(c) of the Securities Act",
    ]

    fixture = json.loads((DATA_DIR / "citations_30.json").read_text())
    assert len(fixture) == 30
    hits = 0
    for entry in fixture:
        extracted = [c.canonical_id for c in extract_act_citations(entry["text"])]
        assert extracted == entry["expected"], entry["text"]
        hits += 1
    report(2, f"({hits}/30 exact)")


def test_criterion_3_mapping_identity(tmp_path):
    """Verbatim seed copies at distance 0; token-disjoint corpus maps 100%."""
    corpus = ingest_directory(SYNTH / "corpus")
    bank = load_seed_bank(SYNTH / "seeds.json")
    assignments = map_segments(corpus, bank, ENCODER, cache=VectorCache(tmp_path))

    seed_factor_by_text = {s.text: s.factor_id for s in bank}
    segment_text = {
        (c.case_id, s.index): s.text for c in corpus for s in c.segments
    }

    verbatim = 0
    for a in assignments:
        text = segment_text[(a.case_id, a.segment_index)]
        if text in seed_factor_by_text:
            verbatim += 1
            assert a.factor == seed_factor_by_text[text]
            assert a.distance == 0.0
    assert verbatim >= 8, "fixture should contain verbatim seed copies"

    bank_words = {}
    for s in bank:
        for w in s.text.split():
            bank_words[w] = s.factor_id
    correct = sum(
        1
        for a in assignments
        if a.factor == bank_words[segment_text[(a.case_id, a.segment_index)].split()[0]]
    )
    assert correct == len(assignments), f"{correct}/{len(assignments)} on construction factor"
    report(3, f"({verbatim} verbatim copies at 0.0; {correct}/{len(assignments)} mapped)")


def test_criterion_4_evaluation_metric_oracle():
    """Brute-force agreement within 1e-12 on 1000 random matrices; exact edges."""
    rng = np.random.default_rng(20240613)
    worst = 0.0
    for _ in range(1000):
        sc = rng.uniform(0.0, 5.0, size=(6, 6))
        got = normalized_scores(sc).R
        want = brute_force_r(sc)
        worst = max(worst, float(np.max(np.abs(got - want))))
        assert np.all(got >= 0.0) and np.all(got <= 1.0)
    assert worst <= 1e-12, f"max |diff| {worst:.2e}"

    dominant = np.full((6, 6), 0.2)
    dominant[4, 4] = 0.9
    assert normalized_scores(dominant).R[4] == 1.0

    uniform = np.full((6, 6), 0.7)
    assert normalized_scores(uniform).R[2] == 0.0
    report(4, f"(1000 matrices, max deviation {worst:.1e})")


def test_criterion_5_glm_correctness():
    """IRLS vs scipy oracle within 1e-6 on 50 instances; null model; monotone."""
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 50:
        n = int(rng.integers(8, 31))
        X = rng.dirichlet(np.ones(6), size=n)
        beta_true = rng.normal(0, 2, size=6)
        logits = X @ beta_true + rng.normal(0, 0.5, size=n)
        y = (rng.uniform(size=n) < 1 / (1 + np.exp(-logits))).astype(float)
        if y.min() == y.max():
            continue
        opts = GlmOptions(ridge=10 ** rng.uniform(-4, -2), tol=1e-10, max_iter=300)
        trace = []
        fit = fit_logit(X, y, opts, trace=trace)
        want = scipy_logit_oracle(X, y, fit.ridge)
        got = np.concatenate([[fit.beta0], fit.betas])
        np.testing.assert_allclose(got, want, atol=1e-6)
        assert np.all(np.diff(trace) >= 0), "log-likelihood must not decrease"
        checked += 1

    # null model: balanced response, constant design
    X = np.full((10, 6), 1 / 6)
    y = np.array([0.0, 1.0] * 5)
    fit = fit_logit(X, y)
    base_rate = float(np.mean(y))
    assert fit.beta0 == pytest.approx(np.log(base_rate / (1 - base_rate)), abs=1e-6)
    np.testing.assert_allclose(fit.betas, 0.0, atol=1e-6)
    report(5, f"({checked} instances vs oracle, null model, monotone traces)")


def test_criterion_6_standardization_and_categorization():
    """Closed-form z-scores; 20-value threshold table; printed-marks replay."""
    fits = [
        GlmFit(act=f"A{v}", bucket="2020", beta0=0.0, betas=np.full(6, float(v)),
               converged=True, iterations=1, n_obs=9, ridge=1e-6)
        for v in (1, 2, 3)
    ]
    cells = standardize_coefficients(fits)
    by_act = {c.act: c.standardized for c in cells}
    assert by_act["A1"] == pytest.approx(-1.2247, abs=1e-4)
    assert by_act["A2"] == pytest.approx(0.0, abs=1e-4)
    assert by_act["A3"] == pytest.approx(1.2247, abs=1e-4)

    threshold_table = [
        (1.899, "high"), (1.97, "high"), (1.0, "high"), (1.0001, "high"),
        (2.5, "high"), (5.0, "high"), (0.9999, "moderate"), (0.75, "moderate"),
        (0.6, "moderate"), (0.5001, "moderate"), (0.5, "low"), (0.499, "low"),
        (0.25, "low"), (0.1, "low"), (0.0, "low"), (-0.0001, "excluded-negative"),
        (-0.2, "excluded-negative"), (-1.5, "excluded-negative"),
        (-3.0, "excluded-negative"), (1.156, "high"),
    ]
    assert len(threshold_table) == 20
    for value, want in threshold_table:
        assert categorize(value) == want, value

    # replay: every printed max coefficient is high, at its printed bucket
    for act, _abbrev, max_coef, max_bucket, codes in TREND_GRID:
        assert categorize(max_coef) == "high", act
        assert codes[BUCKET_LABELS.index(max_bucket)] == "H", act
    report(6, f"(z-scores, 20 thresholds, {len(TREND_GRID)} replayed rows)")


def test_criterion_7_alignment_identity():
    """Uniform proportions score 1 within 1e-12; coefficient scaling drops out."""
    rng = np.random.default_rng(7)
    surfaces = 0
    while surfaces < 100:
        n_acts = int(rng.integers(1, 5))
        surface = {
            (f"A{i}", "2020"): rng.uniform(-1.0, 3.0, size=6) for i in range(n_acts)
        }
        denom = sum(float(v.sum()) / 6 for v in surface.values())
        if abs(denom) < 0.05:
            continue
        prop = FactorProportions(
            case_id="u", p=np.full(6, 1 / 6), year=2020,
            acts=[f"A{i}" for i in range(n_acts)], category="X",
        )
        score = alignment_score(prop, surface)
        assert score.score == pytest.approx(1.0, abs=1e-12)
        surfaces += 1

    p = rng.dirichlet(np.ones(6))
    coefs = rng.uniform(0.2, 2.0, size=6)
    base_prop = FactorProportions(case_id="c", p=p, year=2020, acts=["A"], category="X")
    base = alignment_score(base_prop, {("A", "2020"): coefs}).score
    for k in (0.1, 10.0):
        scaled = alignment_score(base_prop, {("A", "2020"): k * coefs}).score
        assert scaled == pytest.approx(base, rel=1e-12)
    report(7, "(100 surfaces at 1e-12; k in {0.1, 10} invariant)")


def test_criterion_8_end_to_end_determinism(tmp_path):
    """`lexmap run` reproduces the committed golden snapshot byte for byte."""
    golden_files = {p.name: p.read_bytes() for p in GOLDEN.iterdir()}
    assert golden_files, "golden snapshot missing; run scripts/make_fixtures.py"

    def write_config(out_name):
        cfg = {
            "input_dir": str(SYNTH / "corpus"),
            "seed_bank": str(SYNTH / "seeds.json"),
            "anchors": str(SYNTH / "anchors.json"),
            "output_dir": str(tmp_path / out_name),
            "cache_dir": str(tmp_path / "cache"),
            "distance": "cosine",
            "encoder": {"provider_kind": "deterministic-test", "model_id": "hash-1024", "dim": 1024},
            "extractor": {"kind": "lexicon"},
            "glm": {"ridge": 0.001, "max_iter": 200, "min_positives": 2},
            "excluded_acts": ["Section 21(d) of the Exchange Act"],
        }
        path = tmp_path / f"{out_name}.json"
        path.write_text(json.dumps(cfg))
        return path

    start = time.perf_counter()
    assert main(["run", "--config", str(write_config("run1"))]) == 0
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"pipeline took {elapsed:.2f}s"

    for name, want in golden_files.items():
        got = (tmp_path / "run1" / name).read_bytes()
        assert got == want, f"{name} differs from golden snapshot"

    # second run: fresh output directory, warm vector cache
    assert main(["run", "--config", str(write_config("run2"))]) == 0
    for name, want in golden_files.items():
        got = (tmp_path / "run2" / name).read_bytes()
        assert got == want, f"{name} differs on warm-cache rerun"
    report(8, f"({len(golden_files)} files byte-identical twice, first run {elapsed:.2f}s)")
