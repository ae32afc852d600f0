"""IRLS logistic fits, bucket standardization, categorization, ranking."""

from __future__ import annotations

import numpy as np
import pytest

from lexmap.errors import DataError
from lexmap.thematic import FactorProportions
from lexmap.trendmodel import (
    BUCKET_LABELS,
    DEFAULT_BUCKETS,
    DegenerateDesign,
    GlmOptions,
    absent_cells,
    assemble_design,
    bucket_for_year,
    categorize,
    fit_bucket_models,
    fit_logit,
    rank_pairs,
    standardize_coefficients,
)

from oracles import scipy_logit_oracle
from trend_replay_data import TREND_GRID, grid_to_cells


def grid_oracle(X, y, ridge, beta0_range=(-20.0, 5.0), beta1_range=(-5.0, 30.0)):
    """Dense 2-D grid search with iterative refinement (1-D designs only)."""
    X1 = np.hstack([np.ones((X.shape[0], 1)), X])

    def loglik(b0, b1):
        eta = X1 @ np.array([b0, b1])
        return np.sum(y * eta - np.logaddexp(0, eta)) - 0.5 * ridge * (b0 * b0 + b1 * b1)

    lo0, hi0 = beta0_range
    lo1, hi1 = beta1_range
    step = 0.5
    best = (0.0, 0.0)
    for _ in range(7):
        g0 = np.arange(lo0, hi0 + step, step)
        g1 = np.arange(lo1, hi1 + step, step)
        values = np.array([[loglik(b0, b1) for b1 in g1] for b0 in g0])
        i, j = np.unravel_index(np.argmax(values), values.shape)
        best = (g0[i], g1[j])
        lo0, hi0 = best[0] - 2 * step, best[0] + 2 * step
        lo1, hi1 = best[1] - 2 * step, best[1] + 2 * step
        step /= 10
    return np.array(best)


def make_props(rows):
    """rows: (case_id, year, p-vector) triples."""
    return [
        FactorProportions(case_id=cid, p=np.asarray(p, dtype=float), year=year)
        for cid, year, p in rows
    ]


class TestBuckets:
    def test_eight_buckets_cover_2012_2024(self):
        assert BUCKET_LABELS == (
            "2012-2016", "2017", "2018", "2019", "2020", "2021", "2022", "2023+",
        )
        for year in range(2012, 2025):
            assert year in bucket_for_year(year)

    def test_merges(self):
        assert bucket_for_year(2013).label == "2012-2016"
        assert bucket_for_year(2024).label == "2023+"

    def test_unmapped_year_rejected(self):
        with pytest.raises(DataError):
            bucket_for_year(2011)


class TestAssembleDesign:
    def test_membership(self):
        props = make_props([(f"c{i}", 2020, [1 / 6] * 6) for i in range(5)])
        acts = {"c0": {"A"}, "c1": {"A"}, "c2": set(), "c3": set(), "c4": set()}
        X, y = assemble_design(props, acts, "A", bucket_for_year(2020))
        assert X.shape == (5, 6)
        assert y.sum() == 2

    def test_constant_response_degenerate(self):
        props = make_props([(f"c{i}", 2020, [1 / 6] * 6) for i in range(4)])
        acts = {f"c{i}": {"A"} for i in range(4)}
        with pytest.raises(DegenerateDesign):
            assemble_design(props, acts, "A", bucket_for_year(2020))

    def test_too_few_observations_degenerate(self):
        props = make_props([("c0", 2020, [1 / 6] * 6), ("c1", 2020, [1 / 6] * 6)])
        with pytest.raises(DegenerateDesign):
            assemble_design(props, {"c0": {"A"}}, "A", bucket_for_year(2020))

    def test_hand_built_matrices(self):
        p0 = [0.5, 0.5, 0, 0, 0, 0]
        p1 = [0, 0, 1, 0, 0, 0]
        props = make_props([("a", 2019, p0), ("b", 2019, p1), ("c", 2019, p0), ("d", 2018, p1)])
        acts = {"a": {"A"}, "b": set(), "c": {"A"}, "d": {"A"}}
        X, y = assemble_design(props, acts, "A", bucket_for_year(2019))
        np.testing.assert_array_equal(X, np.array([p0, p1, p0]))
        np.testing.assert_array_equal(y, [1, 0, 1])


class TestFitLogit:
    def test_null_model_recovers_base_rate(self):
        X = np.full((8, 6), 1 / 6)
        y = np.array([0, 1, 0, 1, 0, 1, 0, 1], dtype=float)
        fit = fit_logit(X, y)
        assert fit.converged
        assert fit.beta0 == pytest.approx(0.0, abs=1e-6)
        np.testing.assert_allclose(fit.betas, 0.0, atol=1e-6)

    def test_one_dimensional_toy_against_grid_oracle(self):
        X = np.array([[0.0], [0.0], [1.0], [1.0]])
        y = np.array([0.0, 0.0, 1.0, 1.0])
        opts = GlmOptions(ridge=1e-4, max_iter=500)
        fit = fit_logit(X, y, opts)
        assert fit.betas[0] > 4.0
        want = grid_oracle(X, y, 1e-4)
        assert fit.beta0 == pytest.approx(want[0], abs=1e-3)
        assert fit.betas[0] == pytest.approx(want[1], abs=1e-3)

    def test_random_instances_match_scipy_oracle(self):
        rng = np.random.default_rng(77)
        for trial in range(5):
            n = 20
            X = rng.dirichlet(np.ones(6), size=n)
            logits = 3.0 * X[:, 0] - 2.5 * X[:, 1] + rng.normal(0, 0.3, size=n)
            y = (rng.uniform(size=n) < 1 / (1 + np.exp(-logits))).astype(float)
            if y.min() == y.max():
                continue
            opts = GlmOptions(ridge=1e-3, tol=1e-10, max_iter=200)
            fit = fit_logit(X, y, opts)
            want = scipy_logit_oracle(X, y, fit.ridge)
            got = np.concatenate([[fit.beta0], fit.betas])
            np.testing.assert_allclose(got, want, atol=1e-6)

    def test_loglik_trace_is_monotone(self):
        rng = np.random.default_rng(5)
        X = rng.dirichlet(np.ones(6), size=15)
        y = (rng.uniform(size=15) < 0.4).astype(float)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        trace = []
        fit_logit(X, y, GlmOptions(ridge=1e-4), trace=trace)
        diffs = np.diff(trace)
        assert np.all(diffs >= 0)

    def test_first_order_optimality_at_convergence(self):
        rng = np.random.default_rng(8)
        X = rng.dirichlet(np.ones(6), size=12)
        y = np.array([1, 0] * 6, dtype=float)
        opts = GlmOptions(ridge=1e-5)
        fit = fit_logit(X, y, opts)
        assert fit.converged
        X1 = np.hstack([np.ones((12, 1)), X])
        beta = np.concatenate([[fit.beta0], fit.betas])
        mu = 1 / (1 + np.exp(-X1 @ beta))
        grad = X1.T @ (y - mu) - fit.ridge * beta
        assert np.max(np.abs(grad)) <= opts.tol

    def test_separation_escalates_ridge(self):
        # perfectly separable and steep: tiny ridge diverges first
        X = np.array([[0.0], [0.0], [0.0], [1.0], [1.0], [1.0]]) * 100
        y = np.array([0.0, 0, 0, 1, 1, 1])
        opts = GlmOptions(ridge=1e-10, max_iter=400, ridge_cap=1.0)
        fit = fit_logit(X, y, opts)
        assert fit.ridge >= 1e-10
        assert np.isfinite(fit.betas).all()

    def test_non_finite_design_rejected(self):
        with pytest.raises(DataError):
            fit_logit(np.array([[np.nan]] * 4), np.array([0, 1, 0, 1.0]))

    def test_non_binary_response_rejected(self):
        with pytest.raises(DataError):
            fit_logit(np.ones((4, 2)), np.array([0.0, 0.5, 1.0, 1.0]))


class TestStandardization:
    def _fits_from_matrix(self, betas_by_act, bucket="2020"):
        from lexmap.trendmodel import GlmFit

        return [
            GlmFit(act=act, bucket=bucket, beta0=0.0, betas=np.asarray(b, dtype=float),
                   converged=True, iterations=3, n_obs=10, ridge=1e-6)
            for act, b in betas_by_act.items()
        ]

    def test_z_scores_closed_form(self):
        # slopes pooled: [1, 2, 3] across three acts (other slots balanced)
        values = [1.0, 2.0, 3.0]
        z = (np.array(values) - 2.0) / np.std(values)
        np.testing.assert_allclose(z, [-1.2247, 0.0, 1.2247], atol=1e-4)

    def test_pooled_mean_zero_variance_one(self):
        rng = np.random.default_rng(4)
        fits = self._fits_from_matrix({f"A{i}": rng.normal(size=6) for i in range(5)})
        cells = standardize_coefficients(fits)
        zs = np.array([c.standardized for c in cells])
        assert zs.mean() == pytest.approx(0.0, abs=1e-12)
        assert zs.std() == pytest.approx(1.0, abs=1e-12)

    def test_category_thresholds(self):
        table = [
            (1.899, "high"), (1.97, "high"), (1.0, "high"), (1.0001, "high"),
            (0.9999, "moderate"), (0.6, "moderate"), (0.5001, "moderate"),
            (0.5, "low"), (0.499, "low"), (0.1, "low"), (0.0, "low"),
            (-0.0001, "excluded-negative"), (-0.2, "excluded-negative"),
            (-1.5, "excluded-negative"), (2.5, "high"), (1.156, "high"),
            (0.75, "moderate"), (0.25, "low"), (-3.0, "excluded-negative"),
            (5.0, "high"),
        ]
        assert len(table) == 20
        for value, want in table:
            assert categorize(value) == want, value

    def test_printed_max_coefficients_all_categorize_high(self):
        for _act, _abbrev, max_coef, _bucket, _codes in TREND_GRID:
            assert categorize(max_coef) == "high"

    def test_zero_variance_degrades_to_low(self, caplog):
        import logging

        fits = self._fits_from_matrix({"A": np.ones(6), "B": np.ones(6)})
        with caplog.at_level(logging.WARNING):
            cells = standardize_coefficients(fits)
        assert all(c.category == "low" for c in cells)

    def test_mixed_buckets_rejected(self):
        fits = self._fits_from_matrix({"A": np.ones(6)}) + self._fits_from_matrix(
            {"B": np.ones(6)}, bucket="2021"
        )
        with pytest.raises(DataError):
            standardize_coefficients(fits)

    def test_category_is_pure_function_of_value(self):
        rng = np.random.default_rng(2)
        fits = self._fits_from_matrix({f"A{i}": rng.normal(size=6) for i in range(4)})
        base = {(c.act, c.factor): c.category for c in standardize_coefficients(fits)}
        shuffled = {(c.act, c.factor): c.category
                    for c in standardize_coefficients(list(reversed(fits)))}
        assert base == shuffled


class TestRanking:
    def test_count_order(self):
        cells = grid_to_cells()
        ranking = rank_pairs(cells)
        assert ranking.pairs[0][2] >= ranking.pairs[1][2] >= ranking.pairs[2][2]

    def test_replayed_grid_reproduces_top_rows(self):
        ranking = rank_pairs(grid_to_cells())
        top3 = [(act, f) for act, f, _hc, _mc, _b in ranking.pairs[:3]]
        assert top3 == [
            ("Section 17(a) of the Securities Act", 0),
            ("Section 10(b) of the Exchange Act", 0),
            ("Section 5 of the Securities Act", 0),
        ]
        # the two six-high pairs outrank everything else; tie broken by max coef
        assert ranking.pairs[0][2] == ranking.pairs[1][2] == 6
        assert ranking.pairs[0][3] == pytest.approx(1.970)

    def test_single_bucket_counts_at_most_one(self):
        cells = [c for c in grid_to_cells() if c.bucket == "2018"]
        ranking = rank_pairs(cells)
        assert all(p[2] in (0, 1) for p in ranking.pairs)

    def test_all_absent_pair_dropped(self):
        cells = absent_cells([("A", "2020")])
        assert rank_pairs(cells).pairs == []


class TestFitBucketModels:
    def test_end_to_end_cells(self):
        rng = np.random.default_rng(10)
        props = []
        acts = {}
        for b, bucket in enumerate(DEFAULT_BUCKETS):
            year = sorted(bucket.years)[0]
            for i in range(6):
                cid = f"b{b}c{i}"
                props.append(FactorProportions(case_id=cid, p=rng.dirichlet(np.ones(6)), year=year))
                acts[cid] = {"Act A"} if i < 3 else set()
                if i % 2 == 0:
                    acts[cid].add("Act B")
        fits, absent = fit_bucket_models(props, acts, GlmOptions(ridge=1e-2, max_iter=200))
        assert fits, "expected at least one fit"
        labels = {f.bucket for f in fits}
        assert labels <= set(BUCKET_LABELS)
        for f in fits:
            assert f.n_obs == 6
        pairs = {(a, b) for a, b in absent}
        assert all(isinstance(a, str) for a, _ in pairs)

    def test_min_positives_marks_absent(self):
        props = make_props([(f"c{i}", 2020, [1 / 6] * 6) for i in range(5)])
        acts = {"c0": {"Rare"}, "c1": set(), "c2": set(), "c3": set(), "c4": set()}
        fits, absent = fit_bucket_models(props, acts, GlmOptions())
        assert not fits
        assert ("Rare", "2020") in absent
