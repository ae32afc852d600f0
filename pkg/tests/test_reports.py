"""Report rendering and stage-artifact round-trips."""

from __future__ import annotations

import numpy as np
import pytest

from lexmap.alignment import CategoryReport
from lexmap.anchored_eval import normalized_scores
from lexmap.reports import (
    GLYPHS,
    read_assignments,
    read_cells_csv,
    read_proportions,
    render_category_table,
    render_eval_row,
    render_trend_table,
    write_assignments,
    write_cells_csv,
    write_proportions,
)
from lexmap.thematic import FactorAssignment, FactorProportions
from lexmap.trendmodel import BUCKET_LABELS, CoefficientCell

from trend_replay_data import grid_to_cells


class TestTrendTable:
    def test_columns_are_the_eight_bucket_labels_in_order(self):
        table = render_trend_table(grid_to_cells())
        header = table.splitlines()[0]
        cols = [c.strip() for c in header.strip("|").split("|")]
        assert cols[-8:] == list(BUCKET_LABELS)

    def test_glyphs_by_category(self):
        table = render_trend_table(grid_to_cells())
        assert GLYPHS["high"] in table
        assert GLYPHS["moderate"] in table
        assert GLYPHS["low"] in table

    def test_absent_and_excluded_negative_render_blank(self):
        cells = [
            CoefficientCell(act="A", factor=0, bucket=label, raw=-1.0,
                            standardized=-1.0, category="excluded-negative")
            for label in BUCKET_LABELS
        ]
        table = render_trend_table(cells)
        row = table.splitlines()[2]
        glyph_cells = [c.strip() for c in row.strip("|").split("|")][-8:]
        assert glyph_cells == [""] * 8

    def test_empty_cells_gives_header_only(self):
        table = render_trend_table([])
        lines = [line for line in table.splitlines() if line]
        assert len(lines) == 2  # header + separator

    def test_excluded_acts_filtered(self):
        cells = grid_to_cells()
        table = render_trend_table(cells, excluded_acts=["Section 10(b) of the Exchange Act"])
        assert "Section 10(b) of the Exchange Act" not in table

    def test_rows_per_factor_cap(self):
        table = render_trend_table(grid_to_cells(), rows_per_factor=1)
        body = [line for line in table.splitlines()[2:] if line]
        assert len(body) == 6


class TestCategoryTable:
    def test_columns_and_descriptions(self):
        reports = [
            CategoryReport(
                category="Crypto Assets", avg_score=1.477, pct_high=0.662,
                top_pairs=[("Section 5(a) of the Securities Act", 3, 1.816)],
                case_count=10,
            )
        ]
        table = render_category_table(reports)
        assert "| Crypto Assets | 1.477 | 0.662 |" in table
        assert "Scope and Scale of Operations" in table
        assert "registration statement" in table  # description text resolved

    def test_unknown_act_gets_empty_description(self):
        reports = [
            CategoryReport(category="X", avg_score=1.0, pct_high=0.5,
                           top_pairs=[("Section 99 of the Imaginary Act", 0, 2.0)],
                           case_count=1)
        ]
        table = render_category_table(reports, act_descriptions={})
        assert "Imaginary Act" in table


def test_eval_row_shape():
    report = normalized_scores(np.diag([1.0, 2, 3, 4, 5, 6]))
    row = render_eval_row(report)
    assert row.startswith("FM=")
    assert "KI=" in row and "mean=" in row and "±" in row


class TestArtifactRoundTrips:
    def test_assignments(self, tmp_path):
        rows = [FactorAssignment("c", 3, 4, 0.123456789123, 0.5)]
        path = tmp_path / "a.jsonl"
        write_assignments(rows, path)
        (back,) = read_assignments(path)
        assert (back.case_id, back.segment_index, back.factor) == ("c", 3, 4)
        assert back.distance == pytest.approx(0.123456789, abs=1e-9)

    def test_proportions(self, tmp_path):
        rows = [
            FactorProportions(case_id="c", p=np.array([0.5, 0.5, 0, 0, 0, 0]),
                              year=2019, acts=["Section 5 of the Securities Act"],
                              category="Crypto Assets")
        ]
        path = tmp_path / "p.jsonl"
        write_proportions(rows, path)
        (back,) = read_proportions(path)
        np.testing.assert_array_equal(back.p, rows[0].p)
        assert back.acts == rows[0].acts
        assert back.category == "Crypto Assets"

    def test_cells(self, tmp_path):
        cells = grid_to_cells()
        path = tmp_path / "cells.csv"
        write_cells_csv(cells, path)
        back = read_cells_csv(path)
        assert len(back) == len(cells)
        assert back[0].act == cells[0].act
        assert back[0].category == cells[0].category
        got_absent = [c for c in back if c.category == "absent"]
        assert all(c.raw is None and c.standardized is None for c in got_absent)
