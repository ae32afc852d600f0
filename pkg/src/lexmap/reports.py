"""Stage artifacts and report rendering.

Everything written here is deterministic: sorted keys, fixed float
formatting, no timestamps. Mapping diagnostics (distance, runner-up
margin) are rounded to 9 decimals on write; they are not consumed by any
downstream computation.
"""

from __future__ import annotations

import csv
import json
from importlib import resources

from .alignment import CategoryReport
from .errors import DataError
from .thematic import FACTORS, N_FACTORS, FactorAssignment, FactorProportions
from .trendmodel import BUCKET_LABELS, CoefficientCell, rank_pairs

GLYPHS = {"high": "•", "moderate": "◦", "low": "·"}


def default_act_descriptions():
    path = resources.files("lexmap.data").joinpath("act_descriptions.json")
    return json.loads(path.read_text(encoding="utf-8"))


def default_anchors_path():
    return str(resources.files("lexmap.data").joinpath("anchors_default.json"))


# ---------------------------------------------------------------------------
# JSONL / CSV stage artifacts
# ---------------------------------------------------------------------------

def _dump_line(obj):
    return json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n"


def write_assignments(assignments, path):
    with open(path, "w", encoding="utf-8") as fh:
        for a in assignments:
            fh.write(
                _dump_line(
                    {
                        "case_id": a.case_id,
                        "segment_index": a.segment_index,
                        "factor": a.factor,
                        "distance": round(a.distance, 9),
                        "runner_up_margin": round(a.runner_up_margin, 9),
                    }
                )
            )


def read_assignments(path):
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                out.append(
                    FactorAssignment(
                        case_id=rec["case_id"],
                        segment_index=rec["segment_index"],
                        factor=rec["factor"],
                        distance=rec["distance"],
                        runner_up_margin=rec["runner_up_margin"],
                    )
                )
    return out


def write_proportions(proportions, path):
    with open(path, "w", encoding="utf-8") as fh:
        for prop in proportions:
            fh.write(
                _dump_line(
                    {
                        "case_id": prop.case_id,
                        "year": prop.year,
                        "p": [float(x) for x in prop.p],
                        "acts": list(prop.acts),
                        "category": prop.category,
                    }
                )
            )


def read_proportions(path):
    import numpy as np

    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                out.append(
                    FactorProportions(
                        case_id=rec["case_id"],
                        p=np.asarray(rec["p"], dtype=np.float64),
                        year=rec["year"],
                        acts=rec.get("acts", []),
                        category=rec.get("category"),
                    )
                )
    return out


CELL_COLUMNS = ("act", "factor", "bucket", "raw", "standardized", "category")


def write_cells_csv(cells, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CELL_COLUMNS)
        for c in cells:
            writer.writerow(
                [
                    c.act,
                    FACTORS[c.factor].abbrev,
                    c.bucket,
                    "" if c.raw is None else repr(round(c.raw, 9)),
                    "" if c.standardized is None else repr(round(c.standardized, 9)),
                    c.category,
                ]
            )


def read_cells_csv(path):
    from .thematic import FACTOR_BY_ABBREV

    cells = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CELL_COLUMNS:
            raise DataError(f"{path}: expected columns {CELL_COLUMNS}")
        for row in reader:
            cells.append(
                CoefficientCell(
                    act=row["act"],
                    factor=FACTOR_BY_ABBREV[row["factor"]].id,
                    bucket=row["bucket"],
                    raw=float(row["raw"]) if row["raw"] else None,
                    standardized=float(row["standardized"]) if row["standardized"] else None,
                    category=row["category"],
                )
            )
    return cells


def write_scores(scores, path):
    with open(path, "w", encoding="utf-8") as fh:
        for s in scores:
            fh.write(
                _dump_line(
                    {
                        "case_id": s.case_id,
                        "category": s.category,
                        "score": s.score,
                        "bucket": s.bucket,
                    }
                )
            )


def write_categories_csv(reports, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "avg_score", "pct_high", "case_count", "top_pairs"])
        for r in reports:
            pairs = [
                {"act": act, "factor": FACTORS[fid].abbrev, "coef": round(coef, 6)}
                for act, fid, coef in r.top_pairs
            ]
            writer.writerow(
                [
                    r.category,
                    f"{r.avg_score:.6f}",
                    f"{r.pct_high:.6f}",
                    r.case_count,
                    json.dumps(pairs, sort_keys=True),
                ]
            )


def read_categories_csv(path):
    reports = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            pairs = [
                (p["act"], next(f.id for f in FACTORS if f.abbrev == p["factor"]), p["coef"])
                for p in json.loads(row["top_pairs"])
            ]
            reports.append(
                CategoryReport(
                    category=row["category"],
                    avg_score=float(row["avg_score"]),
                    pct_high=float(row["pct_high"]),
                    top_pairs=pairs,
                    case_count=int(row["case_count"]),
                )
            )
    return reports


# ---------------------------------------------------------------------------
# Markdown reports
# ---------------------------------------------------------------------------

def render_trend_table(cells, excluded_acts=(), rows_per_factor=3, bucket_labels=BUCKET_LABELS):
    """The coefficient grid: per factor, the strongest Act rows.

    High cells render •, moderate ◦, low ·; absent and excluded-negative
    cells are blank. Rows within a factor rank by high-bucket count, then
    max standardized coefficient.
    """
    excluded = set(excluded_acts)
    usable = [c for c in cells if c.act not in excluded]
    ranking = rank_pairs(usable)

    by_cell = {(c.act, c.factor, c.bucket): c for c in usable}
    lines = [
        "| Act | Thematic Factor | Max Coef | Max Coef Bucket | " + " | ".join(bucket_labels) + " |",
        "|---|---|---|---|" + "---|" * len(bucket_labels),
    ]
    for factor in range(N_FACTORS):
        rows = [p for p in ranking.pairs if p[1] == factor][:rows_per_factor]
        for act, fid, _high_count, max_coef, max_bucket in rows:
            glyphs = []
            for label in bucket_labels:
                cell = by_cell.get((act, fid, label))
                glyphs.append(GLYPHS.get(cell.category, "") if cell else "")
            lines.append(
                f"| {act} | {FACTORS[fid].name} | {max_coef:.3f} | {max_bucket} | "
                + " | ".join(glyphs)
                + " |"
            )
    return "\n".join(lines) + "\n"


def render_category_table(reports, act_descriptions=None):
    """Per-category alignment summary with the strongest Act-factor pairs."""
    descriptions = act_descriptions if act_descriptions is not None else default_act_descriptions()
    lines = [
        "| Category | Avg. Score | Case pct. | Most Contributive Pairs | Act Description |",
        "|---|---|---|---|---|",
    ]
    for r in reports:
        pair_parts = []
        desc_parts = []
        for act, fid, coef in r.top_pairs:
            pair_parts.append(f"{act}: {FACTORS[fid].name} ({coef:.3f})")
            desc_parts.append(descriptions.get(act, ""))
        lines.append(
            f"| {r.category} | {r.avg_score:.3f} | {r.pct_high:.3f} | "
            + "<br>".join(pair_parts)
            + " | "
            + "<br>".join(desc_parts)
            + " |"
        )
    return "\n".join(lines) + "\n"


def render_eval_row(report):
    """One-line score summary: the six factor scores plus mean and spread."""
    parts = [
        f"{FACTORS[i].abbrev}={report.R[i]:.3f}" for i in range(len(report.R))
    ]
    parts.append(f"mean={report.mean:.3f} ± {report.stdev:.3f}")
    return "  ".join(parts)


def write_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")
