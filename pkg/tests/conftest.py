"""Shared fixtures: tiny in-memory corpora and provider configs."""

from __future__ import annotations

import datetime as dt
from pathlib import Path

import pytest

from lexmap.corpus import Complaint, Segment, extract_act_citations
from lexmap.embedding import ProviderConfig

DATA_DIR = Path(__file__).parent / "data"


def make_complaint(case_id, segment_texts, year=2020, acts_text="", category="Crypto Assets", title=None):
    """Build a Complaint from segment texts; citations parsed from acts_text."""
    raw = (acts_text + "\n" if acts_text else "") + "\n".join(
        f"{i}. {text}" for i, text in enumerate(segment_texts, start=1)
    )
    return Complaint(
        case_id=case_id,
        title=title or f"SEC v. {case_id}",
        date_filed=dt.date(year, 6, 15),
        category=category,
        raw_text=raw,
        segments=[Segment.from_text(i, t) for i, t in enumerate(segment_texts, start=1)],
        acts=extract_act_citations(acts_text),
    )


@pytest.fixture
def hash_cfg():
    return ProviderConfig(provider_kind="deterministic-test", model_id="hash-test", dim=256)


@pytest.fixture
def data_dir():
    return DATA_DIR
