"""Complaint ingestion: numbered-paragraph segmentation, Act citations, corpus stats.

A complaint is a plain-text filing whose body paragraphs are numbered
("1. ...", "2. ..."). Parsing keys off those markers: a marker is a line
that starts with an integer, a period, and whitespace. Marker indices must
be strictly increasing; a non-monotonic marker (page numbers, OCR noise)
is treated as body text of the current segment. Text before the first
marker (caption page, court header) is kept in ``raw_text`` but emitted as
no segment.

The corpus file format is JSONL: one complaint per line with keys
``case_id, title, date_filed, category, raw_text, segments, acts``.
"""

from __future__ import annotations

import datetime as _dt
import json
import logging
import re
import string
from dataclasses import dataclass, field

from .errors import DataError, EmptyCorpusError, InvalidDocumentError

logger = logging.getLogger(__name__)

# Line-anchored paragraph marker: optional indent, integer, ".", whitespace.
_MARKER_RE = re.compile(r"^[ \t]*(\d{1,4})\.(?=[ \t]|$)", re.MULTILINE)

# One statutory citation: "Section(s) <list> of the <Name> Act [of <year>]".
# The list tolerates comma/and/or/& separators, an Oxford comma, and a
# repeated "Section" keyword ("Section 13(a) and Section 12(g) of the …").
_SECTION_TOKEN = r"\d+[a-zA-Z]?(?:\([0-9a-zA-Z]+\))*"
_CITATION_RE = re.compile(
    r"Sections?\s+"
    r"(?P<secs>" + _SECTION_TOKEN
    + r"(?:\s*(?:,|and|or|&)\s*(?:and\s+|or\s+)?(?:Sections?\s+)?" + _SECTION_TOKEN + r")*)"
    r"\s+of\s+the\s+"
    r"(?P<act>[A-Z][A-Za-z'\-]*(?:\s+[A-Z][A-Za-z'\-]*)*?\s+Act)"
    r"(?:\s+of\s+\d{4})?"
)
_SECTION_SPLIT_RE = re.compile(r"\s*(?:,|\band\b|\bor\b|&)\s*")
_SECTION_KEYWORD_RE = re.compile(r"^Sections?\s+")

# Long statutory names normalize to the short names used in reporting.
DEFAULT_ACT_ALIASES = {
    "Securities Exchange Act": "Exchange Act",
    "Investment Advisers Act": "Advisers Act",
    "Investment Company Act": "Investment Company Act",
}

_PUNCT_STRIP = string.punctuation + "“”‘’–—"


def tokenize(text):
    """Lowercase whitespace tokens with surrounding punctuation stripped."""
    out = []
    for tok in text.lower().split():
        tok = tok.strip(_PUNCT_STRIP)
        if tok:
            out.append(tok)
    return out


@dataclass
class Segment:
    """One numbered paragraph of a complaint."""

    index: int
    text: str
    word_count: int = 0

    def __post_init__(self):
        if not self.text:
            raise DataError(f"segment {self.index}: empty text")
        self.word_count = len(self.text.split())

    @classmethod
    def from_text(cls, index, text):
        return cls(index=index, text=text)


@dataclass(frozen=True)
class ActCitation:
    """A statutory section reference, e.g. Section 5(a) of the Securities Act."""

    act_name: str
    section: str

    @property
    def canonical_id(self):
        return f"Section {self.section} of the {self.act_name}"

    @classmethod
    def from_canonical_id(cls, canonical_id):
        m = re.fullmatch(r"Section (\S+) of the (.+)", canonical_id)
        if m is None:
            raise DataError(f"not a canonical act citation: {canonical_id!r}")
        return cls(act_name=m.group(2), section=m.group(1))


@dataclass
class Complaint:
    """One lawsuit filing with metadata, raw text and parsed structure."""

    case_id: str
    title: str
    date_filed: _dt.date
    category: str | None
    raw_text: str
    segments: list[Segment] = field(default_factory=list)
    acts: list[ActCitation] = field(default_factory=list)

    def __post_init__(self):
        indices = [s.index for s in self.segments]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise DataError(f"{self.case_id}: segment indices not strictly increasing")
        seen = {a.canonical_id for a in self.acts}
        if len(seen) != len(self.acts):
            raise DataError(f"{self.case_id}: duplicate act citations")

    @property
    def year(self):
        return self.date_filed.year


@dataclass
class CorpusStats:
    case_count: int
    vocabulary_size: int
    avg_words_per_case: float
    avg_segments_per_case: float
    avg_segment_length: float

    def as_dict(self):
        return {
            "case_count": self.case_count,
            "vocabulary_size": self.vocabulary_size,
            "avg_words_per_case": self.avg_words_per_case,
            "avg_segments_per_case": self.avg_segments_per_case,
            "avg_segment_length": self.avg_segment_length,
        }


def split_segments(raw):
    """Split raw text at paragraph markers.

    Returns ``(preamble, [(index, text), ...])``. A marker whose index is
    not strictly greater than the previous accepted one is body text, not
    a segment boundary. With no markers at all the whole document becomes
    one segment with index 1.
    """
    matches = []
    last_index = 0
    for m in _MARKER_RE.finditer(raw):
        idx = int(m.group(1))
        if idx <= last_index:
            continue
        matches.append((idx, m.start(), m.end()))
        last_index = idx

    if not matches:
        return "", [(1, raw.strip())]

    preamble = raw[: matches[0][1]]
    pieces = []
    for pos, (idx, _start, end) in enumerate(matches):
        next_start = matches[pos + 1][1] if pos + 1 < len(matches) else len(raw)
        pieces.append((idx, raw[end:next_start].strip()))
    return preamble, pieces


def parse_complaint(raw, meta):
    """Parse raw complaint text into a Complaint.

    ``meta`` carries ``case_id``, ``title``, ``date_filed`` (date or ISO
    string) and optional ``category``. Segments come from the marker
    grammar; Act citations are extracted from the full raw text.
    """
    if not raw or not raw.strip():
        raise InvalidDocumentError(f"{meta.get('case_id', '<unknown>')}: empty document")

    date_filed = meta["date_filed"]
    if isinstance(date_filed, str):
        date_filed = _dt.date.fromisoformat(date_filed)

    _preamble, pieces = split_segments(raw)
    segments = [Segment.from_text(idx, text) for idx, text in pieces if text]
    return Complaint(
        case_id=meta["case_id"],
        title=meta.get("title", meta["case_id"]),
        date_filed=date_filed,
        category=meta.get("category"),
        raw_text=raw,
        segments=segments,
        acts=extract_act_citations(raw),
    )


def extract_act_citations(text, aliases=None):
    """Extract deduplicated ActCitations in first-occurrence order.

    Conjunction lists expand ("Sections 5(a) and 5(c) of the Securities
    Act" yields two citations); "Act of 1933"-style year suffixes are
    stripped; long act names collapse to their short aliases.
    """
    if aliases is None:
        aliases = DEFAULT_ACT_ALIASES
    out = []
    seen = set()
    for m in _CITATION_RE.finditer(text):
        act_name = aliases.get(m.group("act"), m.group("act"))
        for sec in _SECTION_SPLIT_RE.split(m.group("secs")):
            sec = _SECTION_KEYWORD_RE.sub("", sec.strip())
            if not sec:
                continue
            cit = ActCitation(act_name=act_name, section=sec)
            if cit.canonical_id not in seen:
                seen.add(cit.canonical_id)
                out.append(cit)
    return out


def corpus_stats(corpus):
    """Corpus-level counts and means (tokenizer: lowercase, punctuation-stripped)."""
    if not corpus:
        raise EmptyCorpusError("corpus_stats: empty corpus")
    vocab = set()
    total_words = 0
    total_segments = 0
    total_segment_words = 0
    for case in corpus:
        tokens = tokenize(case.raw_text)
        vocab.update(tokens)
        total_words += len(tokens)
        total_segments += len(case.segments)
        total_segment_words += sum(s.word_count for s in case.segments)
    n = len(corpus)
    return CorpusStats(
        case_count=n,
        vocabulary_size=len(vocab),
        avg_words_per_case=total_words / n,
        avg_segments_per_case=total_segments / n,
        avg_segment_length=(total_segment_words / total_segments) if total_segments else 0.0,
    )


# ---------------------------------------------------------------------------
# Corpus file I/O (JSONL, one complaint per line)
# ---------------------------------------------------------------------------

def complaint_to_record(case):
    return {
        "case_id": case.case_id,
        "title": case.title,
        "date_filed": case.date_filed.isoformat(),
        "category": case.category,
        "raw_text": case.raw_text,
        "segments": [{"index": s.index, "text": s.text} for s in case.segments],
        "acts": [a.canonical_id for a in case.acts],
    }


def complaint_from_record(rec):
    return Complaint(
        case_id=rec["case_id"],
        title=rec["title"],
        date_filed=_dt.date.fromisoformat(rec["date_filed"]),
        category=rec.get("category"),
        raw_text=rec["raw_text"],
        segments=[Segment.from_text(s["index"], s["text"]) for s in rec["segments"]],
        acts=[ActCitation.from_canonical_id(a) for a in rec["acts"]],
    )


def save_corpus(corpus, path):
    with open(path, "w", encoding="utf-8") as fh:
        for case in corpus:
            fh.write(json.dumps(complaint_to_record(case), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def load_corpus(path):
    corpus = []
    seen_ids = set()
    try:
        fh = open(path, "r", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"corpus file not found: {path}")
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: bad JSON record: {exc}") from exc
            case = complaint_from_record(rec)
            if case.case_id in seen_ids:
                raise DataError(f"{path}:{lineno}: duplicate case_id {case.case_id!r}")
            seen_ids.add(case.case_id)
            corpus.append(case)
    return corpus


def ingest_directory(in_dir):
    """Parse every ``*.txt`` complaint under ``in_dir``.

    Metadata for ``<name>.txt`` is looked up in a ``<name>.json`` sidecar,
    then in a directory-level ``metadata.json`` keyed by stem. A document
    with no resolvable ``date_filed`` is rejected.
    """
    from pathlib import Path

    in_dir = Path(in_dir)
    if not in_dir.is_dir():
        raise DataError(f"not a directory: {in_dir}")
    dir_meta = {}
    meta_path = in_dir / "metadata.json"
    if meta_path.exists():
        dir_meta = json.loads(meta_path.read_text(encoding="utf-8"))

    corpus = []
    for txt in sorted(in_dir.glob("*.txt")):
        stem = txt.stem
        sidecar = txt.with_suffix(".json")
        if sidecar.exists():
            meta = json.loads(sidecar.read_text(encoding="utf-8"))
        elif stem in dir_meta:
            meta = dict(dir_meta[stem])
        else:
            meta = {}
        meta.setdefault("case_id", stem)
        meta.setdefault("title", stem)
        if "date_filed" not in meta:
            raise DataError(f"{txt}: no date_filed in sidecar or metadata.json")
        corpus.append(parse_complaint(txt.read_text(encoding="utf-8"), meta))
    if not corpus:
        raise EmptyCorpusError(f"no *.txt complaints under {in_dir}")
    logger.info("ingested %d complaints from %s", len(corpus), in_dir)
    return corpus
