"""Text embedding: pluggable providers, an on-disk vector cache, and distances.

Three provider kinds share one contract (a batch of texts in, one
fixed-dimension vector per text out, order preserved):

* ``deterministic-test`` — hashes tokens into a count vector and
  L2-normalizes. No model, fully reproducible, identical texts map to
  identical vectors; the backbone of the test suite.
* ``precomputed-file`` — serves vectors from a JSON file keyed by text.
* ``remote-api`` — HTTP POST ``{model, texts[]}`` -> ``{vectors[][]}``
  with batching and retry; credentials come from an env var named in the
  config. Optionally head-truncates each text at a whitespace-token limit
  before sending (encoder context windows; off by default).

Vectors are float32 end to end: the cache stores little-endian float32,
and providers' outputs are cast before first use so cold- and warm-cache
runs are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import tokenize
from .errors import ConfigError, MissingVectorError, ProviderError
from .remote import auth_headers, post_json

logger = logging.getLogger(__name__)

PROVIDER_KINDS = ("remote-api", "precomputed-file", "deterministic-test")


@dataclass
class ProviderConfig:
    """Which encoder produces vectors, and how to reach it."""

    provider_kind: str
    model_id: str
    dim: int
    endpoint: str | None = None
    api_key_env: str | None = None
    vectors_path: str | None = None
    batch_size: int = 64
    max_retries: int = 3
    retry_backoff: float = 0.5
    timeout: float = 30.0
    truncate_tokens: int | None = None

    def __post_init__(self):
        if self.provider_kind not in PROVIDER_KINDS:
            raise ConfigError(f"unknown provider kind: {self.provider_kind!r}")
        if self.dim <= 0:
            raise ConfigError(f"embedding dim must be positive, got {self.dim}")
        if self.provider_kind == "remote-api" and not self.endpoint:
            raise ConfigError("remote-api provider needs an endpoint")
        if self.provider_kind == "precomputed-file" and not self.vectors_path:
            raise ConfigError("precomputed-file provider needs vectors_path")

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown provider config keys: {sorted(unknown)}")
        return cls(**d)


def text_hash(text):
    """Content hash used as the cache key (raw 32-byte sha256 digest)."""
    return hashlib.sha256(text.encode("utf-8")).digest()


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------

class DeterministicHashProvider:
    """Token-count embedding: sha256(token) picks a bucket in [0, dim).

    Verbatim-equal texts produce identical vectors, so they sit at
    distance 0 of each other; a text with no tokens gets a fixed unit
    vector on component 0 to keep norms positive.
    """

    def __init__(self, cfg):
        self.cfg = cfg

    def embed_batch(self, texts):
        dim = self.cfg.dim
        out = np.zeros((len(texts), dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for tok in tokenize(text):
                digest = hashlib.sha256(tok.encode("utf-8")).digest()
                out[row, int.from_bytes(digest[:8], "little") % dim] += 1.0
            norm = math.sqrt(float(np.dot(out[row], out[row])))
            if norm == 0.0:
                out[row, 0] = 1.0
            else:
                out[row] /= norm
        return out.astype(np.float32)


class PrecomputedFileProvider:
    """Vectors from a JSON file: ``{"model_id":…, "dim":…, "vectors": {text: […]}}``."""

    def __init__(self, cfg):
        self.cfg = cfg
        path = Path(cfg.vectors_path)
        if not path.exists():
            raise ConfigError(f"precomputed vectors file not found: {path}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        if doc.get("dim") != cfg.dim:
            raise ConfigError(
                f"precomputed file dim {doc.get('dim')} != configured dim {cfg.dim}"
            )
        self._vectors = doc["vectors"]

    def embed_batch(self, texts):
        rows = []
        for text in texts:
            vec = self._vectors.get(text)
            if vec is None:
                raise MissingVectorError(
                    f"no precomputed vector for text: {text[:60]!r}"
                )
            if len(vec) != self.cfg.dim:
                raise ConfigError("stored vector length != configured dim")
            rows.append(vec)
        return np.asarray(rows, dtype=np.float32)


class RemoteApiProvider:
    """Adapter for an embedding endpoint: POST {model, texts[]} -> {vectors[][]}."""

    def __init__(self, cfg):
        self.cfg = cfg

    def _truncate(self, text):
        limit = self.cfg.truncate_tokens
        if limit is None:
            return text
        toks = text.split()
        if len(toks) <= limit:
            return text
        return " ".join(toks[:limit])

    def embed_batch(self, texts):
        doc = post_json(
            self.cfg.endpoint,
            {"model": self.cfg.model_id, "texts": [self._truncate(t) for t in texts]},
            headers=auth_headers(self.cfg.api_key_env),
            retries=self.cfg.max_retries,
            backoff=self.cfg.retry_backoff,
            timeout=self.cfg.timeout,
        )
        vectors = doc.get("vectors")
        if vectors is None or len(vectors) != len(texts):
            raise ProviderError(
                f"endpoint returned {0 if vectors is None else len(vectors)} vectors "
                f"for {len(texts)} texts"
            )
        arr = np.asarray(vectors, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[1] != self.cfg.dim:
            raise ConfigError(
                f"endpoint returned dim {arr.shape[-1] if arr.ndim == 2 else '?'}"
                f" != configured dim {self.cfg.dim}"
            )
        return arr


def make_provider(cfg):
    if cfg.provider_kind == "deterministic-test":
        return DeterministicHashProvider(cfg)
    if cfg.provider_kind == "precomputed-file":
        return PrecomputedFileProvider(cfg)
    return RemoteApiProvider(cfg)


# ---------------------------------------------------------------------------
# On-disk cache
# ---------------------------------------------------------------------------

class VectorCache:
    """Persistent vector store, one file per model under ``cache_dir``.

    File layout: a JSON header line ``{"model_id":…, "dim":…}`` followed by
    fixed-size records of 32 raw sha256 bytes + dim little-endian float32.
    Reads are lock-free against an in-memory index; writes are serialized
    and appended in one call, so replay is bit-exact across runs.
    """

    def __init__(self, cache_dir):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._by_model = {}

    def _model_path(self, model_id):
        slug = re.sub(r"[^A-Za-z0-9._-]+", "_", model_id) or "model"
        tag = hashlib.sha256(model_id.encode("utf-8")).hexdigest()[:8]
        return self.cache_dir / f"{slug}-{tag}.vec"

    def _load(self, model_id, dim):
        path = self._model_path(model_id)
        table = {}
        if path.exists():
            with open(path, "rb") as fh:
                header = json.loads(fh.readline().decode("utf-8"))
                if header["model_id"] != model_id:
                    raise ConfigError(f"{path}: header model {header['model_id']!r} != {model_id!r}")
                if header["dim"] != dim:
                    raise ConfigError(
                        f"{path}: cached dim {header['dim']} != configured dim {dim}"
                    )
                record = 32 + 4 * dim
                while True:
                    chunk = fh.read(record)
                    if not chunk:
                        break
                    if len(chunk) != record:
                        raise ConfigError(f"{path}: truncated cache record")
                    key = chunk[:32]
                    table[key] = np.frombuffer(chunk[32:], dtype="<f4").copy()
        else:
            with open(path, "wb") as fh:
                fh.write(json.dumps({"model_id": model_id, "dim": dim}).encode("utf-8"))
                fh.write(b"\n")
        self._by_model[model_id] = (dim, table, path)
        return dim, table, path

    def _table(self, model_id, dim):
        entry = self._by_model.get(model_id)
        if entry is None:
            with self._lock:
                entry = self._by_model.get(model_id)
                if entry is None:
                    entry = self._load(model_id, dim)
        if entry[0] != dim:
            raise ConfigError(f"cache for {model_id!r} has dim {entry[0]}, expected {dim}")
        return entry

    def get(self, model_id, dim, key):
        _dim, table, _path = self._table(model_id, dim)
        return table.get(key)

    def put_many(self, model_id, dim, items):
        """Append (key, float32 vector) pairs; a single buffered write."""
        _dim, table, path = self._table(model_id, dim)
        with self._lock:
            buf = bytearray()
            for key, vec in items:
                if key in table:
                    continue
                vec = np.ascontiguousarray(vec, dtype="<f4")
                if vec.shape != (dim,):
                    raise ConfigError(f"vector shape {vec.shape} != ({dim},)")
                table[key] = vec
                buf += key
                buf += vec.tobytes()
            if buf:
                with open(path, "ab") as fh:
                    fh.write(bytes(buf))


def embed_texts(texts, cfg, cache=None):
    """Embed texts in order, reading/writing the cache keyed by content hash.

    Duplicate texts within a call are embedded once. Returns a list of
    float32 arrays (one per input text, all of length ``cfg.dim``).
    """
    if not texts:
        raise ConfigError("embed_texts: no texts given")
    provider = make_provider(cfg)

    keys = [text_hash(t) for t in texts]
    resolved = {}
    if cache is not None:
        for key in keys:
            vec = cache.get(cfg.model_id, cfg.dim, key)
            if vec is not None:
                resolved[key] = vec

    pending_keys = []
    pending_texts = []
    seen = set()
    for key, text in zip(keys, texts):
        if key in resolved or key in seen:
            continue
        seen.add(key)
        pending_keys.append(key)
        pending_texts.append(text)

    if pending_texts:
        batch = max(1, cfg.batch_size)
        fresh = []
        for start in range(0, len(pending_texts), batch):
            arr = provider.embed_batch(pending_texts[start : start + batch])
            arr = np.asarray(arr, dtype=np.float32)
            if arr.shape != (len(pending_texts[start : start + batch]), cfg.dim):
                raise ConfigError(
                    f"provider returned shape {arr.shape}, expected (*, {cfg.dim})"
                )
            if not np.all(np.isfinite(arr)):
                raise ProviderError("provider returned non-finite vector components")
            fresh.append(arr)
        fresh = np.vstack(fresh)
        for key, vec in zip(pending_keys, fresh):
            resolved[key] = vec
        if cache is not None:
            cache.put_many(cfg.model_id, cfg.dim, zip(pending_keys, fresh))

    return [resolved[key] for key in keys]


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

DISTANCE_KINDS = ("cosine", "euclidean")


def _as_vector(v, name):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError(f"{name}: expected a non-empty 1-D vector")
    return arr


def distance(a, b, kind="cosine"):
    """Distance between two embedding vectors.

    Cosine distance is 1 − cos(a,b), computed as ‖a/‖a‖ − b/‖b‖‖²/2 so that
    identical vectors give exactly 0.0. Zero-norm inputs and dimension
    mismatches are errors.
    """
    x = _as_vector(a, "a")
    y = _as_vector(b, "b")
    if x.shape != y.shape:
        raise ConfigError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if kind == "euclidean":
        d = x - y
        return math.sqrt(float(np.dot(d, d)))
    if kind != "cosine":
        raise ConfigError(f"unknown distance kind: {kind!r}")
    nx = math.sqrt(float(np.dot(x, x)))
    ny = math.sqrt(float(np.dot(y, y)))
    if nx == 0.0 or ny == 0.0:
        raise ConfigError("cosine distance undefined for zero-norm vector")
    d = x / nx - y / ny
    return 0.5 * float(np.dot(d, d))
