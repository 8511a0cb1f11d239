"""Text-to-vector providers and dataset embedding.

Three interchangeable providers map rendered code-comment strings to
fixed-dimension vectors:

* ``hashed_ngram`` — deterministic character n-gram feature hashing;
  offline fallback, no external services needed.
* ``precomputed``  — vectors served from a JSONL cache keyed by the
  sha256 of the rendered text.
* ``remote``       — HTTP sidecar speaking ``POST /embed`` (batched).

Vectors are cached as 32-bit floats and promoted to 64-bit for training.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import requests

from .corpus import Dataset, UnlabeledPair, render_input, separator_collisions

__all__ = [
    "ProviderConfig",
    "FeatureMatrix",
    "EmbeddingError",
    "DimensionMismatch",
    "CacheMiss",
    "TransportError",
    "SeparatorCollision",
    "hashed_ngram_embed",
    "make_provider",
    "HashedNgramProvider",
    "PrecomputedProvider",
    "RemoteProvider",
    "embed_text",
    "embed_dataset",
    "load_cache",
    "append_cache",
]

log = logging.getLogger(__name__)

REMOTE_BATCH_SIZE = 32
RETRY_BACKOFF_SECONDS = (0.5, 1.0, 2.0)
ENDPOINT_ENV_VAR = "EMBED_ENDPOINT"


class EmbeddingError(Exception):
    """Base class for provider failures."""


class DimensionMismatch(EmbeddingError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected dimension {expected}, got {got}")


class CacheMiss(EmbeddingError):
    def __init__(self, content_hash: str):
        self.content_hash = content_hash
        super().__init__(f"no cached vector for content hash {content_hash}")


class TransportError(EmbeddingError):
    pass


class SeparatorCollision(EmbeddingError):
    def __init__(self, ids: list[str]):
        self.ids = ids
        super().__init__(
            f"separator literal occurs inside {len(ids)} pair(s): {ids[:5]}"
        )


@dataclass(frozen=True)
class ProviderConfig:
    """Configuration for an embedding provider.

    ``seed`` and ``ngram_range`` apply to hashed_ngram only; ``endpoint``
    is required for remote (the EMBED_ENDPOINT env var overrides it) and
    ``cache_path`` for precomputed.
    """

    kind: str = "hashed_ngram"
    dimension: int = 768
    endpoint: str | None = None
    cache_path: str | None = None
    seed: int = 0
    ngram_range: tuple[int, int] = (3, 5)

    def __post_init__(self) -> None:
        if self.kind not in ("hashed_ngram", "precomputed", "remote"):
            raise ValueError(f"unknown provider kind {self.kind!r}")
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        lo, hi = self.ngram_range
        if not (1 <= lo <= hi):
            raise ValueError(f"invalid ngram_range {self.ngram_range!r}")
        if self.kind == "precomputed" and not self.cache_path:
            raise ValueError("precomputed provider requires cache_path")
        if self.kind == "remote" and not (self.endpoint or os.environ.get(ENDPOINT_ENV_VAR)):
            raise ValueError("remote provider requires endpoint (or EMBED_ENDPOINT)")


@dataclass(frozen=True)
class FeatureMatrix:
    """Embedding rows, labels and ids aligned by index."""

    rows: np.ndarray  # (n, d) float64
    labels: np.ndarray  # (n,) int64, Useful=1 / Not Useful=0
    ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.rows.ndim != 2:
            raise ValueError("rows must be a 2-D array")
        if len(self.rows) != len(self.labels) or len(self.rows) != len(self.ids):
            raise ValueError("rows, labels and ids must have equal length")
        if not np.all(np.isfinite(self.rows)):
            raise ValueError("feature rows must be finite")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dimension(self) -> int:
        return self.rows.shape[1]


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _gram_digest(gram: str, seed: int) -> bytes:
    # One keyed blake2b digest per gram; the two 8-byte halves act as the
    # independent index and sign hashes. Stable across runs and platforms.
    key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    return hashlib.blake2b(gram.encode("utf-8"), digest_size=16, key=key).digest()


def hashed_ngram_embed(
    text: str,
    dimension: int,
    seed: int = 0,
    ngram_range: tuple[int, int] = (3, 5),
) -> np.ndarray:
    """Feature-hash character n-grams into a dense vector.

    Each n-gram adds +-1 (sign = parity of its sign hash) at position
    ``index_hash mod dimension``; the result is scaled by
    ``1 / max(1, sqrt(num_ngrams))``. Text shorter than the smallest
    n-gram length yields the zero vector.
    """
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    lo, hi = ngram_range
    values = np.zeros(dimension, dtype=np.float64)
    n_grams = 0
    for n in range(lo, hi + 1):
        for i in range(len(text) - n + 1):
            digest = _gram_digest(text[i : i + n], seed)
            index = int.from_bytes(digest[:8], "little") % dimension
            sign = 1.0 if int.from_bytes(digest[8:], "little") % 2 == 0 else -1.0
            values[index] += sign
            n_grams += 1
    values /= max(1.0, np.sqrt(n_grams))
    return values


class HashedNgramProvider:
    def __init__(self, config: ProviderConfig):
        self.config = config
        self.provider_id = (
            f"hashed_ngram-d{config.dimension}-s{config.seed}"
            f"-n{config.ngram_range[0]}_{config.ngram_range[1]}"
        )

    @property
    def dimension(self) -> int:
        return self.config.dimension

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        out = np.empty((len(texts), self.dimension), dtype=np.float64)
        for i, text in enumerate(texts):
            out[i] = hashed_ngram_embed(
                text, self.dimension, self.config.seed, self.config.ngram_range
            )
        return out


class PrecomputedProvider:
    """Serves vectors from a cache file; unknown texts raise CacheMiss."""

    def __init__(self, config: ProviderConfig):
        self.config = config
        self.provider_id = "precomputed"
        self._cache = load_cache(config.cache_path, config.dimension)

    @property
    def dimension(self) -> int:
        return self.config.dimension

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        out = np.empty((len(texts), self.dimension), dtype=np.float64)
        for i, text in enumerate(texts):
            key = content_hash(text)
            if key not in self._cache:
                raise CacheMiss(key)
            out[i] = self._cache[key].astype(np.float64)
        return out


class RemoteProvider:
    """Batched HTTP client for the embedding sidecar."""

    def __init__(self, config: ProviderConfig, session: requests.Session | None = None):
        self.config = config
        endpoint = os.environ.get(ENDPOINT_ENV_VAR) or config.endpoint
        self.endpoint = endpoint.rstrip("/")
        self.provider_id = "remote"
        self.request_count = 0
        self._session = session or requests.Session()

    @property
    def dimension(self) -> int:
        return self.config.dimension

    def _post_batch(self, texts: list[str]) -> list[list[float]]:
        last_error: Exception | None = None
        for attempt in range(len(RETRY_BACKOFF_SECONDS) + 1):
            if attempt > 0:
                time.sleep(RETRY_BACKOFF_SECONDS[attempt - 1])
            try:
                self.request_count += 1
                response = self._session.post(
                    f"{self.endpoint}/embed", json={"texts": texts}, timeout=60
                )
                if response.status_code >= 500:
                    last_error = TransportError(
                        f"server error {response.status_code} from {self.endpoint}"
                    )
                    continue
                response.raise_for_status()
                return response.json()["vectors"]
            except requests.RequestException as exc:
                last_error = TransportError(f"request to {self.endpoint} failed: {exc}")
        raise last_error  # type: ignore[misc]

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        out = np.empty((len(texts), self.dimension), dtype=np.float64)
        for start in range(0, len(texts), REMOTE_BATCH_SIZE):
            batch = texts[start : start + REMOTE_BATCH_SIZE]
            vectors = self._post_batch(batch)
            if len(vectors) != len(batch):
                raise TransportError(
                    f"sidecar returned {len(vectors)} vectors for {len(batch)} texts"
                )
            for i, vec in enumerate(vectors):
                if len(vec) != self.dimension:
                    raise DimensionMismatch(self.dimension, len(vec))
                out[start + i] = vec
        if not np.all(np.isfinite(out)):
            raise TransportError("sidecar returned non-finite values")
        return out


def make_provider(config: ProviderConfig):
    if config.kind == "hashed_ngram":
        return HashedNgramProvider(config)
    if config.kind == "precomputed":
        return PrecomputedProvider(config)
    return RemoteProvider(config)


def embed_text(provider, text: str) -> np.ndarray:
    """Embed one string; deterministic for hashed_ngram and precomputed."""
    vec = provider.embed_batch([text])[0]
    if len(vec) != provider.dimension:
        raise DimensionMismatch(provider.dimension, len(vec))
    return vec


def load_cache(path, dimension: int | None = None) -> dict[str, np.ndarray]:
    """Read a JSONL vector cache; later entries for a key win."""
    cache: dict[str, np.ndarray] = {}
    p = Path(path)
    if not p.exists():
        return cache
    with p.open("r", encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            record = json.loads(line)
            if dimension is not None and record["dim"] != dimension:
                raise DimensionMismatch(dimension, record["dim"])
            cache[record["sha256"]] = np.asarray(record["vector"], dtype=np.float32)
    return cache


def append_cache(path, entries: dict[str, np.ndarray]) -> None:
    """Append {sha256, dim, vector} records; vectors stored as float32."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("a", encoding="utf-8") as handle:
        for key, vec in entries.items():
            vec32 = np.asarray(vec, dtype=np.float32)
            handle.write(
                json.dumps(
                    {"sha256": key, "dim": len(vec32), "vector": [float(v) for v in vec32]}
                )
                + "\n"
            )


def _embed_attributed(provider, texts: list[str], ids: list[str]) -> np.ndarray:
    # Tag CacheMiss errors with the offending pair id (the hash identifies it).
    try:
        return provider.embed_batch(texts)
    except CacheMiss as exc:
        for pid, text in zip(ids, texts):
            if content_hash(text) == exc.content_hash:
                exc.pair_id = pid
                exc.args = (f"pair {pid}: {exc.args[0]}",)
                break
        raise


def embed_dataset(provider, dataset: Dataset, cache_path: str | None = None) -> FeatureMatrix:
    """Embed every pair's rendered text; rows align with dataset order.

    When a cache path is configured (argument or provider config), cached
    vectors are reused and fresh ones appended, so a warm cache issues no
    provider calls. All pairs must be labeled.
    """
    for pair in dataset:
        if pair.label is None:
            raise UnlabeledPair(pair.id)
    collisions = separator_collisions(dataset)
    if collisions:
        raise SeparatorCollision(collisions)

    texts = [render_input(pair) for pair in dataset]
    ids = tuple(pair.id for pair in dataset)
    labels = np.array([pair.label.value for pair in dataset], dtype=np.int64)

    cache_path = cache_path or provider.config.cache_path
    dim = provider.dimension
    rows = np.empty((len(texts), dim), dtype=np.float64)

    if cache_path:
        cache = load_cache(cache_path, dim)
        keys = [content_hash(t) for t in texts]
        miss_idx = [i for i, k in enumerate(keys) if k not in cache]
        if miss_idx:
            fresh = _embed_attributed(
                provider, [texts[i] for i in miss_idx], [ids[i] for i in miss_idx]
            )
            new_entries: dict[str, np.ndarray] = {}
            for j, i in enumerate(miss_idx):
                vec32 = np.asarray(fresh[j], dtype=np.float32)
                cache[keys[i]] = vec32
                new_entries.setdefault(keys[i], vec32)
            append_cache(cache_path, new_entries)
        for i, key in enumerate(keys):
            rows[i] = cache[key].astype(np.float64)
    else:
        rows[:] = _embed_attributed(provider, texts, list(ids))
    return FeatureMatrix(rows=rows, labels=labels, ids=ids)
