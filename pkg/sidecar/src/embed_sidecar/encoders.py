"""Text encoders behind the service.

Two backends: the pretrained code-search sentence-transformer (the
default, downloaded on first use) and a fully offline deterministic
character n-gram hashing encoder for development and tests. Both are
deterministic for a fixed snapshot: same input, same vector.
"""

from __future__ import annotations

import hashlib

import numpy as np

from . import DEFAULT_DIMENSION, DEFAULT_MODEL_ID, OFFLINE_MODEL_ID


class HashedNgramEncoder:
    """Offline stand-in: signed character n-gram hashing, L2-normalized."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION, ngram_range=(3, 5), seed: int = 0):
        self.model_id = OFFLINE_MODEL_ID
        self.dimension = dimension
        self.ngram_range = ngram_range
        self.seed = seed

    def _embed_one(self, text: str) -> np.ndarray:
        values = np.zeros(self.dimension, dtype=np.float64)
        key = (self.seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
        lo, hi = self.ngram_range
        for n in range(lo, hi + 1):
            for i in range(len(text) - n + 1):
                digest = hashlib.blake2b(
                    text[i : i + n].encode("utf-8"), digest_size=16, key=key
                ).digest()
                index = int.from_bytes(digest[:8], "little") % self.dimension
                sign = 1.0 if int.from_bytes(digest[8:], "little") % 2 == 0 else -1.0
                values[index] += sign
        norm = float(np.linalg.norm(values))
        if norm > 0.0:
            values /= norm
        return values

    def encode(self, texts: list[str]) -> list[list[float]]:
        return [self._embed_one(text).tolist() for text in texts]


class SentenceTransformerEncoder:
    """Wraps a sentence-transformers model in inference mode."""

    def __init__(self, model_id: str = DEFAULT_MODEL_ID):
        from sentence_transformers import SentenceTransformer

        self.model_id = model_id
        self._model = SentenceTransformer(model_id)
        probe = self._model.encode(["probe"], convert_to_numpy=True)
        self.dimension = int(probe.shape[1])

    def encode(self, texts: list[str]) -> list[list[float]]:
        vectors = self._model.encode(
            texts, convert_to_numpy=True, batch_size=len(texts), show_progress_bar=False
        )
        return [row.astype(float).tolist() for row in vectors]


def build_encoder(model_id: str, dimension: int):
    """Instantiate the encoder named by model_id; offline ids never touch
    the network. Raises RuntimeError when the loaded dimension differs from
    the configured one."""
    if model_id == OFFLINE_MODEL_ID:
        encoder = HashedNgramEncoder(dimension=dimension)
    else:
        encoder = SentenceTransformerEncoder(model_id)
    if encoder.dimension != dimension:
        raise RuntimeError(
            f"model {model_id!r} produces {encoder.dimension}-dim vectors, "
            f"configured dimension is {dimension}"
        )
    return encoder
