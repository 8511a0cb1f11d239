#!/usr/bin/env python3
# Embedding providers: the offline hashed n-gram provider needs no
# service and is fully deterministic, which makes the whole pipeline
# runnable on a laptop. Vectors are cached as float32 JSONL keyed by the
# sha256 of the rendered text, so re-embedding is free.

import tempfile
from pathlib import Path

import numpy as np

from ccq.corpus import load_dataset
from ccq.embedding import ProviderConfig, embed_dataset, hashed_ngram_embed, make_provider

HERE = Path(__file__).parent


def cosine(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


# Character n-grams hash into signed buckets; similar strings share
# n-grams and land near each other.
probe = "for loop counter"
neighbors = ["for loop index", "for (i = 0; i < n; i++)", "null pointer dereference", "free the buffer"]
vec = hashed_ngram_embed(probe, dimension=256, seed=7)
print(f"cosine similarity to: {probe!r}")
for text in neighbors:
    other = hashed_ngram_embed(text, dimension=256, seed=7)
    print(f"  {cosine(vec, other):+.3f}  {text!r}")

# Embed the bundled dataset into a feature matrix with rows aligned to
# labels and ids.
dataset = load_dataset(HERE / "data" / "sample_pairs.csv")
with tempfile.TemporaryDirectory() as tmp:
    cache = str(Path(tmp) / "vectors.jsonl")
    provider = make_provider(ProviderConfig(kind="hashed_ngram", dimension=128, seed=7))
    matrix = embed_dataset(provider, dataset, cache_path=cache)
    print(f"\nfeature matrix: {matrix.n} rows x {matrix.dimension} dims, labels {np.bincount(matrix.labels)}")

    # Second pass hits the cache: identical vectors, zero recomputation.
    again = embed_dataset(provider, dataset, cache_path=cache)
    identical = np.array_equal(
        matrix.rows.astype(np.float32), again.rows.astype(np.float32)
    )
    print(f"warm-cache pass identical at float32: {identical}")

# A remote provider (kind="remote", endpoint=... or EMBED_ENDPOINT) talks
# to the embed-sidecar service with the same interface; see sidecar/.
