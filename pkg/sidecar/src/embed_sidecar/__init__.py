"""Embedding sidecar: POST /embed and GET /health over HTTP/JSON."""

__version__ = "0.1.0"

DEFAULT_MODEL_ID = "flax-sentence-embeddings/st-codesearch-distilroberta-base"
DEFAULT_DIMENSION = 768
DEFAULT_PORT = 8090
OFFLINE_MODEL_ID = "offline-ngram"
