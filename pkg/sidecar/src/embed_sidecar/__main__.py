"""Entry point: load the configured encoder, refuse on dim mismatch, serve.

Environment:
    EMBED_MODEL  model id (default: the code-search distilroberta encoder);
                 "offline-ngram" selects the no-download hashing encoder
    EMBED_DIM    expected vector dimension (default 768)
    EMBED_PORT   listen port (default 8090)
"""

import os
import sys

import uvicorn

from . import DEFAULT_DIMENSION, DEFAULT_MODEL_ID, DEFAULT_PORT
from .app import create_app
from .encoders import build_encoder


def main() -> int:
    model_id = os.environ.get("EMBED_MODEL", DEFAULT_MODEL_ID)
    dimension = int(os.environ.get("EMBED_DIM", DEFAULT_DIMENSION))
    port = int(os.environ.get("EMBED_PORT", DEFAULT_PORT))
    try:
        encoder = build_encoder(model_id, dimension)
    except RuntimeError as exc:
        print(f"refusing to start: {exc}", file=sys.stderr)
        return 1
    app = create_app(encoder)
    uvicorn.run(app, host="0.0.0.0", port=port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
