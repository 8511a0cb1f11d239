#!/usr/bin/env python3
"""Pin the 5-case cosine fixtures against the live pretrained encoder.

Run once in an environment that can load the default model (downloads
from the Hugging Face hub); writes tests/fixtures/live_cosines.json,
which the live-model fixture test verifies thereafter with a +-0.05
tolerance. Without that file (or the model) the test skips.
"""

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from embed_sidecar import DEFAULT_MODEL_ID  # noqa: E402
from embed_sidecar.encoders import SentenceTransformerEncoder  # noqa: E402

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def main() -> int:
    with open(FIXTURES / "offline_cosines.json") as fh:
        cases = json.load(fh)["cases"]
    encoder = SentenceTransformerEncoder(DEFAULT_MODEL_ID)

    def cos(a, b):
        a, b = np.asarray(a), np.asarray(b)
        return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))

    pinned = []
    for case in cases:
        anchor, related, unrelated = encoder.encode(
            [case["anchor"], case["related"], case["unrelated"]]
        )
        pinned.append(
            {
                "name": case["name"],
                "anchor": case["anchor"],
                "related": case["related"],
                "unrelated": case["unrelated"],
                "cos_related": round(cos(anchor, related), 6),
                "cos_unrelated": round(cos(anchor, unrelated), 6),
            }
        )
        print(f"{case['name']}: related={pinned[-1]['cos_related']:.3f} "
              f"unrelated={pinned[-1]['cos_unrelated']:.3f}")

    out = FIXTURES / "live_cosines.json"
    with open(out, "w") as fh:
        json.dump({"model": encoder.model_id, "dim": encoder.dimension, "cases": pinned}, fh, indent=2)
        fh.write("\n")
    print(f"pinned fixtures written to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
