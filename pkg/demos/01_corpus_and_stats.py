#!/usr/bin/env python3
# Walk through the corpus layer: load a labeled CSV of code-comment
# pairs, look at the class balance, merge in a second batch, and see the
# exact string a pair turns into before embedding.

from pathlib import Path

from ccq.corpus import (
    CodeCommentPair,
    Dataset,
    Label,
    Provenance,
    dataset_stats,
    load_dataset,
    merge_datasets,
    render_input,
)

HERE = Path(__file__).parent

# A dataset is just rows of (code, comment, label). The loader accepts
# CSV (RFC-4180, quoted fields may span lines) and JSONL.
seed = load_dataset(HERE / "data" / "sample_pairs.csv")
print(f"loaded {len(seed)} pairs from sample_pairs.csv")

stats = dataset_stats(seed)
print(f"class balance: {stats}")
print(f"useful share to three decimals: {stats.useful_share:.3f}")

# Simulate a generated batch arriving from elsewhere. Note the tolerant
# label parsing ("not useful" in any case) and the canonical output form.
generated = Dataset(
    pairs=(
        CodeCommentPair("g0", "int idx = hash(key) % size;", "map the key into the table", Label.parse("useful")),
        CodeCommentPair("g1", "i += 1;", "add one to i", Label.parse("NOT_USEFUL")),
    ),
    provenance=Provenance.LLM_GENERATED,
)
print(f"\ngenerated batch labels: {[p.label.text for p in generated]}")

merged = merge_datasets(seed, generated)
print(f"merged size: {len(merged)} (seed {len(seed)} + generated {len(generated)})")
print(f"merged provenance: {merged.provenance.value}")

# Each pair becomes one string: code, a separator line, then the comment.
print("\nrendered input for the first pair:")
print(render_input(seed.pairs[0]))
