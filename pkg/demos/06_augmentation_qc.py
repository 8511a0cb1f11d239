#!/usr/bin/env python3
# Intake pipeline for generated training pairs: build the generation
# prompt, parse a raw completion (prose and broken lines included), and
# run the quality-control trimming with per-rule attribution.

from ccq.augmentation import PromptSpec, build_prompt, parse_generation, qc_filter
from ccq.corpus import CodeCommentPair, Dataset, Label

prompt = build_prompt(PromptSpec(n_pairs=12, language="C", label_split=0.5))
print("=== generation prompt ===")
print(prompt)

# What a completion endpoint might actually return: prose around the
# records, one malformed line, duplicates, junk.
raw_completion = """\
Sure! Here are the code-comment pairs you asked for:

{"code": "int total = 0;", "comment": "running total for the batch", "label": "Useful"}
{"code": "for (i = 0; i < n; i++) { total += a[i]; }", "comment": "sum the array", "label": "Useful"}
{"code": "int total = 0;", "comment": "running total for the batch", "label": "Useful"}
{"code": "free(p);", "comment": "free p", "label": "Not Useful"}
{"code": "if (x > 0) { y = 1;", "comment": "clamp the sign", "label": "Useful"}
{"code": "the code goes here", "comment": "a thoughtful explanation", "label": "Useful"}
{"code": "while (waiting) poll();", "comment": "...", "label": "Not Useful"}
{"code": "broken json line, never closed
Hope these help!
"""

parsed = parse_generation(raw_completion)
print(f"=== parsing ===")
print(f"recovered {len(parsed.pairs)} records, {len(parsed.rejects)} malformed line(s)")
for line_no, _, reason in parsed.rejects:
    print(f"  line {line_no}: {reason}")

# The existing corpus participates in deduplication.
existing = Dataset(
    pairs=(CodeCommentPair("s0", "free(p);", "free p", Label.NOT_USEFUL),)
)

report = qc_filter(parsed.pairs, existing)
print("\n=== quality control ===")
print(f"accepted {len(report.accepted)} of {len(parsed.pairs)}")
for rejected in report.rejected:
    print(f"  [{rejected.rule.value:10s}] {rejected.pair.code[:40]!r}: {rejected.detail}")
print(f"rule counts: {({rule.value: n for rule, n in report.rule_counts.items()})}")
