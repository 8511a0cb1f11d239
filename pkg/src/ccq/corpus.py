"""Labeled code-comment datasets: parsing, stats, merging, rendering.

A dataset is an ordered collection of (code, comment, label) pairs read
from CSV (RFC-4180, header ``code,comment,label``, optionally with a
leading ``id`` column) or JSONL (keys ``id?``, ``code``, ``comment``,
``label?``). Labels are binary: "Useful" (1) or "Not Useful" (0).
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, replace

__all__ = [
    "Label",
    "Provenance",
    "CodeCommentPair",
    "Dataset",
    "ClassDistribution",
    "CorpusError",
    "MalformedRecord",
    "UnknownLabel",
    "EmptyInput",
    "UnlabeledPair",
    "DuplicateId",
    "SEPARATOR",
    "parse_dataset",
    "serialize_dataset",
    "load_dataset",
    "dataset_stats",
    "merge_datasets",
    "render_input",
    "separator_collisions",
]

# Fixed literal joining code and comment before embedding. Injectivity of
# render_input holds as long as neither field contains this literal;
# separator_collisions() checks that.
SEPARATOR = "\n[SEP]\n"


class CorpusError(Exception):
    """Base class for dataset ingestion and validation failures."""


class MalformedRecord(CorpusError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"malformed record at line {line}: {reason}")


class UnknownLabel(CorpusError):
    def __init__(self, value: str, line: int | None = None):
        self.value = value
        self.line = line
        at = f" at line {line}" if line is not None else ""
        super().__init__(f"unknown label {value!r}{at}")


class EmptyInput(CorpusError):
    def __init__(self) -> None:
        super().__init__("input contains no records")


class UnlabeledPair(CorpusError):
    def __init__(self, pair_id: str):
        self.pair_id = pair_id
        super().__init__(f"pair {pair_id!r} has no label")


class DuplicateId(CorpusError):
    def __init__(self, pair_id: str):
        self.pair_id = pair_id
        super().__init__(f"duplicate pair id {pair_id!r}")


class Label(enum.Enum):
    """Binary comment-quality label. Numeric encoding: Useful=1, Not Useful=0."""

    NOT_USEFUL = 0
    USEFUL = 1

    @property
    def text(self) -> str:
        return "Useful" if self is Label.USEFUL else "Not Useful"

    @classmethod
    def parse(cls, value: str) -> "Label":
        # Accepts case-insensitive input and underscore variants
        # ("NOT_USEFUL"); always serializes back to the canonical strings.
        normalized = " ".join(value.replace("_", " ").split()).lower()
        if normalized == "useful":
            return cls.USEFUL
        if normalized == "not useful":
            return cls.NOT_USEFUL
        raise UnknownLabel(value)


class Provenance(enum.Enum):
    SEED = "seed"
    LLM_GENERATED = "llm"
    MERGED = "merged"


@dataclass(frozen=True)
class CodeCommentPair:
    """One code snippet, its comment, and an optional quality label."""

    id: str
    code: str
    comment: str
    label: Label | None = None


@dataclass(frozen=True)
class Dataset:
    """Ordered, id-unique collection of pairs with a provenance tag."""

    pairs: tuple[CodeCommentPair, ...]
    provenance: Provenance = Provenance.SEED

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for pair in self.pairs:
            if pair.id in seen:
                raise DuplicateId(pair.id)
            seen.add(pair.id)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def fully_labeled(self) -> bool:
        return all(p.label is not None for p in self.pairs)


@dataclass(frozen=True)
class ClassDistribution:
    n_total: int
    n_useful: int
    n_not_useful: int

    @property
    def useful_share(self) -> float:
        return self.n_useful / self.n_total if self.n_total else 0.0

    def __str__(self) -> str:
        return (
            f"total={self.n_total} useful={self.n_useful} "
            f"not_useful={self.n_not_useful} useful_share={self.useful_share:.3f}"
        )


def _make_pair(
    pair_id: str, code: str, comment: str, raw_label: str | None, line: int
) -> CodeCommentPair:
    label: Label | None = None
    if raw_label is not None and raw_label.strip() != "":
        try:
            label = Label.parse(raw_label)
        except UnknownLabel as exc:
            raise UnknownLabel(exc.value, line=line) from None
    return CodeCommentPair(id=pair_id, code=code.strip(), comment=comment.strip(), label=label)


_CSV_HEADERS = (
    ("code", "comment"),
    ("code", "comment", "label"),
    ("id", "code", "comment"),
    ("id", "code", "comment", "label"),
)


def _parse_csv(text: str) -> list[CodeCommentPair]:
    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    try:
        header = next(reader, None)
    except csv.Error as exc:
        raise MalformedRecord(1, str(exc)) from None
    if header is None:
        raise EmptyInput()
    header_key = tuple(h.strip().lower() for h in header)
    if header_key not in _CSV_HEADERS:
        raise MalformedRecord(1, f"unsupported header {header!r}")
    has_id = header_key[0] == "id"
    has_label = header_key[-1] == "label"
    pairs: list[CodeCommentPair] = []
    while True:
        try:
            row = next(reader, None)
        except csv.Error as exc:
            raise MalformedRecord(reader.line_num, str(exc)) from None
        if row is None:
            break
        if not row:
            continue  # blank line
        if len(row) != len(header_key):
            raise MalformedRecord(
                reader.line_num, f"expected {len(header_key)} fields, got {len(row)}"
            )
        fields = list(row)
        pair_id = fields.pop(0).strip() if has_id else str(len(pairs))
        raw_label = fields.pop() if has_label else None
        code, comment = fields
        pairs.append(_make_pair(pair_id, code, comment, raw_label, reader.line_num))
    return pairs


def _parse_jsonl(text: str) -> list[CodeCommentPair]:
    pairs: list[CodeCommentPair] = []
    # Records are separated by newlines only; splitlines() would also break
    # on NEL/LS/PS characters, which are legal inside JSON strings.
    for line_no, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON: {exc.msg}") from None
        if not isinstance(record, dict):
            raise MalformedRecord(line_no, "record is not a JSON object")
        if "code" not in record or "comment" not in record:
            raise MalformedRecord(line_no, "missing 'code' or 'comment' key")
        code, comment = record["code"], record["comment"]
        if not isinstance(code, str) or not isinstance(comment, str):
            raise MalformedRecord(line_no, "'code' and 'comment' must be strings")
        pair_id = str(record["id"]) if "id" in record else str(len(pairs))
        pairs.append(_make_pair(pair_id, code, comment, record.get("label"), line_no))
    return pairs


def parse_dataset(
    source: bytes | io.IOBase,
    format: str,
    provenance: Provenance = Provenance.SEED,
) -> Dataset:
    """Parse a CSV or JSONL byte stream into a Dataset.

    Missing ids are assigned as the row index; the label column is
    optional (unlabeled intake). Raises MalformedRecord, UnknownLabel or
    EmptyInput.
    """
    data = source if isinstance(source, bytes) else source.read()
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedRecord(0, f"input is not valid UTF-8: {exc}") from None
    if format == "csv":
        pairs = _parse_csv(text)
    elif format == "jsonl":
        pairs = _parse_jsonl(text)
    else:
        raise ValueError(f"unsupported format {format!r} (expected 'csv' or 'jsonl')")
    if not pairs:
        raise EmptyInput()
    return Dataset(pairs=tuple(pairs), provenance=provenance)


def load_dataset(path, format: str | None = None, provenance: Provenance = Provenance.SEED) -> Dataset:
    """Read a dataset file, inferring the format from the suffix if omitted."""
    import pathlib

    p = pathlib.Path(path)
    if format is None:
        format = "jsonl" if p.suffix in (".jsonl", ".ndjson", ".json") else "csv"
    return parse_dataset(p.read_bytes(), format=format, provenance=provenance)


def serialize_dataset(dataset: Dataset, format: str) -> bytes:
    """Inverse of parse_dataset; emits canonical label strings only."""
    if format == "csv":
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "code", "comment", "label"])
        for pair in dataset:
            writer.writerow(
                [pair.id, pair.code, pair.comment, pair.label.text if pair.label else ""]
            )
        return buf.getvalue().encode("utf-8")
    if format == "jsonl":
        lines = []
        for pair in dataset:
            record: dict = {"id": pair.id, "code": pair.code, "comment": pair.comment}
            if pair.label is not None:
                record["label"] = pair.label.text
            lines.append(json.dumps(record, ensure_ascii=False))
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ValueError(f"unsupported format {format!r}")


def dataset_stats(dataset: Dataset) -> ClassDistribution:
    """Exact class counts; raises UnlabeledPair if any label is missing."""
    n_useful = 0
    n_not = 0
    for pair in dataset:
        if pair.label is None:
            raise UnlabeledPair(pair.id)
        if pair.label is Label.USEFUL:
            n_useful += 1
        else:
            n_not += 1
    return ClassDistribution(n_total=len(dataset), n_useful=n_useful, n_not_useful=n_not)


def merge_datasets(a: Dataset, b: Dataset) -> Dataset:
    """Concatenate two datasets (a first), provenance becomes MERGED.

    If any id occurs on both sides, every id is prefixed with its side's
    provenance tag; equal tags get an extra a/b marker so two copies of
    the same file still merge into 2n distinct ids.
    """
    ids_a = {p.id for p in a.pairs}
    ids_b = {p.id for p in b.pairs}
    if ids_a & ids_b:
        tag_a, tag_b = a.provenance.value, b.provenance.value
        if tag_a == tag_b:
            tag_a, tag_b = f"{tag_a}-a", f"{tag_b}-b"
        pairs_a = tuple(replace(p, id=f"{tag_a}-{p.id}") for p in a.pairs)
        pairs_b = tuple(replace(p, id=f"{tag_b}-{p.id}") for p in b.pairs)
    else:
        pairs_a, pairs_b = a.pairs, b.pairs
    return Dataset(pairs=pairs_a + pairs_b, provenance=Provenance.MERGED)


def render_input(pair: CodeCommentPair) -> str:
    """Concatenate code and comment with the fixed separator literal."""
    return f"{pair.code}{SEPARATOR}{pair.comment}"


def separator_collisions(dataset: Dataset) -> list[str]:
    """Ids of pairs whose code or comment contains the separator literal."""
    return [
        p.id for p in dataset if SEPARATOR in p.code or SEPARATOR in p.comment
    ]
