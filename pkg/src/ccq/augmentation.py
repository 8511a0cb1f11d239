"""LLM-generated pair intake: prompting, parsing and quality control.

Generated batches pass through three trimming rules applied in a fixed
order, with the first failing rule attributed:

1. Duplicate  — exact (code, comment) match after whitespace
   normalization, against the batch so far and the existing corpus.
2. Incomplete — empty code or comment, unbalanced braces/parens in the
   code, or a bare placeholder comment.
3. Ambiguous  — code that doesn't look like C, or a comment with fewer
   than two English words.
"""

from __future__ import annotations

import enum
import json
import logging
import os
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

import requests

from .corpus import CodeCommentPair, Dataset, Label, Provenance, UnknownLabel

__all__ = [
    "QcRule",
    "RejectedPair",
    "IntakeReport",
    "PromptSpec",
    "LlmClientConfig",
    "AugmentationError",
    "AuthError",
    "TransportError",
    "RateLimited",
    "NoRecordsFound",
    "GenerationParse",
    "build_prompt",
    "llm_generate",
    "parse_generation",
    "qc_filter",
]

log = logging.getLogger(__name__)

API_KEY_ENV_VAR = "LLM_API_KEY"

# The 32 reserved words of C89; matching any one of them (or ';', '{',
# '#include') makes a snippet count as plausible C.
C_KEYWORDS = (
    "auto", "break", "case", "char", "const", "continue", "default", "do",
    "double", "else", "enum", "extern", "float", "for", "goto", "if",
    "int", "long", "register", "return", "short", "signed", "sizeof",
    "static", "struct", "switch", "typedef", "union", "unsigned", "void",
    "volatile", "while",
)

_C_KEYWORD_RE = re.compile(r"\b(" + "|".join(C_KEYWORDS) + r")\b")
_WORD_RE = re.compile(r"[A-Za-z]+")
_PLACEHOLDER_COMMENTS = {"todo", "tbd", "fixme", "xxx", "n/a", "na", "placeholder", "etc"}


class AugmentationError(Exception):
    pass


class AuthError(AugmentationError):
    pass


class TransportError(AugmentationError):
    pass


class RateLimited(AugmentationError):
    pass


class NoRecordsFound(AugmentationError):
    def __init__(self) -> None:
        super().__init__("no parseable code-comment records in the generation output")


class QcRule(enum.Enum):
    DUPLICATE = "Duplicate"
    INCOMPLETE = "Incomplete"
    AMBIGUOUS = "Ambiguous"


@dataclass(frozen=True)
class RejectedPair:
    pair: CodeCommentPair
    rule: QcRule
    detail: str


@dataclass(frozen=True)
class IntakeReport:
    accepted: Dataset
    rejected: tuple[RejectedPair, ...]

    @property
    def rule_counts(self) -> dict[QcRule, int]:
        counts = {rule: 0 for rule in QcRule}
        for rejected in self.rejected:
            counts[rejected.rule] += 1
        return counts

    def to_dict(self) -> dict:
        return {
            "n_input": len(self.accepted) + len(self.rejected),
            "n_accepted": len(self.accepted),
            "n_rejected": len(self.rejected),
            "rule_counts": {rule.value: count for rule, count in self.rule_counts.items()},
            "rejected": [
                {
                    "id": r.pair.id,
                    "code": r.pair.code,
                    "comment": r.pair.comment,
                    "rule": r.rule.value,
                    "detail": r.detail,
                }
                for r in self.rejected
            ],
        }


@dataclass(frozen=True)
class PromptSpec:
    n_pairs: int = 3000
    language: str = "C"
    label_split: float = 0.5  # requested share of Useful labels

    def __post_init__(self) -> None:
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be >= 1")
        if not (0.0 < self.label_split < 1.0):
            raise ValueError("label_split must be in (0, 1)")


_PROMPT_TEMPLATE = """\
Generate {n_pairs} code-comment pairs in the {language} programming language.

Requirements:
- Each pair is one code snippet plus one comment about that code.
- Label each pair yourself: "Useful" if the comment is informative about
  the surrounding code, "Not Useful" if it is redundant, unrelated or
  ambiguous.
- Aim for {useful_pct:.0f}% Useful and {not_useful_pct:.0f}% Not Useful pairs.
- Vary the snippets: declarations, conditionals, loops, arithmetic,
  function calls, string operations.

Output format (strict): one JSON object per line, no surrounding prose,
following exactly this schema:

{{"code": "<{language} code snippet>", "comment": "<comment text>", "label": "Useful" | "Not Useful"}}
"""


def build_prompt(spec: PromptSpec) -> str:
    """Deterministic generation prompt asking for machine-parseable JSONL."""
    return _PROMPT_TEMPLATE.format(
        n_pairs=spec.n_pairs,
        language=spec.language,
        useful_pct=spec.label_split * 100.0,
        not_useful_pct=(1.0 - spec.label_split) * 100.0,
    )


@dataclass(frozen=True)
class LlmClientConfig:
    endpoint: str
    model: str = "gpt-3.5-turbo"
    api_key_env: str = API_KEY_ENV_VAR
    timeout: float = 120.0
    max_retries: int = 3
    audit_log: str | None = None


def _audit(config: LlmClientConfig, record: dict) -> None:
    if not config.audit_log:
        return
    path = Path(config.audit_log)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as handle:
        handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def llm_generate(config: LlmClientConfig, prompt: str) -> str:
    """Request a completion; returns the raw text of the first choice.

    The credential comes from the env var named by ``api_key_env`` and is
    checked before any network call. Each attempt's request and response
    are appended to the audit log (credential excluded). 429 responses
    honor Retry-After.
    """
    api_key = os.environ.get(config.api_key_env)
    if not api_key:
        raise AuthError(f"missing credential: set {config.api_key_env}")

    body = {
        "model": config.model,
        "messages": [{"role": "user", "content": prompt}],
    }
    last_error: AugmentationError | None = None
    for attempt in range(1, config.max_retries + 1):
        record = {"attempt": attempt, "endpoint": config.endpoint, "request": body}
        try:
            response = requests.post(
                config.endpoint,
                json=body,
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=config.timeout,
            )
        except requests.RequestException as exc:
            record["error"] = str(exc)
            _audit(config, record)
            last_error = TransportError(f"request failed: {exc}")
            continue
        record["status"] = response.status_code
        record["response"] = response.text
        _audit(config, record)
        if response.status_code in (401, 403):
            raise AuthError(f"credential rejected (HTTP {response.status_code})")
        if response.status_code == 429:
            retry_after = float(response.headers.get("Retry-After", "1"))
            last_error = RateLimited(f"rate limited; retry-after {retry_after}s")
            time.sleep(min(retry_after, 30.0))
            continue
        if response.status_code >= 400:
            last_error = TransportError(f"HTTP {response.status_code}: {response.text[:200]}")
            continue
        payload = response.json()
        return payload["choices"][0]["message"]["content"]
    raise last_error  # type: ignore[misc]


@dataclass(frozen=True)
class GenerationParse:
    pairs: tuple[CodeCommentPair, ...]
    rejects: tuple[tuple[int, str, str], ...]  # (line number, line, reason)


def parse_generation(raw: str) -> GenerationParse:
    """Recover JSONL records from raw completion text.

    Surrounding prose is skipped; lines that look like records (start
    with '{') but fail to parse are collected as rejects. Raises
    NoRecordsFound when nothing parseable remains.
    """
    pairs: list[CodeCommentPair] = []
    rejects: list[tuple[int, str, str]] = []
    for line_no, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if not stripped.startswith("{"):
            continue  # prose
        try:
            record = json.loads(stripped)
        except json.JSONDecodeError as exc:
            rejects.append((line_no, line, f"invalid JSON: {exc.msg}"))
            continue
        if not isinstance(record, dict) or not isinstance(record.get("code"), str) or not isinstance(record.get("comment"), str):
            rejects.append((line_no, line, "missing string 'code'/'comment' fields"))
            continue
        label = None
        raw_label = record.get("label")
        if raw_label is not None and str(raw_label).strip():
            try:
                label = Label.parse(str(raw_label))
            except UnknownLabel:
                rejects.append((line_no, line, f"unknown label {raw_label!r}"))
                continue
        pair_id = str(record["id"]) if "id" in record else f"gen-{len(pairs)}"
        pairs.append(
            CodeCommentPair(
                id=pair_id,
                code=record["code"].strip(),
                comment=record["comment"].strip(),
                label=label,
            )
        )
    if not pairs:
        raise NoRecordsFound()
    return GenerationParse(pairs=tuple(pairs), rejects=tuple(rejects))


def _normalize_ws(text: str) -> str:
    return " ".join(text.split())


def _strip_comment_markers(comment: str) -> str:
    lines = []
    for line in comment.splitlines():
        line = line.strip()
        line = re.sub(r"^(//+|/\*+|\*+/?|#+)\s*", "", line)
        line = re.sub(r"\*/\s*$", "", line)
        lines.append(line)
    return " ".join(lines).strip()


def _incomplete_reason(pair: CodeCommentPair) -> str | None:
    if not pair.code.strip():
        return "empty code"
    if not pair.comment.strip():
        return "empty comment"
    for open_char, close_char in (("{", "}"), ("(", ")")):
        if pair.code.count(open_char) != pair.code.count(close_char):
            return f"unbalanced {open_char}{close_char} in code"
    stripped = _strip_comment_markers(pair.comment).lower()
    if not re.search(r"[0-9A-Za-z]", stripped) or stripped in _PLACEHOLDER_COMMENTS:
        return "placeholder comment"
    return None


def _ambiguous_reason(pair: CodeCommentPair) -> str | None:
    code = pair.code
    if ";" not in code and "{" not in code and "#include" not in code and not _C_KEYWORD_RE.search(code):
        return "code does not look like C"
    words = _WORD_RE.findall(_strip_comment_markers(pair.comment))
    if len(words) < 2:
        return "comment has fewer than 2 English words"
    return None


def qc_filter(pairs, existing: Dataset) -> IntakeReport:
    """Apply the trimming rules in order; rejection is data, not an error.

    Deduplication is order-sensitive by design: the first occurrence of a
    normalized (code, comment) key wins, later copies are Duplicates.
    """
    existing_keys = {
        (_normalize_ws(p.code), _normalize_ws(p.comment)) for p in existing
    }
    seen: set[tuple[str, str]] = set()
    accepted: list[CodeCommentPair] = []
    rejected: list[RejectedPair] = []
    used_ids: set[str] = set()
    for pair in pairs:
        key = (_normalize_ws(pair.code), _normalize_ws(pair.comment))
        if key in existing_keys:
            rejected.append(RejectedPair(pair, QcRule.DUPLICATE, "duplicates the existing corpus"))
            continue
        if key in seen:
            rejected.append(RejectedPair(pair, QcRule.DUPLICATE, "duplicates an earlier batch row"))
            continue
        reason = _incomplete_reason(pair)
        if reason is not None:
            seen.add(key)
            rejected.append(RejectedPair(pair, QcRule.INCOMPLETE, reason))
            continue
        reason = _ambiguous_reason(pair)
        if reason is not None:
            seen.add(key)
            rejected.append(RejectedPair(pair, QcRule.AMBIGUOUS, reason))
            continue
        seen.add(key)
        pair_id = pair.id
        suffix = 1
        while pair_id in used_ids:
            pair_id = f"{pair.id}-{suffix}"
            suffix += 1
        used_ids.add(pair_id)
        if pair_id != pair.id:
            pair = CodeCommentPair(id=pair_id, code=pair.code, comment=pair.comment, label=pair.label)
        accepted.append(pair)
    return IntakeReport(
        accepted=Dataset(pairs=tuple(accepted), provenance=Provenance.LLM_GENERATED),
        rejected=tuple(rejected),
    )
