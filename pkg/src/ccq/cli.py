"""Command-line entry point.

Subcommands: ingest, stats, augment, embed, run, compare. A JSON config
file may supply any long-option default; explicit flags win. All
randomness derives from one --seed (default 42): the split plan uses it
directly and each fold uses ``seed + repeat * n_folds + fold``. Every
artifact embeds the resolved configuration and tool version so reports
are replayable; two runs with identical config produce byte-identical
files.

Exit codes: 0 success, 2 missing input, 3 parse error, 4 invalid run
configuration, 5 report schema mismatch, 6 transport/auth failure,
7 unparseable generation output, 8 empty intake.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__, augmentation, corpus, embedding, evaluation
from .balance import SmoteConfig
from .models import default_config

EXIT_OK = 0
EXIT_MISSING_INPUT = 2
EXIT_PARSE_ERROR = 3
EXIT_BAD_RUN_CONFIG = 4
EXIT_SCHEMA_MISMATCH = 5
EXIT_TRANSPORT = 6
EXIT_GENERATION_PARSE = 7
EXIT_EMPTY_ACCEPT = 8

MODEL_CHOICES = ("rf", "vc", "nn", "all")
RUN_MODEL_ORDER = ("rf", "vc", "nn")


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _fail(message: str, exit_code: int) -> "CliError":
    return CliError(message, exit_code)


def _load_file_dataset(path_str: str, format: str | None, provenance=corpus.Provenance.SEED):
    path = Path(path_str)
    if not path.exists():
        raise _fail(f"input file not found: {path}", EXIT_MISSING_INPUT)
    try:
        return corpus.load_dataset(path, format=format, provenance=provenance)
    except corpus.MalformedRecord as exc:
        raise _fail(f"{path}: {exc}", EXIT_PARSE_ERROR)
    except corpus.UnknownLabel as exc:
        raise _fail(f"{path}: {exc}", EXIT_PARSE_ERROR)
    except corpus.EmptyInput as exc:
        raise _fail(f"{path}: {exc}", EXIT_PARSE_ERROR)


def _print_stats(stats: corpus.ClassDistribution) -> None:
    print("Class        | Count | Share")
    print(f"Useful       | {stats.n_useful} | {stats.useful_share:.3f}")
    print(f"Not Useful   | {stats.n_not_useful} | {1 - stats.useful_share:.3f}")
    print(f"Total        | {stats.n_total} |")


def _tool_stamp(config: dict) -> dict:
    return {"tool": {"name": "ccq", "version": __version__}, "config": config}


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def cmd_ingest(args) -> int:
    dataset = _load_file_dataset(args.path, args.format)
    try:
        stats = corpus.dataset_stats(dataset)
    except corpus.UnlabeledPair as exc:
        raise _fail(str(exc), EXIT_PARSE_ERROR)
    _print_stats(stats)
    out = Path(args.out) if args.out else Path(args.path).with_suffix(".validated.jsonl")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(corpus.serialize_dataset(dataset, "jsonl"))
    print(f"validated dataset cached to {out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    dataset = _load_file_dataset(args.path, args.format)
    try:
        stats = corpus.dataset_stats(dataset)
    except corpus.UnlabeledPair as exc:
        raise _fail(str(exc), EXIT_PARSE_ERROR)
    _print_stats(stats)
    return EXIT_OK


def _provider_from_args(args) -> embedding.ProviderConfig:
    try:
        return embedding.ProviderConfig(
            kind=args.provider,
            dimension=args.dim,
            endpoint=args.endpoint,
            cache_path=args.cache,
            seed=args.seed,
            ngram_range=(args.ngram_min, args.ngram_max),
        )
    except ValueError as exc:
        raise _fail(str(exc), EXIT_BAD_RUN_CONFIG)


def cmd_embed(args) -> int:
    dataset = _load_file_dataset(args.dataset, args.format)
    config = _provider_from_args(args)
    provider = embedding.make_provider(config)
    try:
        matrix = embedding.embed_dataset(provider, dataset, cache_path=args.cache)
    except corpus.UnlabeledPair as exc:
        raise _fail(str(exc), EXIT_PARSE_ERROR)
    except embedding.EmbeddingError as exc:
        raise _fail(str(exc), EXIT_TRANSPORT)
    print(f"embedded {matrix.n} pairs into {matrix.n} x {matrix.dimension} features")
    if args.cache:
        print(f"vector cache: {args.cache}")
    return EXIT_OK


def cmd_augment(args) -> int:
    spec = augmentation.PromptSpec(
        n_pairs=args.n_pairs, language=args.language, label_split=args.label_split
    )
    prompt = augmentation.build_prompt(spec)
    if args.from_file:
        raw_path = Path(args.from_file)
        if not raw_path.exists():
            raise _fail(f"input file not found: {raw_path}", EXIT_MISSING_INPUT)
        raw = raw_path.read_text(encoding="utf-8")
    else:
        if not args.endpoint:
            raise _fail("augment needs --endpoint or --from-file", EXIT_BAD_RUN_CONFIG)
        client = augmentation.LlmClientConfig(
            endpoint=args.endpoint, model=args.model, audit_log=args.audit_log
        )
        try:
            raw = augmentation.llm_generate(client, prompt)
        except (augmentation.AuthError, augmentation.TransportError, augmentation.RateLimited) as exc:
            raise _fail(str(exc), EXIT_TRANSPORT)
    try:
        parsed = augmentation.parse_generation(raw)
    except augmentation.NoRecordsFound as exc:
        raise _fail(str(exc), EXIT_GENERATION_PARSE)
    existing = (
        _load_file_dataset(args.existing, None)
        if args.existing
        else corpus.Dataset(pairs=(), provenance=corpus.Provenance.SEED)
    )
    report = augmentation.qc_filter(parsed.pairs, existing)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    accepted_path = out_dir / "accepted.jsonl"
    report_path = out_dir / "intake_report.json"
    payload = report.to_dict()
    payload["parse_rejects"] = [
        {"line": line_no, "reason": reason} for line_no, _, reason in parsed.rejects
    ]
    payload.update(_tool_stamp({"spec": asdict(spec), "existing": args.existing}))
    _write_json(report_path, payload)
    counts = {rule.value: count for rule, count in report.rule_counts.items()}
    print(f"accepted {len(report.accepted)} of {len(parsed.pairs)} pairs; rejections: {counts}")
    print(f"intake report: {report_path}")
    if len(report.accepted) == 0:
        raise _fail("quality control rejected every generated pair", EXIT_EMPTY_ACCEPT)
    accepted_path.write_bytes(corpus.serialize_dataset(report.accepted, "jsonl"))
    print(f"accepted pairs: {accepted_path}")
    return EXIT_OK


def _resolved_run_config(args, models: tuple[str, ...]) -> dict:
    return {
        "seed_data": args.seed_data,
        "generated_data": args.generated_data,
        "variant": args.variant,
        "models": list(models),
        "provider": {
            "kind": args.provider,
            "dimension": args.dim,
            "endpoint": args.endpoint,
            "cache": args.cache,
            "ngram_range": [args.ngram_min, args.ngram_max],
        },
        "smote": {
            "mode": args.smote_mode,
            "k_neighbors": args.k_neighbors,
            "target_ratio": args.target_ratio,
        },
        "folds": args.folds,
        "repeats": args.repeats,
        "seed": args.seed,
        "jobs": args.jobs,
    }


def cmd_run(args) -> int:
    if args.smote_global:
        args.smote_mode = "global"
    if args.variant == "seed+llm" and not args.generated_data:
        raise _fail(
            "variant 'seed+llm' needs --generated-data pointing at the accepted pairs",
            EXIT_BAD_RUN_CONFIG,
        )
    dataset = _load_file_dataset(args.seed_data, None)
    if args.variant == "seed+llm":
        generated = _load_file_dataset(
            args.generated_data, None, provenance=corpus.Provenance.LLM_GENERATED
        )
        dataset = corpus.merge_datasets(dataset, generated)

    provider = embedding.make_provider(_provider_from_args(args))
    try:
        features = embedding.embed_dataset(provider, dataset, cache_path=args.cache)
    except corpus.UnlabeledPair as exc:
        raise _fail(str(exc), EXIT_PARSE_ERROR)
    except embedding.EmbeddingError as exc:
        raise _fail(str(exc), EXIT_TRANSPORT)

    models = RUN_MODEL_ORDER if args.model == "all" else (args.model,)
    smote_config = SmoteConfig(
        k_neighbors=args.k_neighbors, target_ratio=args.target_ratio, rng_seed=args.seed
    )
    reports = []
    for kind in models:
        report = evaluation.evaluate_model(
            features,
            default_config(kind),
            n_folds=args.folds,
            n_repeats=args.repeats,
            rng_seed=args.seed,
            smote_config=smote_config,
            smote_mode=args.smote_mode,
            jobs=args.jobs,
            variant=args.variant,
        )
        reports.append(report)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    variant_tag = args.variant.replace("+", "_")
    run_payload = _tool_stamp(_resolved_run_config(args, models))
    run_payload["schema"] = evaluation.REPORT_SCHEMA
    run_payload["reports"] = [r.to_dict() for r in reports]
    report_path = out_dir / f"run_{variant_tag}.json"
    _write_json(report_path, run_payload)

    table = evaluation.render_report_table(reports)
    table_path = out_dir / f"table_{variant_tag}.txt"
    table_path.write_text(table, encoding="utf-8")
    print(table, end="")
    print(f"report: {report_path}")
    print(f"table:  {table_path}")
    return EXIT_OK


def _load_run_reports(path_str: str):
    path = Path(path_str)
    if not path.exists():
        raise _fail(f"report file not found: {path}", EXIT_MISSING_INPUT)
    payload = json.loads(path.read_text(encoding="utf-8"))
    try:
        return [evaluation.EvaluationReport.from_dict(r) for r in payload["reports"]]
    except (KeyError, evaluation.SchemaMismatch) as exc:
        raise _fail(f"{path}: not a valid run report ({exc})", EXIT_SCHEMA_MISMATCH)


def cmd_compare(args) -> int:
    baseline = _load_run_reports(args.baseline)
    augmented = _load_run_reports(args.augmented)
    try:
        comparison = evaluation.compare_reports(baseline, augmented)
    except evaluation.SchemaMismatch as exc:
        raise _fail(str(exc), EXIT_SCHEMA_MISMATCH)
    payload = comparison.to_dict()
    payload.update(_tool_stamp({"baseline": args.baseline, "augmented": args.augmented}))
    out = Path(args.out) if args.out else Path(args.augmented).parent / "comparison.json"
    _write_json(out, payload)
    print(evaluation.render_comparison_table(comparison), end="")
    print(f"comparison: {out}")
    return EXIT_OK


def _add_provider_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--provider", choices=("hashed_ngram", "remote", "precomputed"))
    parser.add_argument("--dim", type=int, help="embedding dimension (default 768)")
    parser.add_argument("--endpoint", help="sidecar base URL for the remote provider")
    parser.add_argument("--cache", help="JSONL vector cache path")
    parser.add_argument("--ngram-min", type=int, help="smallest hashed n-gram length")
    parser.add_argument("--ngram-max", type=int, help="largest hashed n-gram length")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccq", description="Code comment quality classification toolkit"
    )
    parser.add_argument("--version", action="version", version=f"ccq {__version__}")
    parser.add_argument("--config", help="JSON file with default option values")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="validate a dataset file and cache it")
    p_ingest.add_argument("path")
    p_ingest.add_argument("--format", choices=("csv", "jsonl"))
    p_ingest.add_argument("--out", help="where to write the validated JSONL cache")
    p_ingest.set_defaults(func=cmd_ingest)

    p_stats = sub.add_parser("stats", help="print the class distribution")
    p_stats.add_argument("path")
    p_stats.add_argument("--format", choices=("csv", "jsonl"))
    p_stats.set_defaults(func=cmd_stats)

    p_embed = sub.add_parser("embed", help="embed a dataset into a vector cache")
    p_embed.add_argument("--dataset", required=True)
    p_embed.add_argument("--format", choices=("csv", "jsonl"))
    _add_provider_arguments(p_embed)
    p_embed.add_argument("--seed", type=int, help="hashed provider seed")
    p_embed.set_defaults(func=cmd_embed)

    p_augment = sub.add_parser("augment", help="generate/ingest LLM pairs with QC")
    p_augment.add_argument("--n-pairs", type=int, help="pairs to request (default 3000)")
    p_augment.add_argument("--language", help="target language (default C)")
    p_augment.add_argument("--label-split", type=float, help="requested Useful share")
    p_augment.add_argument("--from-file", help="read raw generation output from a file")
    p_augment.add_argument("--endpoint", help="completion endpoint URL")
    p_augment.add_argument("--model", help="completion model name")
    p_augment.add_argument("--audit-log", help="JSONL request/response audit path")
    p_augment.add_argument("--existing", help="existing corpus for cross-deduplication")
    p_augment.add_argument("--out-dir", help="output directory (default .)")
    p_augment.set_defaults(func=cmd_augment)

    p_run = sub.add_parser("run", help="embed, balance, cross-validate and report")
    p_run.add_argument("--seed-data", required=True, help="labeled corpus file")
    p_run.add_argument("--generated-data", help="accepted LLM pairs (for seed+llm)")
    p_run.add_argument("--variant", choices=("seed", "seed+llm"))
    p_run.add_argument("--model", choices=MODEL_CHOICES)
    _add_provider_arguments(p_run)
    p_run.add_argument("--smote-mode", choices=("fold", "global", "none"))
    p_run.add_argument(
        "--smote-global",
        action="store_true",
        help="balance the whole dataset before splitting (same as --smote-mode global)",
    )
    p_run.add_argument("--k-neighbors", type=int, help="SMOTE neighbours (default 5)")
    p_run.add_argument("--target-ratio", type=float, help="minority/majority target")
    p_run.add_argument("--folds", type=int)
    p_run.add_argument("--repeats", type=int)
    p_run.add_argument("--seed", type=int, help="top-level rng seed (default 42)")
    p_run.add_argument("--jobs", type=int, help="parallel fold workers")
    p_run.add_argument("--out-dir", help="output directory (default .)")
    p_run.set_defaults(func=cmd_run)

    p_compare = sub.add_parser("compare", help="delta table between two run reports")
    p_compare.add_argument("baseline")
    p_compare.add_argument("augmented")
    p_compare.add_argument("--out", help="comparison JSON path")
    p_compare.set_defaults(func=cmd_compare)

    return parser


# Built-in defaults, overridable by the config file, overridden by flags.
_DEFAULTS = {
    "format": None,
    "out": None,
    "provider": "hashed_ngram",
    "dim": 768,
    "endpoint": None,
    "cache": None,
    "ngram_min": 3,
    "ngram_max": 5,
    "n_pairs": 3000,
    "language": "C",
    "label_split": 0.5,
    "from_file": None,
    "audit_log": None,
    "existing": None,
    "out_dir": ".",
    "variant": "seed",
    "smote_mode": "fold",
    "k_neighbors": 5,
    "target_ratio": 1.0,
    "folds": 10,
    "repeats": 3,
    "seed": 42,
    "jobs": 1,
    "generated_data": None,
}

# --model means different things to run (classifier set) and augment
# (completion model name), so its default is per command.
_MODEL_DEFAULTS = {"run": "all", "augment": "gpt-3.5-turbo"}


def _apply_defaults(args: argparse.Namespace) -> argparse.Namespace:
    file_values = {}
    if getattr(args, "config", None):
        config_path = Path(args.config)
        if not config_path.exists():
            raise _fail(f"config file not found: {config_path}", EXIT_MISSING_INPUT)
        file_values = json.loads(config_path.read_text(encoding="utf-8"))
        if not isinstance(file_values, dict):
            raise _fail("config file must contain a JSON object", EXIT_BAD_RUN_CONFIG)

    def resolve(key: str, built_in):
        if getattr(args, key, None) is None and hasattr(args, key):
            setattr(args, key, file_values.get(key.replace("_", "-"), file_values.get(key, built_in)))

    for key, built_in in _DEFAULTS.items():
        resolve(key, built_in)
    resolve("model", _MODEL_DEFAULTS.get(getattr(args, "command", ""), None))
    return args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_defaults(args)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
