"""Command-line surface: train, extend, stats, tasks, eval, report.

Exit codes: 0 success, 2 input error, 3 incompatible models, 4 offline-score
join failure, 5 duplicate series point. Every output file gets a
<output>.manifest.json sidecar recording the command, its configuration, and
a digest of all semantic inputs.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import extension, metrics, report, tasks
from .errors import (
    BoundaryMerge,
    ConfigError,
    DuplicateSeries,
    EmptyCorpus,
    EmptyInput,
    IncompatibleModels,
    InvalidModel,
    InvalidScore,
    JoinError,
    KindConflict,
    MissingSymbol,
    ParseError,
)
from .manifest import build_manifest, write_manifest
from .models import NGramModel, SuffixModel, UniformModel, load_offline_scores, ngram_train
from .tokenizer import MARKER, TokenizerModel, nfc
from .trainer import TrainerConfig, train

_INPUT_ERRORS = (
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
    InvalidModel,
    EmptyCorpus,
    ConfigError,
    EmptyInput,
    ParseError,
    InvalidScore,
    MissingSymbol,
    BoundaryMerge,
    ValueError,
)


def _read_lines(path: str, apply_nfc: bool) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    lines = [line for line in lines if line.strip()]
    if apply_nfc:
        lines = [nfc(line) for line in lines]
    return lines


def cmd_train(args: argparse.Namespace) -> int:
    corpus = _read_lines(args.corpus, args.nfc)
    config = TrainerConfig(
        target_vocab_size=args.vocab_size,
        min_pair_frequency=args.min_pair_freq,
        marker=args.marker,
    )
    model = train(corpus, config)
    model.save(args.out)
    manifest = build_manifest(
        "train",
        {"corpus": args.corpus},
        {
            "vocab_size": args.vocab_size,
            "min_pair_freq": args.min_pair_freq,
            "marker": args.marker,
            "nfc": args.nfc,
        },
    )
    write_manifest(manifest, args.out)
    print(f"wrote tokenizer with {model.vocab_size} tokens to {args.out}", file=sys.stderr)
    return 0


def cmd_extend(args: argparse.Namespace) -> int:
    base = TokenizerModel.load(args.base)
    addon = TokenizerModel.load(args.addon)
    extended = extension.extend(base, addon)
    extended.save(args.out)
    manifest = build_manifest("extend", {"base": args.base, "addon": args.addon}, {})
    write_manifest(manifest, args.out)
    print(
        f"extended {base.vocab_size} -> {extended.vocab_size} tokens, "
        f"{len(base.merges)} -> {len(extended.merges)} merges",
        file=sys.stderr,
    )
    return 0


def _parse_tokenizer_arg(spec: str) -> tuple[str, str]:
    if "=" in spec:
        label, path = spec.split("=", 1)
        return label, path
    return Path(spec).stem, spec


def cmd_stats(args: argparse.Namespace) -> int:
    sentences = _read_lines(args.sentences, args.nfc)
    if not sentences:
        raise EmptyInput(f"no sentences in {args.sentences}")
    labeled = [_parse_tokenizer_arg(spec) for spec in args.tokenizer]
    models = [(label, TokenizerModel.load(path)) for label, path in labeled]
    extended_labels = set(args.extended or [])
    unknown = extended_labels - {label for label, _ in labeled}
    if unknown:
        raise ValueError(f"--extended labels not among tokenizers: {sorted(unknown)}")
    rows = extension.compare(
        models, sentences, extended=[label in extended_labels for label, _ in labeled]
    )
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        extension.write_comparison_csv(rows, fh)
    manifest = build_manifest(
        "stats",
        {f"tokenizer:{label}": path for label, path in labeled}
        | {"sentences": args.sentences},
        {"extended": sorted(extended_labels), "nfc": args.nfc},
    )
    write_manifest(manifest, args.out)
    return 0


def cmd_tasks(args: argparse.Namespace) -> int:
    sentences = tasks.read_sentences(args.sentences)
    if args.nfc:
        sentences = [
            tasks.TestSentence(s.id, nfc(s.prefix), nfc(s.target), nfc(s.suffix))
            for s in sentences
        ]
    base = TokenizerModel.load(args.base)
    ext = TokenizerModel.load(args.ext)
    items, exclusions = tasks.build_tasks(sentences, base, ext, separator=args.separator)
    tasks.write_tasks(items, args.out)
    exclusions_path = Path(args.out).with_suffix(Path(args.out).suffix + ".exclusions")
    tasks.write_exclusions(exclusions, exclusions_path)
    manifest = build_manifest(
        "tasks",
        {"sentences": args.sentences, "base": args.base, "ext": args.ext},
        {"separator": args.separator, "nfc": args.nfc},
    )
    write_manifest(manifest, args.out)
    print(
        f"compiled {len(items)} task items ({len(exclusions)} sentences excluded)",
        file=sys.stderr,
    )
    return 0


def _build_scorer(spec: str, tokenizer: TokenizerModel):
    """Parse a model spec: uniform | ngram:<corpus,order,k> | suffix:<corpus> | offline:<path>."""
    kind, _, rest = spec.partition(":")
    if kind == "uniform":
        return UniformModel(tokenizer.vocab_size), None
    if kind == "ngram":
        parts = rest.split(",")
        if len(parts) != 3:
            raise ValueError(f"ngram spec needs <corpus,order,k>, got {rest!r}")
        corpus_path, order, k = parts[0], int(parts[1]), float(parts[2])
        sequences = [tokenizer.encode(line) for line in _read_lines(corpus_path, False)]
        return ngram_train(sequences, order, k, vocab_size=tokenizer.vocab_size), corpus_path
    if kind == "suffix":
        if not rest:
            raise ValueError("suffix spec needs <corpus>")
        sequences = [tokenizer.encode(line) for line in _read_lines(rest, False)]
        return SuffixModel(sequences, tokenizer.vocab_size), rest
    if kind == "offline":
        if not rest:
            raise ValueError("offline spec needs <scores_path>")
        return load_offline_scores(rest), rest
    raise ValueError(f"unknown model spec {spec!r}")


def cmd_eval(args: argparse.Namespace) -> int:
    tokenizer = TokenizerModel.load(args.tokenizer)
    items = sorted(tasks.read_tasks(args.tasks), key=lambda item: item.id)
    scorer, corpus_path = _build_scorer(args.model, tokenizer)

    all_records: list[metrics.StepRecord] = []
    results: list[metrics.ItemResult] = []
    if isinstance(scorer, list):  # offline score records
        by_key = {}
        for record in scorer:
            key = (record.item_id, record.step_index)
            if key in by_key:
                raise InvalidScore(f"duplicate offline score for {key}")
            by_key[key] = record
        missing: list[str] = []
        for item in items:
            try:
                records, item_missing = metrics.score_item_offline(tokenizer, item, by_key)
            except (BoundaryMerge, EmptyInput) as exc:
                print(f"excluded {item.id}: {exc}", file=sys.stderr)
                continue
            if item_missing:
                missing.extend(item_missing)
                continue
            all_records.extend(records)
            results.append(metrics.item_result(item.id, records))
        if missing:
            raise JoinError(
                f"offline scores missing for {len(missing)} step(s): "
                + ", ".join(missing[:20])
                + ("..." if len(missing) > 20 else ""),
                missing,
            )
    else:
        for item in items:
            try:
                records = metrics.score_item(scorer, tokenizer, item)
            except (BoundaryMerge, EmptyInput) as exc:
                print(f"excluded {item.id}: {exc}", file=sys.stderr)
                continue
            all_records.extend(records)
            results.append(metrics.item_result(item.id, records))

    aggregates = metrics.aggregate(results, items)
    steps_path = f"{args.out}.steps.jsonl"
    agg_path = f"{args.out}.aggregates.csv"
    all_records.sort(key=lambda r: (r.item_id, r.position))
    metrics.write_step_records(all_records, steps_path)
    with open(agg_path, "w", encoding="utf-8", newline="") as fh:
        metrics.write_aggregates_csv(aggregates, fh)

    inputs = {"tasks": args.tasks, "tokenizer": args.tokenizer}
    if corpus_path is not None:
        inputs["model_data"] = corpus_path
    manifest = build_manifest("eval", inputs, {"model": args.model})
    write_manifest(manifest, args.out)
    print(
        f"evaluated {len(results)} items -> {steps_path}, {agg_path}",
        file=sys.stderr,
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    checkpoints = []
    for path, label, step in args.input:
        checkpoints.append((label, int(step), metrics.read_aggregates_csv(path)))
    points = report.build_series(checkpoints)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        report.write_series_csv(points, fh)
    manifest = build_manifest(
        "report",
        {f"aggregates:{label}": path for path, label, _ in args.input},
        {"labels": [[label, int(step)] for _, label, step in args.input]},
    )
    write_manifest(manifest, args.out)
    if not args.no_figures:
        from .figures import render_series_figures

        stem = Path(args.out).with_suffix("")
        written = render_series_figures(points, stem)
        for path in written:
            print(f"wrote figure {path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tokext",
        description="Byte-fallback BPE tokenizer extension and NTP evaluation toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a BPE tokenizer on a line-per-sentence corpus")
    p.add_argument("--corpus", required=True, help="UTF-8 text, one sentence per line")
    p.add_argument("--vocab-size", type=int, required=True, help="target vocabulary size")
    p.add_argument("--min-pair-freq", type=int, default=2)
    p.add_argument("--marker", default=MARKER, help="word-boundary marker character")
    p.add_argument("--nfc", action="store_true", help="NFC-normalize input text")
    p.add_argument("--out", required=True, help="tokenizer file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("extend", help="append addon vocabulary and merges to a base tokenizer")
    p.add_argument("--base", required=True)
    p.add_argument("--addon", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("stats", help="unknown-token rate and tokens/sentence per tokenizer")
    p.add_argument(
        "--tokenizer",
        action="append",
        required=True,
        metavar="[LABEL=]PATH",
        help="tokenizer file, repeatable; label defaults to the file stem",
    )
    p.add_argument("--sentences", required=True, help="UTF-8 text, one sentence per line")
    p.add_argument(
        "--extended",
        action="append",
        metavar="LABEL",
        help="mark this tokenizer label as extended in the output",
    )
    p.add_argument("--nfc", action="store_true")
    p.add_argument("--out", required=True, help="CSV to write")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("tasks", help="compile test sentences into easy/hard task items")
    p.add_argument("--sentences", required=True, help="JSONL of {id, prefix, target, suffix}")
    p.add_argument("--base", required=True, help="base tokenizer file")
    p.add_argument("--ext", required=True, help="extended tokenizer file")
    p.add_argument(
        "--separator",
        default=tasks.DEFAULT_SEPARATOR,
        help="string between the full sentence and the repeated prefix in easy inputs",
    )
    p.add_argument("--nfc", action="store_true")
    p.add_argument("--out", required=True, help="tasks JSONL; exclusions go to <out>.exclusions")
    p.set_defaults(func=cmd_tasks)

    p = sub.add_parser("eval", help="teacher-forced evaluation of task items")
    p.add_argument("--tasks", required=True)
    p.add_argument("--tokenizer", required=True)
    p.add_argument(
        "--model",
        required=True,
        help="uniform | ngram:<corpus,order,k> | suffix:<corpus> | offline:<scores.jsonl>",
    )
    p.add_argument(
        "--out",
        required=True,
        help="output prefix; writes <out>.steps.jsonl and <out>.aggregates.csv",
    )
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="flatten per-checkpoint aggregates into a metric series")
    p.add_argument(
        "--input",
        nargs=3,
        action="append",
        required=True,
        metavar=("PATH", "LABEL", "STEP"),
        help="aggregate CSV with its checkpoint label and training step; repeatable",
    )
    p.add_argument("--out", required=True, help="series CSV to write")
    p.add_argument(
        "--no-figures",
        action="store_true",
        help="skip rendering the per-metric PNG figures next to the CSV",
    )
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IncompatibleModels, KindConflict) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except JoinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except DuplicateSeries as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
