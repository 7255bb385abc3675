"""Command-line interface for the full pipeline.

Reports are written as JSON with a stable key order (good for golden-file
diffs); a human-readable summary goes to stderr. Exit codes: 0 success,
1 data error, 2 usage error. All randomness is controlled by --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .backends import (
    ENDPOINT_ENV_VAR,
    GenerationRequest,
    HttpBackend,
    OracleBackend,
    PerturbBackend,
    PerturbConfig,
)
from .core import CategoryVocab, Example, Polarity, SentiquadError, Task
from .dataio import (
    DEFAULT_ORDERS,
    compute_stats,
    derive_polarity_lexicon,
    import_delimited,
    merge_annotations,
    mix_tasks,
    read_examples,
    sample_count,
    sample_fraction,
    split_train_dev,
    write_examples,
)
from .linearize import ProjectionMode, build_input, build_target
from .recover import ParsedQuad, RecoveryResult, recover_quads
from .scoring import COUNT_MODES, categorize_errors, score


def _add_common_render_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", default="natural",
                        help="projection mode: natural, symbolic-polarity, "
                             "symbolic-category, symbolic-both, plain-tuple")
    parser.add_argument("--vocab", help="category vocabulary file (one per line)")
    parser.add_argument("--lexicon",
                        help="JSON file overriding polarity words, "
                             'e.g. {"positive": "good", ...}')


def _load_vocab(args, examples=None) -> CategoryVocab | None:
    if args.vocab:
        return CategoryVocab.from_file(args.vocab)
    if examples:
        try:
            return CategoryVocab.from_examples(examples)
        except ValueError:
            return None  # no categories in the data (e.g. ASTE)
    return None


def _load_lexicon(args) -> dict[Polarity, str] | None:
    if not getattr(args, "lexicon", None):
        return None
    raw = json.loads(Path(args.lexicon).read_text(encoding="utf-8"))
    return {Polarity.from_label(k): v for k, v in raw.items()}


def _resolve_lexicon(args, examples) -> dict[Polarity, str] | None:
    lexicon = _load_lexicon(args)
    if lexicon is None and getattr(args, "derive_lexicon", False):
        lexicon = derive_polarity_lexicon(examples)
    return lexicon


def _mode(args) -> ProjectionMode:
    return ProjectionMode.from_label(args.mode)


def _single_task(examples: list[Example], override: str | None) -> Task:
    if override:
        return Task.from_label(override)
    tasks = {ex.task for ex in examples}
    if len(tasks) != 1:
        raise SentiquadError(
            "examples mix tasks; pass --task to pick one explicitly"
        )
    return tasks.pop()


def _emit_report(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _summary_line(report: dict) -> str:
    return "  ".join(
        f"{k}={report[k]:.4f}" if isinstance(report[k], float) else f"{k}={report[k]}"
        for k in ("precision", "recall", "f1", "tp", "n_pred", "n_gold")
        if k in report
    )


def _write_pairs(pairs, path: str, fmt: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for source, target, task in pairs:
            if fmt == "tsv":
                handle.write(f"{source}\t{target}\n")
            else:
                handle.write(json.dumps(
                    {"input": source, "target": target, "task": task.label},
                    ensure_ascii=False,
                ) + "\n")


def _quad_json(parsed: ParsedQuad) -> dict:
    return {
        "category": parsed.category,
        "aspect": parsed.aspect,
        "opinion": parsed.opinion,
        "polarity": parsed.polarity.label if parsed.polarity else None,
        "polarity_word": parsed.polarity_word,
        "flags": {
            "in_vocab_category": parsed.in_vocab_category,
            "known_polarity_word": parsed.known_polarity_word,
            "aspect_is_span_or_pronoun": parsed.aspect_is_span_or_pronoun,
            "opinion_is_span": parsed.opinion_is_span,
        },
    }


def _recovery_json(result: RecoveryResult) -> dict:
    return {
        "quads": [_quad_json(q) for q in result.quads],
        "failures": [{"segment": f.segment, "reason": f.reason} for f in result.failures],
        "ambiguous_splits": result.ambiguous_splits,
    }


# ---------------------------------------------------------------- subcommands


def cmd_build_targets(args) -> int:
    examples = read_examples(args.input)
    if args.task:
        task = Task.from_label(args.task)
        examples = [ex.as_task(task) for ex in examples]
    mode, lexicon = _mode(args), _resolve_lexicon(args, examples)
    vocab = _load_vocab(args, examples)
    pairs = [
        (
            build_input(ex.sentence, ex.task, transfer=args.transfer_suffix),
            build_target(ex, mode=mode, vocab=vocab, lexicon=lexicon).text,
            ex.task,
        )
        for ex in examples
    ]
    _write_pairs(pairs, args.output, args.format)
    print(f"wrote {len(pairs)} pairs to {args.output}", file=sys.stderr)
    return 0


def cmd_parse(args) -> int:
    mode, lexicon = _mode(args), _load_lexicon(args)
    vocab = _load_vocab(args)
    task = Task.from_label(args.task)
    results = []
    with open(args.input, encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            sentence = None
            target = line
            if args.format == "jsonl":
                obj = json.loads(line)
                target = obj["target"]
                sentence = obj.get("sentence")
            results.append(recover_quads(
                target, task, vocab=vocab, sentence=sentence,
                mode=mode, lexicon=lexicon, strict=args.strict,
            ))
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        for result in results:
            out.write(json.dumps(_recovery_json(result), ensure_ascii=False) + "\n")
    finally:
        if args.output:
            out.close()
    n_quads = sum(len(r.quads) for r in results)
    n_failures = sum(len(r.failures) for r in results)
    print(f"parsed {len(results)} generations: {n_quads} quads, "
          f"{n_failures} failures", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    preds = read_examples(args.pred)
    golds = read_examples(args.gold)
    result = score([ex.quad_keys() for ex in preds], [ex.quad_keys() for ex in golds])
    report = {"n_examples": len(golds), **result.as_dict()}
    _emit_report(report, args.out)
    print(_summary_line(report), file=sys.stderr)
    return 0


def _read_generations(path: str) -> list[str]:
    with open(path, encoding="utf-8") as handle:
        return [line.rstrip("\n") for line in handle]


def cmd_analyze_errors(args) -> int:
    golds = read_examples(args.gold)
    generations = _read_generations(args.generated)
    if len(generations) != len(golds):
        raise SentiquadError(
            f"{len(generations)} generations vs {len(golds)} gold examples"
        )
    mode, lexicon = _mode(args), _load_lexicon(args)
    vocab = _load_vocab(args, golds)
    recovered = [
        recover_quads(text, ex.task, vocab=vocab, sentence=ex.sentence,
                      mode=mode, lexicon=lexicon, strict=False)
        for text, ex in zip(generations, golds)
    ]
    result = score([r.keys() for r in recovered], [ex.quad_keys() for ex in golds])
    breakdown = categorize_errors(
        [r.quads for r in recovered], [ex.quads for ex in golds],
        count_mode=args.count_mode,
    )

    diagnostics = []
    for index, (ex, rec) in enumerate(zip(golds, recovered)):
        gold_keys = ex.quad_keys()
        wrong = [q for q in rec.quads if q.key() not in gold_keys]
        pred_keys = rec.keys()
        missed = [q for q in ex.quads if q.key() not in pred_keys]
        if not wrong and not missed and not rec.failures:
            continue
        diagnostics.append({
            "index": index,
            "sentence": ex.sentence,
            "n_gold": len(ex.quads),
            "n_pred": len(rec.quads),
            "wrong_predictions": [_quad_json(q) for q in wrong],
            "missed_gold": [
                {"category": q.category, "aspect": q.aspect,
                 "opinion": q.opinion, "polarity": q.polarity.label}
                for q in missed
            ],
            "failures": [{"segment": f.segment, "reason": f.reason} for f in rec.failures],
            "n_errors": len(wrong) + len(missed) + len(rec.failures),
        })
    rng = random.Random(args.seed)
    worst = sorted(diagnostics, key=lambda d: -d["n_errors"])
    sample_size = min(args.sample, len(worst))
    worst_cases = sorted(
        rng.sample(worst[: max(sample_size * 3, sample_size)], sample_size),
        key=lambda d: d["index"],
    ) if worst else []

    report = {
        "n_examples": len(golds),
        "count_mode": args.count_mode,
        **{f"score_{k}": v for k, v in result.as_dict().items()},
        "errors": breakdown.as_dict(),
        "per_example": diagnostics,
        "worst_cases": worst_cases,
    }
    _emit_report(report, args.out)
    print(
        f"wrong={breakdown.total_wrong} aspect={breakdown.aspect_term} "
        f"opinion={breakdown.opinion_term} category={breakdown.category} "
        f"polarity={breakdown.polarity} generation={breakdown.generation}",
        file=sys.stderr,
    )
    return 0


def cmd_import(args) -> int:
    task = Task.from_label(args.task)
    examples = import_delimited(args.input, task, order=args.order)
    write_examples(examples, args.output)
    print(f"imported {len(examples)} examples to {args.output}", file=sys.stderr)
    return 0


def cmd_merge(args) -> int:
    src_opinion = read_examples(args.opinion)
    src_category = read_examples(args.category)
    merged, conflicts = merge_annotations(src_opinion, src_category)
    write_examples(merged, args.output)
    if args.conflicts_out:
        with open(args.conflicts_out, "w", encoding="utf-8") as handle:
            for c in conflicts:
                handle.write(json.dumps({
                    "sentence": c.sentence,
                    "aspect": c.aspect,
                    "polarity": c.polarity.label,
                    "categories": list(c.categories),
                    "opinions": list(c.opinions),
                }, ensure_ascii=False) + "\n")
    print(f"merged {len(merged)} examples, {len(conflicts)} conflicts", file=sys.stderr)
    return 0


def cmd_split(args) -> int:
    examples = read_examples(args.input)
    train, dev = split_train_dev(examples, args.dev_ratio, args.seed)
    write_examples(train, args.train_out)
    write_examples(dev, args.dev_out)
    print(f"split {len(examples)} -> {len(train)} train / {len(dev)} dev",
          file=sys.stderr)
    return 0


def cmd_stats(args) -> int:
    split_files = [(name, getattr(args, name)) for name in ("train", "dev", "test")]
    if not any(path for _, path in split_files):
        raise SentiquadError("pass at least one of --train/--dev/--test")
    splits = {name: read_examples(path) for name, path in split_files if path}
    stats = compute_stats(splits)
    _emit_report({"splits": stats.as_dict()}, args.out)
    header = f"{'':>8}  {'#S':>6} {'#+':>6} {'#0':>6} {'#-':>6}"
    print(header, file=sys.stderr)
    for name, row in stats.splits:
        print(f"{name.capitalize():>8}  {row.n_sentences:>6} {row.n_pos:>6} "
              f"{row.n_neu:>6} {row.n_neg:>6}", file=sys.stderr)
    return 0


def cmd_sample(args) -> int:
    examples = read_examples(args.input)
    if (args.ratio is None) == (args.count is None):
        raise SentiquadError("pass exactly one of --ratio or --count")
    if args.ratio is not None:
        sampled = sample_fraction(examples, args.ratio, args.seed)
    else:
        sampled = sample_count(examples, args.count, args.seed)
    write_examples(sampled, args.output)
    print(f"sampled {len(sampled)} of {len(examples)} examples", file=sys.stderr)
    return 0


def cmd_transfer_mix(args) -> int:
    datasets = []
    pooled: list[Example] = []
    for path in args.data:
        examples = read_examples(path)
        task = _single_task(examples, None)
        datasets.append((examples, task))
        pooled.extend(examples)
    mode, lexicon = _mode(args), _resolve_lexicon(args, pooled)
    vocab = _load_vocab(args, pooled)
    pairs = mix_tasks(datasets, mode=mode, vocab=vocab, lexicon=lexicon, seed=args.seed)
    _write_pairs(pairs, args.output, args.format)
    print(f"mixed {len(pairs)} pairs from {len(datasets)} datasets", file=sys.stderr)
    return 0


def _make_backend(args, examples, mode, vocab, lexicon):
    if args.backend == "oracle":
        return OracleBackend(examples, mode=mode, vocab=vocab, lexicon=lexicon,
                             transfer=args.transfer_suffix)
    if args.backend == "perturb":
        config = PerturbConfig(rho=args.rho, seed=args.seed)
        return PerturbBackend(examples, config, mode=mode, vocab=vocab,
                              lexicon=lexicon, transfer=args.transfer_suffix)
    endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV_VAR)
    if not endpoint:
        raise SentiquadError(
            f"http backend needs --endpoint or ${ENDPOINT_ENV_VAR}"
        )
    return HttpBackend(endpoint, max_batch=args.batch_size)


def cmd_e2e(args) -> int:
    examples = read_examples(args.data)
    if args.task:
        task = Task.from_label(args.task)
        examples = [ex.as_task(task) for ex in examples]
    else:
        task = _single_task(examples, None)
    mode, lexicon = _mode(args), _resolve_lexicon(args, examples)
    vocab = _load_vocab(args, examples)
    backend = _make_backend(args, examples, mode, vocab, lexicon)

    inputs = [build_input(ex.sentence, ex.task, transfer=args.transfer_suffix)
              for ex in examples]
    batches = [inputs[i:i + args.batch_size]
               for i in range(0, len(inputs), args.batch_size)]
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        outputs = [
            text
            for batch_out in pool.map(
                lambda b: backend.generate(GenerationRequest(tuple(b), task)), batches
            )
            for text in batch_out
        ]

    recovered = [
        recover_quads(text, ex.task, vocab=vocab, sentence=ex.sentence,
                      mode=mode, lexicon=lexicon, strict=args.strict)
        for text, ex in zip(outputs, examples)
    ]
    result = score([r.keys() for r in recovered], [ex.quad_keys() for ex in examples])
    report = {
        "task": task.label,
        "mode": mode.value,
        "backend": args.backend,
        "strict": args.strict,
        "seed": args.seed,
        "n_examples": len(examples),
        **result.as_dict(),
        "parse_failures": sum(len(r.failures) for r in recovered),
        "ambiguous_splits": sum(r.ambiguous_splits for r in recovered),
    }
    _emit_report(report, args.out)
    print(_summary_line(report), file=sys.stderr)
    return 0


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentiquad",
        description="Sentiment quad linearization, recovery, and evaluation toolkit.",
    )
    parser.add_argument("--config", help="JSON config file mirroring flags; "
                                         "explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-targets", help="render (input, target) training pairs")
    p.add_argument("--in", dest="input", required=True, help="examples JSONL")
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--task", help="re-tag examples for this task")
    p.add_argument("--transfer-suffix", action="store_true",
                   help="append the task token to each input")
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    p.add_argument("--derive-lexicon", action="store_true",
                   help="use the most common opinion term per polarity "
                        "as the polarity words")
    _add_common_render_args(p)
    p.set_defaults(func=cmd_build_targets)

    p = sub.add_parser("parse", help="recover quads from generated sequences")
    p.add_argument("--in", dest="input", required=True,
                   help="generations: text lines or JSONL with target/sentence")
    p.add_argument("--out", dest="output")
    p.add_argument("--task", required=True)
    p.add_argument("--format", choices=("text", "jsonl"), default="text")
    p.add_argument("--strict", action="store_true",
                   help="drop quads with any invalid element")
    _add_common_render_args(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("evaluate", help="exact-match F1 of predictions vs gold")
    p.add_argument("--pred", required=True, help="predictions JSONL (example schema)")
    p.add_argument("--gold", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("analyze-errors",
                       help="score generations and tally mistake types")
    p.add_argument("--gold", required=True)
    p.add_argument("--generated", required=True,
                   help="generated sequences, one per gold example")
    p.add_argument("--count-mode", choices=COUNT_MODES, default="overlapping")
    p.add_argument("--sample", type=int, default=10,
                   help="number of worst cases to include")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    _add_common_render_args(p)
    p.set_defaults(func=cmd_analyze_errors)

    p = sub.add_parser("import", help="convert '<sentence>####[tuples]' lines to JSONL")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--order", help="tuple element order, e.g. "
                   + ", ".join(f"{t.label}: {o}" for t, o in DEFAULT_ORDERS.items()))
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("merge", help="join opinion and category annotation sources")
    p.add_argument("--opinion", required=True, help="JSONL with (aspect, opinion, polarity)")
    p.add_argument("--category", required=True, help="JSONL with (category, aspect, polarity)")
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--conflicts-out")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("split", help="seeded train/dev split")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--train-out", required=True)
    p.add_argument("--dev-out", required=True)
    p.add_argument("--dev-ratio", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="per-split sentence and polarity counts")
    p.add_argument("--train")
    p.add_argument("--dev")
    p.add_argument("--test")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("sample", help="seeded uniform subsample")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--ratio", type=float)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("transfer-mix",
                       help="mix task datasets into suffixed training pairs")
    p.add_argument("--data", action="append", required=True,
                   help="examples JSONL (repeatable; task read from the file)")
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--format", choices=("tsv", "jsonl"), default="tsv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--derive-lexicon", action="store_true",
                   help="use the most common opinion term per polarity "
                        "as the polarity words")
    _add_common_render_args(p)
    p.set_defaults(func=cmd_transfer_mix)

    p = sub.add_parser("e2e", help="build inputs, generate, recover, and score")
    p.add_argument("--data", required=True, help="gold examples JSONL")
    p.add_argument("--task")
    p.add_argument("--backend", choices=("oracle", "perturb", "http"), default="oracle")
    p.add_argument("--rho", type=float, default=0.0, help="perturb corruption rate")
    p.add_argument("--endpoint", help=f"http backend URL (or ${ENDPOINT_ENV_VAR})")
    p.add_argument("--transfer-suffix", action="store_true")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--derive-lexicon", action="store_true",
                   help="use the most common opinion term per polarity "
                        "as the polarity words")
    _add_common_render_args(p)
    p.set_defaults(func=cmd_e2e)

    return parser


def _config_path(argv: list[str]) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith("--config="):
            return arg.split("=", 1)[1]
    return None


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    path = _config_path(argv)
    if path is None:
        return
    config = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(config, dict):
        raise SentiquadError(f"{path}: config must be a JSON object")
    # Seed every subparser's defaults with matching config keys; explicit
    # flags still take precedence because defaults are consulted last.
    values = {k.replace("-", "_"): v for k, v in config.items()}
    for action in parser._subparsers._group_actions:  # noqa: SLF001
        for subparser in action.choices.values():
            matched = {}
            for sub_action in subparser._actions:  # noqa: SLF001
                if sub_action.dest in values:
                    matched[sub_action.dest] = values[sub_action.dest]
                    sub_action.required = False
            subparser.set_defaults(**matched)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except SentiquadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
