"""Command-line entry point: qtriage <train|crossval|classify|stats|kappa|gen-synthetic>."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import datetime, timezone

from .config import RunConfig, load_run_config
from .corpus import (
    SyntheticSpec,
    cohen_kappa,
    corpus_stats,
    gen_synthetic,
    load_corpus,
    save_corpus,
)
from .errors import ConfigError, DataError, QTriageError
from .evaluate import cross_validate, render_report
from .hierarchy import SINGLE_PATH, predict_strategy, train_strategy
from .modelio import load_model, save_model


def _emit_error(exc: Exception, kind: str) -> None:
    line = json.dumps({"error": kind, "message": str(exc)})
    print(line, file=sys.stderr)


def _load_config(args) -> RunConfig:
    overrides = {
        "seed": getattr(args, "seed", None),
        "folds": getattr(args, "folds", None),
        "strategy": getattr(args, "strategy", None),
        "algo": getattr(args, "algo", None),
        "algo_level1": getattr(args, "algo_level1", None),
        "algo_level2": getattr(args, "algo_level2", None),
    }
    return load_run_config(args.config, overrides)


def _require_corpus_path(cfg: RunConfig) -> str:
    if not cfg.corpus_path:
        raise ConfigError("config paths.corpus is required for this command")
    return cfg.corpus_path


def cmd_train(args) -> int:
    cfg = _load_config(args)
    corpus = load_corpus(_require_corpus_path(cfg))
    model = train_strategy(corpus, cfg.strategy_spec())
    out = args.out or cfg.model_path
    if not out:
        raise ConfigError("no model output path (use --out or config paths.model_out)")
    metadata = {
        "corpus_digest": corpus.digest(),
        "config_digest": cfg.digest(),
        "seed": cfg.seed,
        "label_counts": corpus.counts.as_dict(),
        "vocab_size": model.pipeline.vocab.size,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    save_model(model, out, metadata)
    counts = corpus.counts
    print(f"trained {cfg.strategy} [{'+'.join(k.value for k in cfg.algo_kinds())}] "
          f"on {counts.total - counts.unlabeled} labeled questions")
    print(f"label counts: irrelevant={counts.irrelevant} effective={counts.effective} "
          f"ineffective={counts.ineffective} unlabeled={counts.unlabeled}")
    print(f"vocabulary size: {model.pipeline.vocab.size}")
    print(f"model written to {out}")
    return 0


def cmd_crossval(args) -> int:
    cfg = _load_config(args)
    corpus = load_corpus(_require_corpus_path(cfg))
    report = cross_validate(
        corpus, cfg.strategy_spec(), cfg.folds, cfg.seed,
        level2_eval=cfg.level2_eval, config_digest=cfg.digest(),
    )
    out = args.out or cfg.report_path
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(render_report(report, "json"))
    print(render_report(report, args.format), end="")
    if out:
        print(f"report written to {out}")
    return 0


def cmd_classify(args) -> int:
    model, _ = load_model(args.model)
    out_fh = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8")
    try:
        with open(args.input, "r", encoding="utf-8") as in_fh:
            for lineno, line in enumerate(in_fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    if not isinstance(rec, dict):
                        raise ValueError("record must be a JSON object")
                    qid = rec.get("id")
                    text = rec.get("text")
                    if not isinstance(qid, str) or not isinstance(text, str):
                        raise ValueError("record needs string 'id' and 'text'")
                except (json.JSONDecodeError, ValueError) as exc:
                    err = {"line": lineno, "error": str(exc)}
                    out_fh.write(json.dumps(err) + "\n")
                    continue
                leaf, trace = predict_strategy(model, text)
                out = {k: v for k, v in rec.items()}
                out["leaf"] = leaf
                out["path_trace"] = trace
                out["scores"] = trace["levels"][-1]["scores"]
                out["alert"] = leaf == "Ineffective"
                out_fh.write(json.dumps(out) + "\n")
    finally:
        if out_fh is not sys.stdout:
            out_fh.close()
    return 0


def cmd_stats(args) -> int:
    corpus = load_corpus(args.corpus)
    counts = corpus_stats(corpus).as_dict()
    if args.format == "json":
        print(json.dumps(counts, sort_keys=True))
    else:
        for key in ("total", "irrelevant", "relevant", "effective",
                    "ineffective", "unlabeled"):
            print(f"{key}: {counts[key]}")
    return 0


def cmd_kappa(args) -> int:
    a, b = [], []
    try:
        with open(args.input, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            for i, row in enumerate(reader):
                if not row:
                    continue
                if len(row) < 3:
                    raise DataError(
                        f"{args.input}:{i + 1}: expected (id, label_a, label_b)"
                    )
                if i == 0 and [c.strip().lower() for c in row[:3]] == ["id", "label_a", "label_b"]:
                    continue
                a.append(row[1].strip())
                b.append(row[2].strip())
    except OSError as exc:
        raise DataError(f"cannot read {args.input}: {exc}") from None
    try:
        value = cohen_kappa(a, b)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    print(f"{value:.3f}")
    return 0


def cmd_gen_synthetic(args) -> int:
    try:
        spec = SyntheticSpec(
            counts={
                "Irrelevant": args.irrelevant,
                "Effective": args.effective,
                "Ineffective": args.ineffective,
            },
            vocab_size=args.vocab_size,
            separation=args.separation,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    corpus = gen_synthetic(spec, args.seed)
    save_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} questions to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtriage",
        description="Classify student forum questions as learning-irrelevant, "
                    "effective or ineffective.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_opts(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int)
        p.add_argument("--folds", type=int)
        p.add_argument("--strategy", choices=["flat", "single-path"])
        p.add_argument("--algo")
        p.add_argument("--algo-level1", dest="algo_level1")
        p.add_argument("--algo-level2", dest="algo_level2")

    p = sub.add_parser("train", help="fit a model on the full labeled corpus")
    add_config_opts(p)
    p.add_argument("--out", help="model output path (overrides paths.model_out)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("crossval", help="stratified k-fold evaluation")
    add_config_opts(p)
    p.add_argument("--out", help="report JSON path (overrides paths.report_out)")
    p.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("classify", help="label a JSONL stream of questions")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="output JSONL path, '-' for stdout")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("stats", help="label counts of a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("kappa", help="Cohen's kappa from a CSV of (id, label_a, label_b)")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("gen-synthetic", help="write a seeded synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--irrelevant", type=int, default=240)
    p.add_argument("--effective", type=int, default=366)
    p.add_argument("--ineffective", type=int, default=377)
    p.add_argument("--vocab-size", type=int, default=150)
    p.add_argument("--separation", type=float, default=1.0)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_gen_synthetic)

    return parser


_RENDER_FORMATS = {"text": "text_table", "json": "json", "csv": "csv"}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "crossval":
        args.format = _RENDER_FORMATS[args.format]
    try:
        return args.func(args)
    except ConfigError as exc:
        _emit_error(exc, "config")
        return exc.exit_code
    except DataError as exc:
        _emit_error(exc, "data")
        return exc.exit_code
    except QTriageError as exc:
        _emit_error(exc, "training")
        return exc.exit_code
    except ValueError as exc:
        _emit_error(exc, "config")
        return 2
    except OSError as exc:
        _emit_error(exc, "data")
        return 3


if __name__ == "__main__":
    sys.exit(main())
