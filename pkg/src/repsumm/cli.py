"""Command-line interface for the report-summarization pipeline.

Exit codes: 0 success, 1 validation error (bad data or configuration),
2 I/O or service error. A JSON config file (--config) can preset any
flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import clients, corpus, evalharness, extractor, labeling, synthetic
from .errors import RepsummError, TransportError, ValidationError
from .rouge import RougeConfig
from .textproc import TfidfVectorizer, tokenizer_from_spec


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("ratios must be three comma-separated numbers")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad ratios {text!r}") from None


def _tokenizer_arg(spec: str):
    if spec == "auto":
        return None
    return tokenizer_from_spec(spec)


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="repsumm", description=__doc__)
    parser.add_argument("--config", type=Path, help="JSON file presetting any flag by dest name")
    sub = parser.add_subparsers(dest="command", required=True)
    commands: dict[str, argparse.ArgumentParser] = {}

    p = commands["ingest"] = sub.add_parser("ingest", help="validate a JSONL corpus file")
    p.add_argument("corpus", type=Path)
    p.add_argument("--out", type=Path, help="rewrite the validated corpus here")

    p = commands["gen-synthetic"] = sub.add_parser("gen-synthetic", help="generate a synthetic corpus")
    p.add_argument("--funds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--monthlies", type=int, default=6)
    p.add_argument("--out", type=Path, default=Path("synthetic.jsonl"))
    p.add_argument("--truth", type=Path, help="where to write ground-truth key sentence ids")

    p = commands["split"] = sub.add_parser("split", help="grouped train/validation/test split")
    p.add_argument("corpus", type=Path)
    p.add_argument("--ratios", type=_parse_ratios, default=(0.7, 0.1, 0.2))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=Path, default=Path("splits"))

    p = commands["label"] = sub.add_parser("label", help="build similarity labels for train/validation")
    p.add_argument("--split-dir", type=Path, default=Path("splits"))
    p.add_argument("--backend", choices=["tfidf", "remote"], default="tfidf")
    p.add_argument("--tau", type=float, default=0.6)
    p.add_argument("--tokenizer", type=str, default="auto", help="auto, whitespace or char:N")
    p.add_argument("--out-dir", type=Path, default=Path("labeled"))
    p.add_argument("--service-url", type=str, default=None)

    p = commands["train"] = sub.add_parser("train", help="train the native sentence scorer")
    p.add_argument("--labeled-dir", type=Path, default=Path("labeled"))
    p.add_argument("--epochs", type=int, default=9)
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("scorer.json"))

    for name, help_text in (
        ("summarize", "write summaries for the test split"),
        ("evaluate", "run an experiment over the test split"),
    ):
        p = commands[name] = sub.add_parser(name, help=help_text)
        p.add_argument("--split-dir", type=Path, default=Path("splits"))
        p.add_argument("--method", choices=[m.value for m in evalharness.MethodId], default="ex-native")
        p.add_argument("--budget", type=str, default="tokens:256", help="tokens:N or sentences:K")
        p.add_argument("--scorer", type=Path, default=Path("scorer.json"))
        p.add_argument("--model", type=Path, default=Path("labeled/tfidf.json"))
        p.add_argument("--tokenizer", type=str, default="auto")
        p.add_argument("--service-url", type=str, default=None)
        if name == "summarize":
            p.add_argument("--out", type=Path, default=Path("summaries.jsonl"))
        else:
            p.add_argument("--out", type=Path, default=Path("report.csv"))
            p.add_argument("--markdown", type=Path, help="also write a Markdown table")
            p.add_argument("--dump", type=Path, help="per-group score dump (JSONL)")
            p.add_argument("--workers", type=int, default=4)

    return parser, commands


def _apply_config(commands: dict, config_path: Path | None) -> None:
    if config_path is None:
        return
    overrides = json.loads(config_path.read_text(encoding="utf-8"))
    if not isinstance(overrides, dict):
        raise ValidationError("config file must hold a JSON object")
    for p in commands.values():
        known = {a.dest for a in p._actions}
        p.set_defaults(**{k: v for k, v in overrides.items() if k in known})


def _load_artifacts(args):
    """Scorer + TFIDF model for ex-native; clients for remote methods."""
    method = evalharness.MethodId(args.method)
    budget = extractor.SummaryBudget.parse(args.budget)
    tokenizer = _tokenizer_arg(args.tokenizer)
    if method is evalharness.MethodId.EX_NATIVE:
        if not args.model.exists():
            raise evalharness.MissingArtifact(f"TFIDF model {args.model}")
        if not args.scorer.exists():
            raise evalharness.MissingArtifact(f"trained scorer {args.scorer}")
        model = TfidfVectorizer.load(args.model)
        scorer = extractor.LinearScorer.load(args.scorer)
        return method, lambda g: extractor.summarize_extractive(g, scorer, model, budget, tokenizer)
    base_url = args.service_url
    if method is evalharness.MethodId.EX_REMOTE:
        score_client = clients.RemoteScorerClient(base_url)
        embed_client = clients.EmbeddingClient(base_url)
        score_client.check_health()
        return method, lambda g: extractor.summarize_extractive_remote(
            g, score_client, embed_client, budget, tokenizer
        )
    gen_client = clients.GenerationClient(base_url)
    gen_client.check_health()
    return method, lambda g: extractor.summarize_abstractive(gen_client, g, tokenizer=tokenizer)


def _cmd_ingest(args) -> int:
    docs = corpus.ingest(args.corpus)
    groups = corpus.group(docs)
    if args.out:
        corpus.serialize(docs, args.out)
    print(f"ingested {len(docs)} documents in {len(groups)} groups from {args.corpus}")
    return 0


def _cmd_gen_synthetic(args) -> int:
    docs, truth = synthetic.generate_corpus(args.funds, seed=args.seed, monthlies_per_fund=args.monthlies)
    corpus.serialize(docs, args.out)
    if args.truth:
        synthetic.write_truth(truth, args.truth)
    print(f"wrote {len(docs)} documents for {args.funds} funds to {args.out}")
    return 0


def _cmd_split(args) -> int:
    docs = corpus.ingest(args.corpus)
    groups = corpus.group(docs)
    ds = corpus.split(groups, ratios=args.ratios, seed=args.seed)
    corpus.write_split(ds, args.out_dir, args.ratios)
    print(
        f"split {len(groups)} groups into {len(ds.train)}/{len(ds.validation)}/{len(ds.test)}"
        f" (seed {ds.seed}) under {args.out_dir}"
    )
    return 0


def _cmd_label(args) -> int:
    ds = corpus.read_split(args.split_dir)
    config = labeling.LabelingConfig(
        backend=args.backend, threshold=args.tau, tokenizer=_tokenizer_arg(args.tokenizer)
    )
    embed_fn = None
    if args.backend == "remote":
        client = clients.EmbeddingClient(args.service_url)
        client.check_health()
        embed_fn = client.embed
    result = labeling.build_training_set(ds, config, embed_fn=embed_fn)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    labeling.write_labeled(result.train, args.out_dir / "train_labeled.jsonl")
    labeling.write_labeled(result.validation, args.out_dir / "validation_labeled.jsonl")
    if result.model is not None:
        result.model.save(args.out_dir / "tfidf.json")
    positives = sum(r.label for r in result.train)
    print(
        f"labeled {len(result.train)} train / {len(result.validation)} validation sentences"
        f" ({positives} train positives, tau={args.tau}) under {args.out_dir}"
    )
    return 0


def _cmd_train(args) -> int:
    model_path = args.labeled_dir / "tfidf.json"
    if not model_path.exists():
        raise evalharness.MissingArtifact(f"TFIDF model {model_path}")
    model = TfidfVectorizer.load(model_path)
    train = labeling.read_labeled(args.labeled_dir / "train_labeled.jsonl")
    val_path = args.labeled_dir / "validation_labeled.jsonl"
    val = labeling.read_labeled(val_path) if val_path.exists() else []
    config = extractor.TrainConfig(
        epochs=args.epochs, batch_size=args.batch, learning_rate=args.lr, l2=args.l2, seed=args.seed
    )
    scorer = extractor.train_scorer(train, val, model, config)
    scorer.save(args.out, feature_fingerprint=model.fingerprint())
    print(
        f"trained scorer on {len(train)} sentences"
        f" (best epoch {scorer.trained_epochs_}/{config.epochs}) -> {args.out}"
    )
    return 0


def _cmd_summarize(args) -> int:
    ds = corpus.read_split(args.split_dir)
    method, summarizer = _load_artifacts(args)
    with open(args.out, "w", encoding="utf-8") as f:
        for g in sorted(ds.test, key=lambda g: g.key):
            summary = summarizer(g)
            f.write(json.dumps({"group_key": list(g.key), "summary": summary}, ensure_ascii=False))
            f.write("\n")
    print(f"{method.value}: wrote {len(ds.test)} summaries to {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    ds = corpus.read_split(args.split_dir)
    method, summarizer = _load_artifacts(args)
    fingerprint = evalharness.config_fingerprint(
        {
            "method": args.method,
            "budget": args.budget,
            "tokenizer": args.tokenizer,
            "seed": ds.seed,
        }
    )
    report = evalharness.run_experiment(
        ds,
        method,
        summarizer,
        rouge_config=RougeConfig(tokenizer=_tokenizer_arg(args.tokenizer)),
        fingerprint=fingerprint,
        workers=args.workers,
    )
    evalharness.emit_csv(report, args.out)
    if args.markdown:
        evalharness.emit_markdown(report, args.markdown)
    if args.dump:
        evalharness.write_group_dump(report, args.dump)
    f1s = {v: f"{report.overall.scores[v].f1:.3f}" for v in ("r1", "r2", "rl")}
    print(
        f"{method.value}: {report.overall.n_groups} groups,"
        f" R1/R2/RL F1 {f1s['r1']}/{f1s['r2']}/{f1s['rl']} -> {args.out}"
    )
    return 0


_HANDLERS = {
    "ingest": _cmd_ingest,
    "gen-synthetic": _cmd_gen_synthetic,
    "split": _cmd_split,
    "label": _cmd_label,
    "train": _cmd_train,
    "summarize": _cmd_summarize,
    "evaluate": _cmd_evaluate,
}


def main(argv: list[str] | None = None) -> int:
    parser, commands = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    # Pre-scan for --config so file-provided defaults land before parsing.
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    try:
        _apply_config(commands, known.config)
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except TransportError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except RepsummError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
