"""modelsvc command line: serve the API or run the fine-tuning scripts."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modelsvc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the inference service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--classifier-ckpt", type=Path,
                   default=os.environ.get("MODELSVC_CLASSIFIER_CKPT"))
    p.add_argument("--generator-ckpt", type=Path,
                   default=os.environ.get("MODELSVC_GENERATOR_CKPT"))
    p.add_argument("--no-embed", action="store_true", help="disable the embedding model")
    p.add_argument("--embed-seed", type=int, default=12345)
    p.add_argument("--max-text-length", type=int, default=2000)

    p = sub.add_parser("finetune-classifier", help="train the sentence scorer checkpoint")
    p.add_argument("--labeled", type=Path, required=True, help="labeled sentences JSONL")
    p.add_argument("--epochs", type=int, default=9)
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--trainable-top-layers", type=int, default=2,
                   help="encoder layers left unfrozen, counted from the top")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("classifier.pt"))

    p = sub.add_parser("finetune-generator", help="train the summary generator checkpoint")
    p.add_argument("--corpus", type=Path, required=True, help="report corpus JSONL")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--max-input-tokens", type=int, default=1024)
    p.add_argument("--max-new-tokens", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("generator.pt"))

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service import create_app

        app = create_app(
            embed_enabled=not args.no_embed,
            embed_seed=args.embed_seed,
            max_text_length=args.max_text_length,
            classifier_ckpt=args.classifier_ckpt,
            generator_ckpt=args.generator_ckpt,
        )
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
        return 0
    if args.command == "finetune-classifier":
        from .training import finetune_classifier

        result = finetune_classifier(
            args.labeled, args.out, epochs=args.epochs, batch_size=args.batch,
            learning_rate=args.lr, trainable_top_layers=args.trainable_top_layers,
            seed=args.seed,
        )
    else:
        from .training import finetune_generator

        result = finetune_generator(
            args.corpus, args.out, epochs=args.epochs, batch_size=args.batch,
            learning_rate=args.lr, max_input_tokens=args.max_input_tokens,
            max_new_tokens=args.max_new_tokens, seed=args.seed,
        )
    losses = " ".join(f"{x:.4f}" for x in result.epoch_losses)
    print(f"wrote {result.checkpoint} (epoch losses: {losses})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
