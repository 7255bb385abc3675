"""CLI: fine-tune a checkpoint, serve a trained model, or build a smoke checkpoint."""

from __future__ import annotations

import argparse
import sys

import uvicorn

from .checkpoints import init_checkpoint
from .data import MalformedPairsError, read_pairs
from .serving import create_app
from .training import CheckpointNotFoundError, TrainConfig, fine_tune


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadserve")
    sub = parser.add_subparsers(dest="command", required=True)
    defaults = TrainConfig()

    p = sub.add_parser("train", help="fine-tune a checkpoint on (input, target) pairs")
    p.add_argument("--pairs", required=True, help="TSV or JSONL pairs file")
    p.add_argument("--out", required=True, help="output model directory")
    p.add_argument("--checkpoint", default=defaults.checkpoint)
    p.add_argument("--batch-size", type=int, default=defaults.batch_size)
    p.add_argument("--learning-rate", type=float, default=defaults.learning_rate)
    p.add_argument("--epochs", type=int, default=defaults.epochs)
    p.add_argument("--seed", type=int, default=defaults.seed)

    p = sub.add_parser("serve", help="serve a model directory over POST /generate")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    p = sub.add_parser("init", help="build a random-weight smoke checkpoint "
                                    "with a word-level vocabulary")
    p.add_argument("--pairs", required=True, action="append",
                   help="pairs file(s) supplying the vocabulary corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--d-model", type=int, default=64)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--d-ff", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            config = TrainConfig(
                checkpoint=args.checkpoint,
                batch_size=args.batch_size,
                learning_rate=args.learning_rate,
                epochs=args.epochs,
                seed=args.seed,
            )
            out = fine_tune(args.pairs, args.out, config)
            print(f"saved model to {out}", file=sys.stderr)
        elif args.command == "serve":
            app = create_app(args.model)
            uvicorn.run(app, host=args.host, port=args.port)
        else:
            corpus = [text for path in args.pairs
                      for pair in read_pairs(path) for text in pair]
            out = init_checkpoint(
                args.out, corpus, d_model=args.d_model, num_layers=args.layers,
                num_heads=args.heads, d_ff=args.d_ff, seed=args.seed,
            )
            print(f"initialized checkpoint at {out}", file=sys.stderr)
    except (MalformedPairsError, CheckpointNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
