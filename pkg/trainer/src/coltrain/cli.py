"""Train a column encoder on a lake directory and export its embeddings."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .export import export_embeddings
from .tables import load_lake
from .train import TrainerConfig, pretrain, write_training_log


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="coltrain",
        description="Contrastive pre-training of table column encoders.",
    )
    parser.add_argument("--lake", required=True, help="directory of CSV tables")
    parser.add_argument("--out", required=True, help="output SMBE store path")
    parser.add_argument("--log", default=None, help="training log JSON path")
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--temperature", type=float, default=0.07)
    parser.add_argument("--op", default="drop_col")
    parser.add_argument("--max-seq-len", type=int, default=256)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr
    )

    tables = load_lake(args.lake)
    if len(tables) < 2:
        print(f"error: fewer than 2 tables under {args.lake}", file=sys.stderr)
        return 1
    cfg = TrainerConfig(
        batch_size=args.batch_size,
        learning_rate=args.lr,
        n_epoch=args.epochs,
        temperature=args.temperature,
        aug_op=args.op,
        max_seq_len=args.max_seq_len,
        encoder_dim=args.dim,
        seed=args.seed,
    )
    model = pretrain(tables, cfg)
    count = export_embeddings(model, tables, args.out)
    log_path = args.log or str(args.out) + ".train.json"
    write_training_log(model, log_path)
    json.dump(
        {
            "store": str(args.out),
            "columns": count,
            "tables": len(tables),
            "final_loss": model.training_log[-1]["mean_loss"] if model.training_log else None,
            "log": str(log_path),
        },
        sys.stdout,
        indent=2,
    )
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
