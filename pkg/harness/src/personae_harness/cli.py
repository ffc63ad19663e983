"""Harness command line: fine-tune on exported datasets, export embeddings.

Subcommands:
  finetune contrastive --config cfg.json
  finetune masked --config cfg.json
  export --model DIR --family F --vocab FILE [--instances FILE ...] --outdir DIR
  make-tiny-model --texts-from FILE --kind K --out DIR

Config files are JSON objects with HarnessConfig fields; ``data`` names
the pairs or masked file.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import HarnessConfig
from .contrastive import train_contrastive
from .export import export_embeddings
from .formats import FormatError, read_masked, read_pairs
from .masked import train_masked
from .models import build_tiny_model


def build_parser():
    p = argparse.ArgumentParser(prog="personae-harness", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    ft = sub.add_parser("finetune", help="fine-tune a model on exported data")
    ft_sub = ft.add_subparsers(dest="objective", required=True)
    for name in ("contrastive", "masked"):
        sp = ft_sub.add_parser(name)
        sp.add_argument("--config", required=True)

    ex = sub.add_parser("export", help="write embeddings in the core formats")
    ex.add_argument("--model", required=True)
    ex.add_argument("--family", choices=("sentence_encoder", "masked_lm"),
                    default="sentence_encoder")
    ex.add_argument("--vocab", required=True)
    ex.add_argument("--instances", nargs="*", default=[])
    ex.add_argument("--outdir", required=True)
    ex.add_argument("--batch-size", type=int, default=64)
    ex.add_argument("--max-length", type=int, default=64)

    mt = sub.add_parser("make-tiny-model", help="offline randomly initialized base model")
    mt.add_argument("--texts-from", required=True,
                    help="pairs or masked file whose texts define the vocabulary")
    mt.add_argument("--kind", choices=("sentence_encoder", "masked_lm"),
                    default="sentence_encoder")
    mt.add_argument("--hidden-size", type=int, default=64)
    mt.add_argument("--layers", type=int, default=2)
    mt.add_argument("--seed", type=int, default=0)
    mt.add_argument("--out", required=True)
    return p


def _texts_from_file(path):
    try:
        rows = read_pairs(path)
        texts = [r.anchor for r in rows] + [r.other for r in rows]
    except FormatError:
        texts = [r.sentence for r in read_masked(path)]
    return texts


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "finetune":
            config = HarnessConfig.from_json(args.config)
            trainer = train_contrastive if args.objective == "contrastive" else train_masked
            result = trainer(config.data, config)
            print(json.dumps({k: v for k, v in result.items() if k != "model_dir"}))
            print(f"model saved to {result['model_dir']}")
        elif args.command == "export":
            written = export_embeddings(
                args.model, args.vocab, args.outdir,
                instances_paths=args.instances, family=args.family,
                batch_size=args.batch_size, max_length=args.max_length,
            )
            print(json.dumps(written))
        elif args.command == "make-tiny-model":
            out = build_tiny_model(
                _texts_from_file(args.texts_from), args.out, kind=args.kind,
                hidden_size=args.hidden_size, layers=args.layers, seed=args.seed,
            )
            print(f"tiny model written to {out}")
    except (FormatError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
