"""newsim-export: batch export of embeddings, entities, and translations."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .embed import ExportJob, ModelLoadError, export_embeddings
from .ner import export_entities
from .translate import fulfill_translations, load_translator


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newsim-export",
        description="Export embeddings, entity mentions, and fulfilled "
                    "translations in the similarity engine's file formats.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_emb = sub.add_parser("export-embeddings")
    p_emb.add_argument("--model", required=True,
                       help="hash:<dim>[:<seed>] or a sentence-transformers name")
    p_emb.add_argument("--in", dest="docs", required=True, help="documents JSONL")
    p_emb.add_argument("--out", required=True, help="embedding file to write")
    p_emb.add_argument("--batch-size", type=int, default=32)
    p_emb.add_argument("--binary", action="store_true",
                       help="write float32 binary with an .idx sidecar")

    p_ner = sub.add_parser("export-entities")
    p_ner.add_argument("--model", required=True,
                       help="pattern[:<lexicon.csv>] or a spaCy pipeline name")
    p_ner.add_argument("--in", dest="docs", required=True)
    p_ner.add_argument("--out", required=True, help="entities JSONL to write")
    p_ner.add_argument("--batch-size", type=int, default=32)
    p_ner.add_argument("--translate-first", action="store_true",
                       help="translate non-English documents before tagging")
    p_ner.add_argument("--translation-model", default="echo")

    p_tr = sub.add_parser("fulfill-translations")
    p_tr.add_argument("--model", required=True,
                      help="echo or a transformers translation model name")
    p_tr.add_argument("--in", dest="docs", required=True)
    p_tr.add_argument("--out", required=True, help="translated documents JSONL")
    p_tr.add_argument("--batch-size", type=int, default=32)
    p_tr.add_argument("--plan", required=True, help="translation plan CSV")
    p_tr.add_argument("--plan-out", default=None,
                      help="updated plan path (default: update --plan in place)")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export-embeddings":
            count = export_embeddings(ExportJob(
                docs_path=args.docs, model=args.model, out_path=args.out,
                batch_size=args.batch_size, binary=args.binary))
            print(json.dumps({"documents": count, "out": args.out}))
        elif args.command == "export-entities":
            translator = (load_translator(args.translation_model)
                          if args.translate_first else None)
            count = export_entities(args.docs, args.model, args.out,
                                    translate_first=args.translate_first,
                                    translator=translator)
            print(json.dumps({"documents": count, "out": args.out}))
        else:
            result = fulfill_translations(args.plan, args.docs, args.model,
                                          args.out, args.plan_out)
            print(json.dumps(result))
        return 0
    except ModelLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
