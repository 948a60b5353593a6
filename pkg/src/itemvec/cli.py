"""Command-line interface: ``itemvec <command> ...``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import io
from .corpus import ingest_file
from .evaluation import (TSV_HEADER, GenreCatalog, genre_consistency, mislabel_report,
                         synth_corpus, unpopular_slice)
from .similarity import VARIANTS, ItemSpace, assemble, top_k
from .svd import svd_representation
from .trainer import TrainConfig, parse_pair_mode, train

logger = logging.getLogger("itemvec")


def _add_input(p: argparse.ArgumentParser, flag: str = "--input", required: bool = True) -> None:
    p.add_argument(flag, required=required, help="events or baskets file")
    p.add_argument("--format", choices=("events", "baskets"), default="events")
    p.add_argument("--min-count", type=int, default=1)


def _add_space(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, help="target-vector file")
    p.add_argument("--context", help="context-vector file (needed for non-target variants)")
    p.add_argument("--variant", choices=VARIANTS, default="target")
    p.add_argument("--binary", action="store_true", help="model files use the binary variant")


def _load_space(args) -> ItemSpace:
    model = io.load_model(args.model, args.context, args.binary)
    return assemble(model, args.variant)


def cmd_train(args) -> int:
    vocab, corpus, stats = ingest_file(args.input, args.format, args.min_count)
    logger.info("ingested %d events into %d sets over %d items (%d dropped by min-count)",
                stats.raw_events, stats.sets_emitted, len(vocab), stats.items_dropped_minfreq)
    mode, window = parse_pair_mode(args.pair_mode)
    config = TrainConfig(
        dim=args.dim, negatives=args.negatives, epochs=args.epochs,
        rho=None if args.rho <= 0 else args.rho,
        initial_lr=args.lr, final_lr=min(args.final_lr, args.lr),
        pair_mode=mode, window=window, seed=args.seed, threads=args.threads,
        max_set_size=args.max_set_size, resample_each_epoch=not args.subsample_once,
        fast_sigmoid=args.fast_sigmoid,
    )
    model = train(corpus, vocab, config)
    io.save_model(model, args.output, args.output_context, args.binary, args.precision)
    return 0


def cmd_svd(args) -> int:
    vocab, corpus, _ = ingest_file(args.input, args.format, args.min_count)
    model = svd_representation(corpus, vocab, args.dim, args.seed)
    io.save_embeddings(args.output, vocab.tokens, model.R, args.binary, args.precision)
    return 0


def cmd_similar(args) -> int:
    space = _load_space(args)
    for token in args.seed_item:
        seed = space.vocab.get(token)
        if seed is None:
            print(f"error: unknown item {token!r}", file=sys.stderr)
            return 2
        result = top_k(space, seed, args.k)
        print(f"# {token}" + (" (truncated)" if result.truncated else ""))
        width = max((len(space.vocab.tokens[i]) for i in result.ids), default=0)
        for i, score in result.neighbors:
            print(f"{space.vocab.tokens[i]:<{width}}  {score:.6f}")
    return 0


def cmd_eval_genre(args) -> int:
    space = _load_space(args)
    catalog = GenreCatalog.read(args.catalog)
    vocab, corpus, _ = ingest_file(args.corpus, args.format, args.min_count)
    rows = [TSV_HEADER]
    for q in args.top_q:
        report = genre_consistency(space, catalog, vocab, q, args.k)
        print(report.format())
        print()
        rows += report.tsv_rows(f"top{q}")
    if args.unpopular_threshold is not None:
        rare_corpus_ids = unpopular_slice(vocab, corpus, args.unpopular_threshold)
        rare_tokens = {vocab.tokens[i] for i in rare_corpus_ids}
        items = [i for i, t in enumerate(space.vocab.tokens) if t in rare_tokens]
        if items:
            report = genre_consistency(space, catalog, vocab, len(items), args.k, items=items)
            print(f"unpopular (< {args.unpopular_threshold} sets)")
            print(report.format())
            rows += report.tsv_rows("unpopular")
        else:
            print(f"unpopular (< {args.unpopular_threshold} sets): no items")
    if args.report_out:
        with open(args.report_out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(rows) + "\n")
    return 0


def cmd_synth(args) -> int:
    corpus, vocab, catalog = synth_corpus(args.genres, args.items_per_genre, args.sets,
                                          args.set_size, args.noise, args.seed)
    writer = io.write_events if args.format == "events" else io.write_baskets
    writer(args.out_corpus, corpus, vocab)
    catalog.write(args.out_catalog)
    logger.info("wrote %d sets over %d items", len(corpus), len(vocab))
    return 0


def cmd_mislabels(args) -> int:
    space = _load_space(args)
    catalog = GenreCatalog.read(args.catalog)
    records = mislabel_report(space, catalog, space.vocab, args.k, args.min_margin)
    lines = ["item\tcatalog_genre\tpredicted_genre\tvote_margin"]
    lines += [f"{r.item}\t{r.catalog_genre}\t{r.predicted_genre}\t{r.vote_margin:.4f}" for r in records]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_export(args) -> int:
    """Tab-separated vectors plus an optional label file, for external projection tools."""
    space = _load_space(args)
    np.savetxt(args.output, space.vectors, delimiter="\t", fmt="%.8g")
    if args.metadata:
        catalog = GenreCatalog.read(args.catalog) if args.catalog else GenreCatalog({})
        with open(args.metadata, "w", encoding="utf-8") as fh:
            fh.write("item\tgenre\n")
            for t in space.vocab.tokens:
                fh.write(f"{t}\t{catalog.labels.get(t, '')}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="itemvec", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train item2vec embeddings")
    _add_input(p)
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--negatives", type=int, default=15)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--rho", type=float, default=1e-3, help="subsampling threshold; <= 0 disables")
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--final-lr", type=float, default=1e-4)
    p.add_argument("--pair-mode", default="all", help="'all' or 'window:C'")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-set-size", type=int, default=500)
    p.add_argument("--subsample-once", action="store_true", help="thin the corpus once, not every epoch")
    p.add_argument("--fast-sigmoid", action="store_true", help="use the lookup-table sigmoid")
    p.add_argument("--output", required=True)
    p.add_argument("--output-context")
    p.add_argument("--binary", action="store_true")
    p.add_argument("--precision", type=int, help="significant digits in text output")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("svd", help="item-item SVD baseline")
    _add_input(p)
    p.add_argument("--dim", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.add_argument("--binary", action="store_true")
    p.add_argument("--precision", type=int)
    p.set_defaults(func=cmd_svd)

    p = sub.add_parser("similar", help="nearest neighbours of seed items")
    _add_space(p)
    p.add_argument("--seed-item", action="append", required=True)
    p.add_argument("--k", type=int, default=4)
    p.set_defaults(func=cmd_similar)

    p = sub.add_parser("eval-genre", help="KNN genre-consistency accuracy")
    _add_space(p)
    p.add_argument("--catalog", required=True)
    _add_input(p, "--corpus")
    p.add_argument("--top-q", type=int, nargs="+", default=[2500])
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--unpopular-threshold", type=int)
    p.add_argument("--report-out")
    p.set_defaults(func=cmd_eval_genre)

    p = sub.add_parser("synth", help="generate a synthetic genre-clustered corpus")
    p.add_argument("--genres", type=int, default=13)
    p.add_argument("--items-per-genre", type=int, default=100)
    p.add_argument("--sets", type=int, default=50000)
    p.add_argument("--set-size", type=int, default=20)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("events", "baskets"), default="events")
    p.add_argument("--out-corpus", required=True)
    p.add_argument("--out-catalog", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mislabels", help="report items whose neighbours disagree with their label")
    _add_space(p)
    p.add_argument("--catalog", required=True)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--min-margin", type=float, default=0.75)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mislabels)

    p = sub.add_parser("export", help="write vectors as TSV for external projection")
    _add_space(p)
    p.add_argument("--output", required=True)
    p.add_argument("--metadata")
    p.add_argument("--catalog")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
