"""Command line: pairs (or run+corpus+queries) in, TREC run out.

    ce-runner --pairs only_q.tsv --model cross-encoder-checkpoint --out ce.trec
    ce-runner --run bm25.trec --queries queries.tsv --corpus collection.tsv \
              --model cross-encoder-checkpoint --out ce.trec

Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from ce_runner import __version__
from ce_runner.formats import (
    FormatError,
    pairs_from_run,
    read_pairs,
    read_run_rankings,
    read_tsv_map,
)

logger = logging.getLogger("ce_runner")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ce-runner",
        description="Score (query, passage) pairs with a cross-encoder and "
        "emit a TREC run file.",
    )
    parser.add_argument("--version", action="version", version=f"ce-runner {__version__}")
    parser.add_argument("--pairs", help="4-column pair TSV (query_id, doc_id, query, passage)")
    parser.add_argument("--run", help="TREC run of candidates (with --queries/--corpus)")
    parser.add_argument("--queries", help="queries TSV (qid<TAB>text)")
    parser.add_argument("--corpus", help="corpus TSV (doc_id<TAB>text)")
    parser.add_argument("--model", required=True, help="checkpoint path or hub model id")
    parser.add_argument("--out", required=True, help="output TREC run file")
    parser.add_argument("--tag", default="ce", help="run tag (default ce)")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--max-length", type=int, default=512,
                        help="encoder window; passage side truncated first")
    parser.add_argument("--device", default=None, help="cpu or cuda (default: auto)")
    parser.add_argument("--relevant-class", type=int, default=1,
                        help="logit index of the relevant class (default 1)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = make_parser()
    args = parser.parse_args(argv)
    if bool(args.pairs) == bool(args.run):
        parser.error("exactly one of --pairs or --run is required")
    if args.run and not (args.queries and args.corpus):
        parser.error("--run requires --queries and --corpus")

    try:
        if args.pairs:
            pairs = read_pairs(args.pairs)
        else:
            pairs = list(
                pairs_from_run(
                    read_run_rankings(args.run),
                    read_tsv_map(args.queries),
                    read_tsv_map(args.corpus),
                )
            )
    except (FormatError, KeyError) as exc:
        logger.error("%s", exc)
        return 2
    except OSError as exc:
        logger.error("%s", exc)
        return 3

    try:
        from ce_runner.scoring import CrossEncoder, score_pairs_to_run

        encoder = CrossEncoder(
            args.model,
            device=args.device,
            max_length=args.max_length,
            batch_size=args.batch_size,
            relevant_class=args.relevant_class,
        )
    except OSError as exc:
        logger.error("cannot load checkpoint %r: %s", args.model, exc)
        return 2
    except ValueError as exc:
        logger.error("%s", exc)
        return 1

    logger.info("scoring %d pairs with %s on %s", len(pairs), args.model, encoder.device)
    try:
        count = score_pairs_to_run(pairs, encoder, args.out, tag=args.tag)
    except ValueError as exc:
        logger.error("%s", exc)
        return 2
    except OSError as exc:
        logger.error("%s", exc)
        return 3
    logger.info("wrote %d entries -> %s", count, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
