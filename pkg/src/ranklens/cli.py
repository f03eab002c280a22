"""Command-line pipeline: index, retrieve, evaluate, provenance, mask.

Every subcommand is a pure function of its input files; outputs carry
no timestamps, so reruns are byte-identical.  Logging goes to stderr,
data to files or stdout.  Exit codes: 0 success, 1 usage error, 2 data
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from ranklens import __version__, bm25, corpus_io, maskgen, metrics, rankdiff
from ranklens import index as index_mod
from ranklens.errors import DataError

logger = logging.getLogger("ranklens")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; usage errors are 1 here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def cmd_index(args) -> int:
    corpus = corpus_io.read_corpus(args.corpus)
    idx = index_mod.build(corpus)
    idx.save(args.index)
    logger.info(
        "indexed %d documents, %d terms, avgdl %.2f -> %s",
        idx.doc_count,
        idx.term_count,
        idx.avgdl,
        args.index,
    )
    return EXIT_OK


def cmd_retrieve(args) -> int:
    params = bm25.Bm25Params(k1=args.k1, b=args.b, k=args.k)
    queries = corpus_io.read_queries(args.queries)
    with index_mod.load(args.index) as idx:
        run = bm25.run(idx, queries, params, tag=args.tag, threads=args.threads)
    corpus_io.write_run(run, args.out)
    logger.info("retrieved %d/%d queries -> %s", len(run), len(queries), args.out)
    return EXIT_OK


def _print_metric_lines(report: metrics.MetricReport, args) -> None:
    rows = [
        ("ndcg_cut_10", "ndcg"),
        ("map", "ap"),
        ("recip_rank", "rr"),
    ]
    if args.tsv:
        out = sys.stdout
        if args.per_query:
            for query_id, row in report.per_query.items():
                for name, key in rows:
                    if row[key] is not None:
                        out.write(f"{name}\t{query_id}\t{row[key]:.4f}\n")
        out.write(f"num_q\tall\t{report.query_count}\n")
        out.write(f"ndcg_cut_10\tall\t{report.ndcg_at_10:.4f}\n")
        out.write(f"map\tall\t{report.map:.4f}\n")
        out.write(f"recip_rank\tall\t{report.mrr:.4f}\n")
    else:
        print(f"{'num_q':<14} {report.query_count}")
        print(f"{'ndcg_cut_10':<14} {report.ndcg_at_10:.4f}")
        print(f"{'map':<14} {report.map:.4f}")
        print(f"{'recip_rank':<14} {report.mrr:.4f}")


def cmd_evaluate(args) -> int:
    run = corpus_io.read_run(args.run)
    qrels = corpus_io.read_qrels(args.qrels, clamp=args.clamp_grades)
    report = metrics.evaluate(
        run,
        qrels,
        ndcg_k=args.ndcg_cutoff,
        binarize_at=args.binarize_at,
        depth=args.depth,
        mrr_cutoff=args.mrr_cutoff,
    )
    _print_metric_lines(report, args)
    return EXIT_OK


def cmd_provenance(args) -> int:
    base = corpus_io.read_run(args.base)
    target = corpus_io.read_run(args.target)
    qrels = corpus_io.read_qrels(args.qrels) if args.qrels else None
    if args.grades is not None:
        grades = frozenset(int(g) for g in args.grades.split(","))
        stratum = rankdiff.Stratum(args.stratum, grades)
    else:
        stratum = rankdiff.STRATA[args.stratum]
    matrix = rankdiff.provenance(
        base,
        target,
        ranges=rankdiff.RankRanges.parse(args.ranges),
        stratum=stratum,
        qrels=qrels,
        allow_unknown_origin=args.permissive,
        per_query_average=args.per_query_average,
    )
    prefix = args.out_prefix
    rankdiff.write_csv(matrix, f"{prefix}.counts.csv", kind="counts")
    rankdiff.write_csv(matrix, f"{prefix}.ratios.csv", kind="ratios")
    rankdiff.write_json(matrix, f"{prefix}.json")
    rankdiff.render_heatmap(matrix, f"{prefix}.svg")
    logger.info(
        "provenance over %d shared queries -> %s.{counts.csv,ratios.csv,json,svg}",
        matrix.query_count,
        prefix,
    )
    return EXIT_OK


def cmd_mask(args) -> int:
    run = corpus_io.read_run(args.run)
    queries = corpus_io.read_queries(args.queries)
    corpus = corpus_io.read_corpus(args.corpus)
    count = maskgen.generate(run, queries, corpus, args.mode, args.out)
    logger.info("wrote %d masked pairs -> %s", count, args.out)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ranklens",
        description="BM25 retrieval, TREC evaluation, rank-provenance heatmaps "
        "and query-masking ablations.",
    )
    parser.add_argument("--version", action="version", version=f"ranklens {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_index = sub.add_parser("index", help="build an inverted index from a TSV corpus")
    p_index.add_argument("--corpus", required=True, help="corpus TSV (doc_id<TAB>text)")
    p_index.add_argument("--index", required=True, help="output index file")
    p_index.set_defaults(func=cmd_index)

    p_retr = sub.add_parser("retrieve", help="BM25 top-k retrieval to a TREC run file")
    p_retr.add_argument("--index", required=True, help="index file built by 'index'")
    p_retr.add_argument("--queries", required=True, help="queries TSV (qid<TAB>text)")
    p_retr.add_argument("--out", required=True, help="output run file")
    p_retr.add_argument("--k", type=int, default=1000, help="retrieval depth (default 1000)")
    p_retr.add_argument("--k1", type=float, default=0.9, help="BM25 k1 (default 0.9)")
    p_retr.add_argument("--b", type=float, default=0.4, help="BM25 b (default 0.4)")
    p_retr.add_argument("--tag", default="bm25", help="run tag (default bm25)")
    p_retr.add_argument(
        "--threads", type=int, default=1, help="parallel query workers (default 1)"
    )
    p_retr.set_defaults(func=cmd_retrieve)

    p_eval = sub.add_parser("evaluate", help="score a run against qrels")
    p_eval.add_argument("--run", required=True, help="TREC run file")
    p_eval.add_argument("--qrels", required=True, help="TREC qrels file")
    p_eval.add_argument(
        "--ndcg-cutoff", type=int, default=10, help="NDCG cutoff (default 10)"
    )
    p_eval.add_argument(
        "--binarize-at",
        type=int,
        default=2,
        help="minimum grade counting as relevant for MAP/MRR (default 2)",
    )
    p_eval.add_argument(
        "--depth", type=int, default=1000, help="MAP evaluation depth (default 1000)"
    )
    p_eval.add_argument(
        "--mrr-cutoff",
        type=int,
        default=None,
        help="optional MRR cutoff (default: full run depth)",
    )
    p_eval.add_argument(
        "--clamp-grades",
        action="store_true",
        help="clamp out-of-range grades into 0..3 instead of failing",
    )
    p_eval.add_argument(
        "--tsv", action="store_true", help="machine-readable metric<TAB>qid<TAB>value"
    )
    p_eval.add_argument(
        "--per-query", action="store_true", help="with --tsv, include per-query rows"
    )
    p_eval.set_defaults(func=cmd_evaluate)

    p_prov = sub.add_parser(
        "provenance", help="rank-range origin matrix of a re-ranked run"
    )
    p_prov.add_argument("--base", required=True, help="base run (e.g. BM25)")
    p_prov.add_argument("--target", required=True, help="re-ranked run")
    p_prov.add_argument("--qrels", default=None, help="qrels (required for strata)")
    p_prov.add_argument(
        "--stratum",
        default="all",
        choices=sorted(rankdiff.STRATA),
        help="relevance stratum (default all)",
    )
    p_prov.add_argument(
        "--grades",
        default=None,
        help="override the stratum's grade set, e.g. '0' for strict non-relevant",
    )
    p_prov.add_argument(
        "--ranges",
        default="10,100,500,1000",
        help="comma-separated range upper bounds (default 10,100,500,1000)",
    )
    p_prov.add_argument(
        "--out-prefix",
        required=True,
        help="writes <prefix>.counts.csv, .ratios.csv, .json and .svg",
    )
    p_prov.add_argument(
        "--permissive",
        action="store_true",
        help="route target docs missing from the base run to an 'unknown' column",
    )
    p_prov.add_argument(
        "--per-query-average",
        action="store_true",
        help="average per-query row-normalized matrices instead of pooling counts",
    )
    p_prov.set_defaults(func=cmd_provenance)

    p_mask = sub.add_parser("mask", help="generate a masked ablation pair file")
    p_mask.add_argument("--run", required=True, help="candidate run file")
    p_mask.add_argument("--queries", required=True, help="queries TSV")
    p_mask.add_argument("--corpus", required=True, help="corpus TSV")
    p_mask.add_argument("--mode", required=True, choices=maskgen.MODES)
    p_mask.add_argument("--out", required=True, help="output 4-column TSV")
    p_mask.set_defaults(func=cmd_mask)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        logger.error("%s", exc)
        return EXIT_DATA
    except ValueError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
