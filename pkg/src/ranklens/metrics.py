"""Run-file evaluation: NDCG@10, MAP and MRR against graded qrels.

Conventions follow trec_eval as used by the TREC Deep Learning track:
NDCG uses linear gain (the grade itself) with a 1/log2(rank+1)
discount and an ideal ranking over all judged documents; MAP and MRR
binarize grades at >= 2.  Queries without a positive judgment are
excluded from the averages, and queries judged but missing from the
run count as zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence

from ranklens.corpus_io import Qrels, RunFile
from ranklens.errors import DataError

__all__ = [
    "MetricReport",
    "ndcg_at_k",
    "average_precision",
    "reciprocal_rank",
    "evaluate",
]

BINARIZE_AT = 2


def ndcg_at_k(ranking: Sequence[str], grades: Mapping[str, int], k: int = 10) -> float:
    """Normalized DCG at cutoff ``k``; unjudged documents gain 0.

    Returns 0.0 when no judged document has a positive grade (the ideal
    DCG is zero).
    """
    dcg = 0.0
    for i, doc_id in enumerate(ranking[:k], start=1):
        grade = grades.get(doc_id, 0)
        if grade > 0:
            dcg += grade / math.log2(i + 1)
    ideal = sorted(grades.values(), reverse=True)[:k]
    idcg = 0.0
    for i, grade in enumerate(ideal, start=1):
        if grade > 0:
            idcg += grade / math.log2(i + 1)
    return dcg / idcg if idcg > 0 else 0.0


def average_precision(
    ranking: Sequence[str],
    grades: Mapping[str, int],
    binarize_at: int = BINARIZE_AT,
    depth: int = 1000,
) -> float:
    """AP over binarized grades; R counts all relevant docs, retrieved or not."""
    total_relevant = sum(1 for g in grades.values() if g >= binarize_at)
    if total_relevant == 0:
        return 0.0
    hits = 0
    precision_sum = 0.0
    for i, doc_id in enumerate(ranking[:depth], start=1):
        if grades.get(doc_id, 0) >= binarize_at:
            hits += 1
            precision_sum += hits / i
    return precision_sum / total_relevant


def reciprocal_rank(
    ranking: Sequence[str],
    grades: Mapping[str, int],
    binarize_at: int = BINARIZE_AT,
    cutoff: Optional[int] = None,
) -> float:
    """1/rank of the first relevant document; 0 when none is retrieved."""
    scan = ranking if cutoff is None else ranking[:cutoff]
    for i, doc_id in enumerate(scan, start=1):
        if grades.get(doc_id, 0) >= binarize_at:
            return 1.0 / i
    return 0.0


@dataclass
class MetricReport:
    ndcg_at_10: float
    map: float
    mrr: float
    query_count: int
    binarized_query_count: int
    per_query: Dict[str, Dict[str, Optional[float]]] = field(default_factory=dict)


def evaluate(
    run: RunFile,
    qrels: Qrels,
    ndcg_k: int = 10,
    binarize_at: int = BINARIZE_AT,
    depth: int = 1000,
    mrr_cutoff: Optional[int] = None,
) -> MetricReport:
    """Evaluate ``run`` on every qrels query that has a positive judgment.

    A query needs a grade > 0 to contribute to NDCG and a grade >=
    ``binarize_at`` to contribute to MAP/MRR; on TREC DL judgments the
    two sets coincide.  Means are compensated sums, so aggregation
    order never matters.
    """
    evaluated = [q for q in qrels.queries() if qrels.has_positive(q, 1)]
    if not any(q in run for q in qrels.queries()):
        raise DataError("run and qrels have no query in common")
    per_query: Dict[str, Dict[str, Optional[float]]] = {}
    ndcg_values = []
    ap_values = []
    rr_values = []
    for query_id in evaluated:
        grades = qrels.for_query(query_id)
        ranking = run.ranking(query_id) if query_id in run else []
        row: Dict[str, Optional[float]] = {}
        row["ndcg"] = ndcg_at_k(ranking, grades, ndcg_k)
        ndcg_values.append(row["ndcg"])
        if any(g >= binarize_at for g in grades.values()):
            row["ap"] = average_precision(ranking, grades, binarize_at, depth)
            row["rr"] = reciprocal_rank(ranking, grades, binarize_at, mrr_cutoff)
            ap_values.append(row["ap"])
            rr_values.append(row["rr"])
        else:
            row["ap"] = None
            row["rr"] = None
        per_query[query_id] = row
    return MetricReport(
        ndcg_at_10=math.fsum(ndcg_values) / len(ndcg_values) if ndcg_values else 0.0,
        map=math.fsum(ap_values) / len(ap_values) if ap_values else 0.0,
        mrr=math.fsum(rr_values) / len(rr_values) if rr_values else 0.0,
        query_count=len(evaluated),
        binarized_query_count=len(ap_values),
        per_query=per_query,
    )
