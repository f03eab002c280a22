"""BM25 scoring and top-k retrieval (Lucene variant, k1=0.9, b=0.4).

Per distinct query term t present in a document:

    idf(t) * tf / (tf + k1 * (1 - b + b * dl / avgdl))
    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))

There is no (k1+1) numerator factor and query terms are deduplicated,
so a term repeated in the query contributes once.  Scores are >= 0 and
a document sharing no term with the query scores exactly 0; such
documents are never retrieved.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np

from ranklens import _kernels
from ranklens.corpus_io import Query, RunFile
from ranklens.index import InvertedIndex
from ranklens.textprep import analyze_terms

__all__ = ["Bm25Params", "Bm25Scorer", "idf", "score", "retrieve", "run"]


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.9
    b: float = 0.4
    k: int = 1000

    def __post_init__(self) -> None:
        if not self.k1 > 0:
            raise ValueError(f"k1 must be > 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")
        if self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")


def idf(doc_count: int, df: int) -> float:
    return math.log(1.0 + (doc_count - df + 0.5) / (df + 0.5))


def _distinct(terms: Iterable[str]) -> List[str]:
    return list(dict.fromkeys(terms))


class Bm25Scorer:
    """Reusable scorer holding the per-document length normalization.

    Read-only once constructed; safe to share across threads.
    """

    def __init__(self, index: InvertedIndex, params: Bm25Params = Bm25Params()):
        self.index = index
        self.params = params
        if index.doc_count and index.avgdl > 0:
            dl = index.doc_lengths.astype(np.float64)
            self._norm = params.k1 * ((1.0 - params.b) + params.b * dl / index.avgdl)
        else:
            # every document is empty (or none exist): nothing can match,
            # but keep the array well-defined
            self._norm = np.full(index.doc_count, params.k1 * (1.0 - params.b))

    def score_all(self, query_terms: Iterable[str]) -> np.ndarray:
        """Dense score array over all documents for the distinct query terms."""
        scores = np.zeros(self.index.doc_count, dtype=np.float64)
        for term in _distinct(query_terms):
            df, blob = self.index.postings_blob(term)
            if df == 0:
                continue
            _kernels.accumulate_bm25(
                blob, df, idf(self.index.doc_count, df), self._norm, scores
            )
        return scores

    def retrieve(self, query_terms: Iterable[str], k: int | None = None) -> List[Tuple[str, float]]:
        """Top-k (doc_id, score) pairs, score descending, doc_id ascending on ties."""
        if self.index.doc_count == 0:
            raise ValueError("cannot retrieve from an empty index")
        k = self.params.k if k is None else k
        scores = self.score_all(query_terms)
        matched = np.nonzero(scores > 0.0)[0]
        if matched.size == 0:
            return []
        if matched.size > k:
            sub = scores[matched]
            threshold = np.partition(sub, matched.size - k)[matched.size - k]
            keep = matched[sub >= threshold]
        else:
            keep = matched
        pairs = [(self.index.doc_id(int(o)), float(scores[o])) for o in keep]
        pairs.sort(key=lambda p: (-p[1], p[0]))
        return pairs[:k]


def score(
    index: InvertedIndex,
    query_tokens: Sequence[str],
    doc_ordinal: int,
    params: Bm25Params = Bm25Params(),
) -> float:
    """Score one document against normalized query tokens."""
    dl = index.doc_length(doc_ordinal)
    ratio = dl / index.avgdl if index.avgdl > 0 else 0.0
    norm = params.k1 * ((1.0 - params.b) + params.b * ratio)
    total = 0.0
    for term in _distinct(query_tokens):
        postings = index.lookup(term)
        if postings.df == 0:
            continue
        pos = int(np.searchsorted(postings.doc_ordinals, doc_ordinal))
        if pos < postings.df and postings.doc_ordinals[pos] == doc_ordinal:
            tf = float(postings.tfs[pos])
            total += idf(index.doc_count, postings.df) * tf / (tf + norm)
    return total


def retrieve(
    index: InvertedIndex,
    query: Query,
    params: Bm25Params = Bm25Params(),
    analyzer: Callable[[str], List[str]] = analyze_terms,
) -> List[Tuple[str, float]]:
    """Analyze ``query`` and return its top-k (doc_id, score) ranking."""
    return Bm25Scorer(index, params).retrieve(analyzer(query.text))


def run(
    index: InvertedIndex,
    queries: Sequence[Query],
    params: Bm25Params = Bm25Params(),
    tag: str = "bm25",
    analyzer: Callable[[str], List[str]] = analyze_terms,
    threads: int = 1,
) -> RunFile:
    """Retrieve every query and assemble a run file.

    Queries with no matching document are omitted from the run.  Results
    are collected in input query order, so the output is independent of
    the thread count.
    """
    scorer = Bm25Scorer(index, params)
    run_file = RunFile()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rankings = list(
                pool.map(lambda q: scorer.retrieve(analyzer(q.text)), queries)
            )
    else:
        rankings = [scorer.retrieve(analyzer(q.text)) for q in queries]
    for query, ranking in zip(queries, rankings):
        if ranking:
            run_file.add_ranking(query.query_id, ranking, tag)
    return run_file
