"""Masked ablation inputs for neural re-rankers.

Two complementary transforms over a (query, passage) pair, both working
on whole analyzer tokens matched case-insensitively against the query's
normalized term set:

  only_q  every token that is not a query term becomes "[MASK]"
  drop_q  every query-term occurrence becomes "[MASK]"

Kept tokens keep their original surface form; output tokens are joined
with single spaces, so original punctuation and spacing are discarded
and the analyzed token count is preserved ("[MASK]" analyzes to one
token).  The literal "[MASK]" string survives wordpiece tokenization
downstream as the special mask token.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Set

from ranklens.corpus_io import Passage, Query, RunFile
from ranklens.errors import DataError
from ranklens.textprep import Token, analyze

__all__ = ["MASK_TOKEN", "MODES", "MaskedPair", "mask_only_q", "mask_drop_q", "generate"]

MASK_TOKEN = "[MASK]"
MODES = ("only_q", "drop_q")


@dataclass(frozen=True)
class MaskedPair:
    query_id: str
    doc_id: str
    masked_text: str


def _query_terms(query_text: str, analyzer: Callable[[str], List[Token]]) -> Set[str]:
    return {token.normalized for token in analyzer(query_text)}


def _mask(
    query_text: str,
    passage_text: str,
    keep_query_terms: bool,
    analyzer: Callable[[str], List[Token]],
) -> str:
    terms = _query_terms(query_text, analyzer)
    pieces = []
    for token in analyzer(passage_text):
        is_query_term = token.normalized in terms
        if is_query_term == keep_query_terms:
            pieces.append(token.surface)
        else:
            pieces.append(MASK_TOKEN)
    return " ".join(pieces)


def mask_only_q(
    query: Query,
    passage: Passage,
    analyzer: Callable[[str], List[Token]] = analyze,
) -> MaskedPair:
    """Keep only query-term occurrences; mask everything else."""
    return MaskedPair(
        query.query_id,
        passage.doc_id,
        _mask(query.text, passage.text, True, analyzer),
    )


def mask_drop_q(
    query: Query,
    passage: Passage,
    analyzer: Callable[[str], List[Token]] = analyze,
) -> MaskedPair:
    """Mask query-term occurrences; keep the surrounding context."""
    return MaskedPair(
        query.query_id,
        passage.doc_id,
        _mask(query.text, passage.text, False, analyzer),
    )


def generate(
    run: RunFile,
    queries: Iterable[Query],
    corpus: Iterable[Passage],
    mode: str,
    path,
    analyzer: Callable[[str], List[Token]] = analyze,
) -> int:
    """Write one masked record per run entry, in run order.

    Record format: ``query_id<TAB>doc_id<TAB>query_text<TAB>masked_text``.
    Whitespace inside the query text is flattened to single spaces so the
    file stays 4 columns.  Returns the record count.  Every run document
    must exist in the corpus and every run query in the query set.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    keep_query_terms = mode == "only_q"
    query_texts: Dict[str, str] = {q.query_id: q.text for q in queries}
    needed: Set[str] = set()
    for query_id in run.queries():
        if query_id not in query_texts:
            raise DataError(f"run query {query_id!r} missing from the query set")
        for entry in run.entries(query_id):
            needed.add(entry.doc_id)
    passage_texts: Dict[str, str] = {}
    for passage in corpus:
        if passage.doc_id in needed:
            passage_texts[passage.doc_id] = passage.text
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for query_id in run.queries():
            query_text = " ".join(query_texts[query_id].split())
            for entry in run.entries(query_id):
                if entry.doc_id not in passage_texts:
                    raise DataError(f"run doc {entry.doc_id!r} missing from the corpus")
                masked = _mask(
                    query_texts[query_id],
                    passage_texts[entry.doc_id],
                    keep_query_terms,
                    analyzer,
                )
                out.write(f"{query_id}\t{entry.doc_id}\t{query_text}\t{masked}\n")
                count += 1
    return count
