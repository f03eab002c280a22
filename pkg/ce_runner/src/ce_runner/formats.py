"""File formats shared with the retrieval toolkit, reimplemented here.

This package talks to the toolkit only through files: pair TSVs
(``query_id<TAB>doc_id<TAB>query_text<TAB>passage_text``), plain
``id<TAB>text`` TSVs, and TREC run files
(``qid Q0 docid rank score tag``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Tuple


class FormatError(ValueError):
    """An input file violates its expected layout."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


@dataclass(frozen=True)
class ScoringPair:
    query_id: str
    doc_id: str
    query_text: str
    passage_text: str


def read_pairs(path) -> List[ScoringPair]:
    """Read a 4-column pair file; order is preserved."""
    pairs: List[ScoringPair] = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise FormatError(
                    path, line_no, f"expected 4 tab-separated fields, found {len(fields)}"
                )
            pairs.append(ScoringPair(*fields))
    return pairs


def read_tsv_map(path) -> Dict[str, str]:
    """Read an ``id<TAB>text`` file into a dict; duplicate ids error."""
    out: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            record_id, sep, text = line.partition("\t")
            if not sep or not record_id:
                raise FormatError(path, line_no, "expected 'id<TAB>text'")
            if record_id in out:
                raise FormatError(path, line_no, f"duplicate id {record_id!r}")
            out[record_id] = text
    return out


def read_run_rankings(path) -> Dict[str, List[str]]:
    """Read a TREC run into qid -> doc ids ordered by rank."""
    raw: Dict[str, List[Tuple[int, str]]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 6:
                raise FormatError(path, line_no, f"expected 6 fields, found {len(fields)}")
            qid, _q0, doc_id, rank_str, _score, _tag = fields
            try:
                rank = int(rank_str)
            except ValueError:
                raise FormatError(path, line_no, f"rank {rank_str!r} is not an integer")
            raw.setdefault(qid, []).append((rank, doc_id))
    rankings: Dict[str, List[str]] = {}
    for qid, entries in raw.items():
        entries.sort()
        rankings[qid] = [doc_id for _rank, doc_id in entries]
    return rankings


def pairs_from_run(
    rankings: Dict[str, List[str]],
    queries: Dict[str, str],
    corpus: Dict[str, str],
) -> Iterator[ScoringPair]:
    """Assemble unmasked pairs for every run entry, in run order."""
    for qid, doc_ids in rankings.items():
        if qid not in queries:
            raise KeyError(f"run query {qid!r} missing from the query file")
        for doc_id in doc_ids:
            if doc_id not in corpus:
                raise KeyError(f"run doc {doc_id!r} missing from the corpus file")
            yield ScoringPair(qid, doc_id, queries[qid], corpus[doc_id])


def write_run(
    scored: Dict[str, List[Tuple[str, float]]], path, tag: str = "ce"
) -> None:
    """Write a TREC run: per query, probability descending, doc_id
    breaking ties, ranks 1..n, scores with 6 decimals."""
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for qid, docs in scored.items():
            seen = set()
            for doc_id, _score in docs:
                if doc_id in seen:
                    raise ValueError(f"query {qid!r}: doc {doc_id!r} scored twice")
                seen.add(doc_id)
            ordered = sorted(docs, key=lambda p: (-p[1], p[0]))
            for rank, (doc_id, score) in enumerate(ordered, start=1):
                out.write(f"{qid} Q0 {doc_id} {rank} {score:.6f} {tag}\n")
