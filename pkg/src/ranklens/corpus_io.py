"""Readers and writers for the pipeline's file formats.

Formats:
  corpus / queries  TSV, ``id<TAB>text``, UTF-8, one record per line
  qrels             ``qid 0 docid grade`` whitespace-separated, grades 0..3
  run               TREC format, ``qid Q0 docid rank score tag``

Parsers never touch the text payload (no stripping beyond the line
terminator, no case folding): masking needs the original surface forms.
The run reader accepts arbitrary whitespace; the writer emits single
spaces and fixed-point scores with 6 decimals so that write-then-read
round-trips.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from ranklens.errors import ParseError, StructureError

logger = logging.getLogger(__name__)

__all__ = [
    "Passage",
    "Query",
    "Qrels",
    "RunEntry",
    "RunFile",
    "read_corpus",
    "read_queries",
    "read_qrels",
    "read_run",
    "write_run",
]


@dataclass(frozen=True)
class Passage:
    doc_id: str
    text: str


@dataclass(frozen=True)
class Query:
    query_id: str
    text: str


class Qrels:
    """Graded relevance judgments: (query_id, doc_id) -> grade in 0..3."""

    def __init__(self) -> None:
        self._grades: Dict[str, Dict[str, int]] = {}
        self.path: Optional[str] = None

    def add(self, query_id: str, doc_id: str, grade: int) -> None:
        per_query = self._grades.setdefault(query_id, {})
        if doc_id in per_query:
            raise StructureError(
                f"duplicate judgment for query {query_id!r}, doc {doc_id!r}"
            )
        per_query[doc_id] = grade

    def queries(self) -> List[str]:
        return list(self._grades)

    def for_query(self, query_id: str) -> Dict[str, int]:
        return self._grades.get(query_id, {})

    def grade(self, query_id: str, doc_id: str, default: int = 0) -> int:
        return self._grades.get(query_id, {}).get(doc_id, default)

    def is_judged(self, query_id: str, doc_id: str) -> bool:
        return doc_id in self._grades.get(query_id, {})

    def has_positive(self, query_id: str, min_grade: int = 1) -> bool:
        return any(g >= min_grade for g in self._grades.get(query_id, {}).values())

    def __len__(self) -> int:
        return sum(len(v) for v in self._grades.values())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Qrels) and self._grades == other._grades


@dataclass(frozen=True)
class RunEntry:
    doc_id: str
    rank: int
    score: float
    tag: str


class RunFile:
    """Per-query ranked lists; queries keep first-seen order.

    Within a query, ranks are exactly 1..n, each doc appears once and
    scores are non-increasing with rank (violations of the last one are
    tolerated with a warning, some published runs have them).
    """

    def __init__(self) -> None:
        self._entries: Dict[str, List[RunEntry]] = {}
        self.path: Optional[str] = None

    def add_ranking(
        self, query_id: str, scored: Iterable[Tuple[str, float]], tag: str
    ) -> None:
        """Append a query's ranking from (doc_id, score) pairs in rank order."""
        if query_id in self._entries:
            raise StructureError(f"query {query_id!r} added twice")
        entries = [
            RunEntry(doc_id, rank, float(score), tag)
            for rank, (doc_id, score) in enumerate(scored, start=1)
        ]
        self._validate_query(query_id, entries, warn_scores=False)
        self._entries[query_id] = entries

    def set_entries(self, query_id: str, entries: List[RunEntry]) -> None:
        if query_id in self._entries:
            raise StructureError(f"query {query_id!r} added twice")
        self._entries[query_id] = entries

    @staticmethod
    def _validate_query(
        query_id: str, entries: List[RunEntry], warn_scores: bool = True
    ) -> bool:
        """Check rank/doc invariants; returns True if scores are monotone."""
        seen_docs = set()
        for expected, entry in enumerate(entries, start=1):
            if entry.rank != expected:
                raise StructureError(
                    f"query {query_id!r}: ranks must be 1..n without gaps or "
                    f"duplicates (found rank {entry.rank} at position {expected})"
                )
            if entry.doc_id in seen_docs:
                raise StructureError(
                    f"query {query_id!r}: doc {entry.doc_id!r} appears twice"
                )
            seen_docs.add(entry.doc_id)
        monotone = all(
            entries[i].score >= entries[i + 1].score for i in range(len(entries) - 1)
        )
        return monotone

    def queries(self) -> List[str]:
        return list(self._entries)

    def entries(self, query_id: str) -> List[RunEntry]:
        return self._entries[query_id]

    def ranking(self, query_id: str) -> List[str]:
        return [e.doc_id for e in self._entries[query_id]]

    def rank_of(self, query_id: str, doc_id: str) -> Optional[int]:
        for entry in self._entries.get(query_id, []):
            if entry.doc_id == doc_id:
                return entry.rank
        return None

    def tag(self) -> str:
        for entries in self._entries.values():
            if entries:
                return entries[0].tag
        return ""

    def __contains__(self, query_id: str) -> bool:
        return query_id in self._entries

    def __len__(self) -> int:
        return len(self._entries)


def _tsv_records(path) -> Iterator[Tuple[int, str, str]]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            record_id, sep, text = line.partition("\t")
            if not sep:
                raise ParseError(path, line_no, "expected 'id<TAB>text'")
            if not record_id:
                raise ParseError(path, line_no, "empty identifier")
            yield line_no, record_id, text


def read_corpus(path, check_duplicates: bool = False) -> Iterator[Passage]:
    """Stream passages from a TSV collection file.

    Streaming keeps memory bounded; ``check_duplicates`` trades that for
    id-uniqueness validation (the index builder always validates ids
    itself, so the default leaves it off).
    """
    seen = set() if check_duplicates else None
    for line_no, doc_id, text in _tsv_records(path):
        if seen is not None:
            if doc_id in seen:
                raise StructureError(f"{path}:{line_no}: duplicate doc_id {doc_id!r}")
            seen.add(doc_id)
        yield Passage(doc_id, text)


def read_queries(path) -> List[Query]:
    """Read a query TSV; query ids must be unique."""
    queries: List[Query] = []
    seen = set()
    for line_no, query_id, text in _tsv_records(path):
        if query_id in seen:
            raise StructureError(f"{path}:{line_no}: duplicate query_id {query_id!r}")
        seen.add(query_id)
        queries.append(Query(query_id, text))
    return queries


def read_qrels(path, clamp: bool = False) -> Qrels:
    """Read TREC qrels. Grades outside 0..3 error unless ``clamp`` is set."""
    qrels = Qrels()
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 4:
                raise ParseError(
                    path, line_no, f"expected 4 fields, found {len(fields)}"
                )
            query_id, _iteration, doc_id, grade_str = fields
            try:
                grade = int(grade_str)
            except ValueError:
                raise ParseError(path, line_no, f"grade {grade_str!r} is not an integer")
            if not 0 <= grade <= 3:
                if clamp:
                    grade = min(3, max(0, grade))
                else:
                    raise ParseError(
                        path, line_no, f"grade {grade} outside 0..3 (use clamp to coerce)"
                    )
            try:
                qrels.add(query_id, doc_id, grade)
            except StructureError as exc:
                raise StructureError(f"{path}:{line_no}: {exc}") from None
    qrels.path = str(path)
    return qrels


def read_run(path) -> RunFile:
    """Read a TREC run file; entries are re-sorted by rank per query."""
    per_query: Dict[str, List[RunEntry]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 6:
                raise ParseError(
                    path, line_no, f"expected 6 fields, found {len(fields)}"
                )
            query_id, _q0, doc_id, rank_str, score_str, tag = fields
            try:
                rank = int(rank_str)
            except ValueError:
                raise ParseError(path, line_no, f"rank {rank_str!r} is not an integer")
            try:
                score = float(score_str)
            except ValueError:
                raise ParseError(path, line_no, f"score {score_str!r} is not a number")
            per_query.setdefault(query_id, []).append(
                RunEntry(doc_id, rank, score, tag)
            )
    run = RunFile()
    non_monotone = []
    for query_id, entries in per_query.items():
        entries.sort(key=lambda e: e.rank)
        try:
            monotone = RunFile._validate_query(query_id, entries)
        except StructureError as exc:
            raise StructureError(f"{path}: {exc}") from None
        if not monotone:
            non_monotone.append(query_id)
        run.set_entries(query_id, entries)
    if non_monotone:
        logger.warning(
            "%s: scores increase with rank for %d quer%s (first: %s)",
            path,
            len(non_monotone),
            "y" if len(non_monotone) == 1 else "ies",
            non_monotone[0],
        )
    run.path = str(path)
    return run


def write_run(run: RunFile, path) -> None:
    """Write a run in TREC format, scores fixed-point with 6 decimals."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for query_id in run.queries():
            for entry in run.entries(query_id):
                handle.write(
                    f"{query_id} Q0 {entry.doc_id} {entry.rank} "
                    f"{entry.score:.6f} {entry.tag}\n"
                )
