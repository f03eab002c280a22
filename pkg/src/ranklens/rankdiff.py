"""Rank-provenance matrices: where a re-ranked run's documents came from.

Rank positions are bucketed into ranges (default 1-10, 11-100, 101-500,
501-1000).  Cell (i, j) counts (query, doc) pairs that a target run
places in range i while the base run had them in range j, pooled over
all queries the two runs share, optionally restricted to a relevance
stratum.  Row-normalized ratios answer "documents the target ranks
1-10: what fraction did the base rank 11-100?".

Documents ranked beyond the last range bound in either run are
excluded.  A target document missing from the base run is an error
unless ``allow_unknown_origin`` routes it to an extra trailing column.
"""

from __future__ import annotations

import html
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ranklens.corpus_io import Qrels, RunFile
from ranklens.errors import DataError

__all__ = [
    "RankRanges",
    "Stratum",
    "STRATA",
    "ProvenanceMatrix",
    "provenance",
    "write_csv",
    "to_json",
    "write_json",
    "render_heatmap",
]

DEFAULT_BOUNDS = (10, 100, 500, 1000)


@dataclass(frozen=True)
class RankRanges:
    """Contiguous rank intervals, given by their inclusive upper bounds."""

    bounds: Tuple[int, ...] = DEFAULT_BOUNDS

    def __post_init__(self) -> None:
        if not self.bounds:
            raise ValueError("at least one range bound is required")
        previous = 0
        for bound in self.bounds:
            if bound <= previous:
                raise ValueError(f"range bounds must be strictly ascending: {self.bounds}")
            previous = bound

    def __len__(self) -> int:
        return len(self.bounds)

    def intervals(self) -> List[Tuple[int, int]]:
        lows = [1] + [b + 1 for b in self.bounds[:-1]]
        return list(zip(lows, self.bounds))

    def labels(self) -> List[str]:
        return [f"{lo}-{hi}" for lo, hi in self.intervals()]

    def locate(self, rank: int) -> Optional[int]:
        """Index of the range containing ``rank``; None beyond the last bound."""
        if rank < 1:
            raise ValueError(f"ranks are 1-based, got {rank}")
        for i, bound in enumerate(self.bounds):
            if rank <= bound:
                return i
        return None

    @classmethod
    def parse(cls, text: str) -> "RankRanges":
        """Parse comma-separated upper bounds, e.g. "10,100,500,1000"."""
        try:
            bounds = tuple(int(part) for part in text.split(","))
        except ValueError:
            raise ValueError(f"cannot parse range bounds from {text!r}") from None
        return cls(bounds)


@dataclass(frozen=True)
class Stratum:
    """Relevance filter: None keeps every document, judged or not."""

    name: str
    grades: Optional[frozenset] = None


STRATA: Dict[str, Stratum] = {
    "all": Stratum("all", None),
    "highly_relevant": Stratum("highly_relevant", frozenset({3})),
    "relevant": Stratum("relevant", frozenset({2})),
    "non_relevant": Stratum("non_relevant", frozenset({0, 1})),
}


@dataclass
class ProvenanceMatrix:
    counts: np.ndarray
    ratios: np.ndarray
    row_totals: np.ndarray
    ranges: RankRanges
    stratum: Stratum
    unknown_origin_column: bool
    aggregation: str
    query_count: int
    meta: Dict[str, Optional[str]] = field(default_factory=dict)

    def column_labels(self) -> List[str]:
        labels = self.ranges.labels()
        if self.unknown_origin_column:
            labels.append("unknown")
        return labels


def provenance(
    base: RunFile,
    target: RunFile,
    ranges: RankRanges = RankRanges(),
    stratum: Stratum = STRATA["all"],
    qrels: Optional[Qrels] = None,
    allow_unknown_origin: bool = False,
    per_query_average: bool = False,
) -> ProvenanceMatrix:
    """Count rank-range origins of the target run's documents.

    Ratios are pooled (global counts row-normalized); with
    ``per_query_average`` they become the mean of per-query
    row-normalized matrices instead, each query weighted equally and
    empty rows skipped.
    """
    if stratum.grades is not None and qrels is None:
        raise DataError(f"stratum {stratum.name!r} requires qrels")
    n_ranges = len(ranges)
    n_cols = n_ranges + 1 if allow_unknown_origin else n_ranges
    counts = np.zeros((n_ranges, n_cols), dtype=np.int64)
    ratio_sums = np.zeros((n_ranges, n_cols), dtype=np.float64)
    contributing = np.zeros(n_ranges, dtype=np.int64)
    shared = [q for q in target.queries() if q in base]

    for query_id in shared:
        base_ranks = {e.doc_id: e.rank for e in base.entries(query_id)}
        query_counts = np.zeros((n_ranges, n_cols), dtype=np.int64)
        for entry in target.entries(query_id):
            target_range = ranges.locate(entry.rank)
            if target_range is None:
                continue
            if stratum.grades is not None:
                if not qrels.is_judged(query_id, entry.doc_id):
                    continue
                if qrels.grade(query_id, entry.doc_id) not in stratum.grades:
                    continue
            base_rank = base_ranks.get(entry.doc_id)
            if base_rank is None:
                if allow_unknown_origin:
                    query_counts[target_range, n_ranges] += 1
                    continue
                raise DataError(
                    f"query {query_id!r}: doc {entry.doc_id!r} in target run is "
                    f"missing from the base run (use the permissive mode to "
                    f"count it as unknown origin)"
                )
            base_range = ranges.locate(base_rank)
            if base_range is None:
                continue
            query_counts[target_range, base_range] += 1
        counts += query_counts
        if per_query_average:
            totals = query_counts.sum(axis=1)
            for row in range(n_ranges):
                if totals[row] > 0:
                    ratio_sums[row] += query_counts[row] / totals[row]
                    contributing[row] += 1

    row_totals = counts.sum(axis=1)
    ratios = np.zeros_like(counts, dtype=np.float64)
    if per_query_average:
        for row in range(n_ranges):
            if contributing[row] > 0:
                ratios[row] = ratio_sums[row] / contributing[row]
        aggregation = "per_query_mean"
    else:
        nonzero = row_totals > 0
        ratios[nonzero] = counts[nonzero] / row_totals[nonzero, None]
        aggregation = "pooled"

    return ProvenanceMatrix(
        counts=counts,
        ratios=ratios,
        row_totals=row_totals,
        ranges=ranges,
        stratum=stratum,
        unknown_origin_column=allow_unknown_origin,
        aggregation=aggregation,
        query_count=len(shared),
        meta={
            "base_tag": base.tag(),
            "target_tag": target.tag(),
            "base_path": base.path,
            "target_path": target.path,
            "qrels_path": qrels.path if qrels is not None else None,
        },
    )


def write_csv(matrix: ProvenanceMatrix, path, kind: str = "ratios") -> None:
    """One row per target range; ratios carry 4 decimals."""
    if kind not in ("ratios", "counts"):
        raise ValueError(f"kind must be 'ratios' or 'counts', got {kind!r}")
    row_labels = matrix.ranges.labels()
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write("target_range," + ",".join(matrix.column_labels()) + "\n")
        for i, label in enumerate(row_labels):
            if kind == "ratios":
                cells = [f"{v:.4f}" for v in matrix.ratios[i]]
            else:
                cells = [str(int(v)) for v in matrix.counts[i]]
            out.write(label + "," + ",".join(cells) + "\n")


def to_json(matrix: ProvenanceMatrix) -> dict:
    return {
        "format": "ranklens-provenance-v1",
        "ranges": [list(iv) for iv in matrix.ranges.intervals()],
        "column_labels": matrix.column_labels(),
        "stratum": {
            "name": matrix.stratum.name,
            "grades": sorted(matrix.stratum.grades)
            if matrix.stratum.grades is not None
            else None,
        },
        "aggregation": matrix.aggregation,
        "query_count": matrix.query_count,
        "counts": matrix.counts.tolist(),
        "ratios": matrix.ratios.tolist(),
        "row_totals": matrix.row_totals.tolist(),
        "unknown_origin_column": matrix.unknown_origin_column,
        "meta": matrix.meta,
    }


def write_json(matrix: ProvenanceMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        json.dump(to_json(matrix), out, indent=2)
        out.write("\n")


def _percent_label(ratio: float) -> str:
    text = f"{100.0 * ratio:.1f}"
    if text.endswith(".0"):
        text = text[:-2]
    return text + "%"


def _cell_fill(ratio: float) -> str:
    # white -> steel blue
    r = round(255 + (31 - 255) * ratio)
    g = round(255 + (119 - 255) * ratio)
    b = round(255 + (180 - 255) * ratio)
    return f"#{r:02x}{g:02x}{b:02x}"


def render_heatmap(matrix: ProvenanceMatrix, path) -> None:
    """Write a self-contained SVG: shaded grid annotated with percentages.

    Rows whose total is zero render every cell as "–".  Output is
    byte-deterministic for identical matrices.
    """
    cell_w, cell_h = 92, 56
    left, top = 110, 86
    n_rows = len(matrix.ranges)
    n_cols = matrix.counts.shape[1]
    width = left + n_cols * cell_w + 24
    height = top + n_rows * cell_h + 56
    base_name = matrix.meta.get("base_tag") or "base"
    target_name = matrix.meta.get("target_tag") or "target"
    title = f"rank origin: {matrix.stratum.name} ({target_name} vs {base_name})"

    parts: List[str] = []
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">'
    )
    parts.append(
        '<style>text{font-family:Helvetica,Arial,sans-serif;font-size:13px}'
        ".title{font-size:15px;font-weight:bold}.axis{font-size:13px;font-style:italic}"
        "</style>"
    )
    parts.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    parts.append(
        f'<text class="title" x="{width / 2:g}" y="24" text-anchor="middle">'
        f"{html.escape(title)}</text>"
    )
    parts.append(
        f'<text class="axis" x="{left + n_cols * cell_w / 2:g}" y="48" '
        f'text-anchor="middle">rank in {html.escape(base_name)} run</text>'
    )
    parts.append(
        f'<text class="axis" x="18" y="{top + n_rows * cell_h / 2:g}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + n_rows * cell_h / 2:g})">'
        f"rank in {html.escape(target_name)} run</text>"
    )
    for j, label in enumerate(matrix.column_labels()):
        x = left + j * cell_w + cell_w / 2
        parts.append(
            f'<text x="{x:g}" y="{top - 10}" text-anchor="middle">'
            f"{html.escape(label)}</text>"
        )
    for i, label in enumerate(matrix.ranges.labels()):
        y = top + i * cell_h + cell_h / 2 + 5
        parts.append(
            f'<text x="{left - 10}" y="{y:g}" text-anchor="end">'
            f"{html.escape(label)}</text>"
        )
    for i in range(n_rows):
        empty_row = matrix.row_totals[i] == 0
        for j in range(n_cols):
            x = left + j * cell_w
            y = top + i * cell_h
            ratio = float(matrix.ratios[i, j])
            fill = "#ffffff" if empty_row else _cell_fill(ratio)
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" '
                f'fill="{fill}" stroke="#888888"/>'
            )
            label = "–" if empty_row else _percent_label(ratio)
            color = "#ffffff" if (not empty_row and ratio > 0.55) else "#1a1a1a"
            parts.append(
                f'<text x="{x + cell_w / 2:g}" y="{y + cell_h / 2 + 5:g}" '
                f'text-anchor="middle" fill="{color}">{label}</text>'
            )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write("\n".join(parts))
        out.write("\n")
