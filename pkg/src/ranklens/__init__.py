"""ranklens: BM25 retrieval and ranker-comparison diagnostics.

Subpackages cover the pipeline end to end: text analysis (textprep),
file formats (corpus_io), the inverted index (index), BM25 scoring
(bm25), TREC metrics (metrics), rank-provenance matrices (rankdiff)
and masked ablation corpora (maskgen).  The ``ranklens`` command wires
them together.
"""

__version__ = "0.1.0"
