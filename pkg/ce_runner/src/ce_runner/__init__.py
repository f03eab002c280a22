"""ce_runner: score (query, passage) pairs with a cross-encoder checkpoint.

Reads the 4-column pair TSV produced by the ranklens ``mask`` command
(or assembles pairs from a TREC run plus corpus/queries TSVs), scores
each pair with a sequence-classification checkpoint, and writes a TREC
run file ordered by relevance probability.
"""

__version__ = "0.1.0"
