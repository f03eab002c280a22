"""Batched cross-encoder inference.

The model sees ``[CLS] query [SEP] passage [SEP]``; the passage side is
truncated first when the pair exceeds the encoder window.  The score is
the relevance-class probability: softmax over two classes (index 1 by
default), or a sigmoid for single-logit heads.  Inference runs in eval
mode under no_grad, so scoring the same input file twice produces
identical runs.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Sequence, Tuple

import torch
from transformers import AutoModelForSequenceClassification, AutoTokenizer

from ce_runner.formats import ScoringPair

__all__ = ["CrossEncoder", "score_pairs_to_run"]


class CrossEncoder:
    def __init__(
        self,
        model_id: str,
        device: str | None = None,
        max_length: int = 512,
        batch_size: int = 32,
        relevant_class: int = 1,
    ) -> None:
        if batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForSequenceClassification.from_pretrained(model_id)
        self.model.eval()
        if device is None:
            device = "cuda" if torch.cuda.is_available() else "cpu"
        self.device = torch.device(device)
        self.model.to(self.device)
        # clamp the window to both the tokenizer's and the model's limits;
        # freshly built tokenizers report a huge sentinel, and position
        # embeddings bound what the encoder can actually consume
        limit = max_length
        tokenizer_limit = getattr(self.tokenizer, "model_max_length", None)
        if isinstance(tokenizer_limit, int) and 0 < tokenizer_limit < 1_000_000:
            limit = min(limit, tokenizer_limit)
        model_limit = getattr(self.model.config, "max_position_embeddings", None)
        if isinstance(model_limit, int) and model_limit > 0:
            limit = min(limit, model_limit)
        self.max_length = limit
        self.batch_size = batch_size
        self.relevant_class = relevant_class

    @torch.no_grad()
    def score_texts(self, queries: Sequence[str], passages: Sequence[str]) -> List[float]:
        """Relevance probabilities for parallel query/passage lists."""
        probabilities: List[float] = []
        for start in range(0, len(queries), self.batch_size):
            batch_q = list(queries[start : start + self.batch_size])
            batch_p = list(passages[start : start + self.batch_size])
            encoded = self.tokenizer(
                batch_q,
                batch_p,
                padding=True,
                truncation="only_second",
                max_length=self.max_length,
                return_tensors="pt",
            ).to(self.device)
            logits = self.model(**encoded).logits
            if logits.shape[-1] == 1:
                batch_probs = torch.sigmoid(logits.squeeze(-1))
            else:
                batch_probs = torch.softmax(logits, dim=-1)[:, self.relevant_class]
            probabilities.extend(batch_probs.cpu().tolist())
        return probabilities

    def score_pairs(
        self, pairs: Iterable[ScoringPair]
    ) -> Dict[str, List[Tuple[str, float]]]:
        """Score pairs and group results by query, input order preserved."""
        pairs = list(pairs)
        probs = self.score_texts(
            [p.query_text for p in pairs], [p.passage_text for p in pairs]
        )
        grouped: Dict[str, List[Tuple[str, float]]] = {}
        for pair, prob in zip(pairs, probs):
            grouped.setdefault(pair.query_id, []).append((pair.doc_id, prob))
        return grouped


def score_pairs_to_run(
    pairs: Iterable[ScoringPair], encoder: CrossEncoder, path, tag: str = "ce"
) -> int:
    """Score pairs and write the TREC run; returns the entry count."""
    from ce_runner.formats import write_run

    grouped = encoder.score_pairs(pairs)
    write_run(grouped, path, tag)
    return sum(len(v) for v in grouped.values())
