import string

import pytest
import torch
from transformers import BertConfig, BertForSequenceClassification, BertTokenizerFast


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """A deterministic, randomly initialized 2-layer BERT checkpoint;
    keeps the tests offline and fast."""
    path = tmp_path_factory.mktemp("tinybert")
    words = [
        "cat", "dog", "the", "cabinet", "consists", "of", "ministers",
        "what", "is", "a", "fast", "runs", "king", "mask",
    ]
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab += list(string.ascii_lowercase) + words
    (path / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(path / "vocab.txt"))
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
        num_labels=2,
    )
    torch.manual_seed(1234)
    model = BertForSequenceClassification(config)
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)
    return str(path)
