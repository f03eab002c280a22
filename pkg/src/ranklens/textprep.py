"""Deterministic text analysis shared by indexing, retrieval and masking.

Tokens are maximal runs of Unicode alphanumeric characters (letters and
digits); everything else separates tokens.  Normalization is plain
lowercasing: no stemming, no stopword removal, no width/accent folding.
Numbers are kept.  The same analyzer must be used on documents and
queries, otherwise term matching silently breaks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List

__all__ = ["Token", "analyze", "analyze_terms"]

# \w minus underscore == characters for which str.isalnum() holds.
_TOKEN_RE = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class Token:
    """One analyzed token with its position in the source string.

    ``start``/``end`` are byte offsets into the UTF-8 encoding of the
    source text; ``normalized`` is the lowercased surface form.
    """

    surface: str
    normalized: str
    start: int
    end: int


def analyze(text: str) -> List[Token]:
    """Split ``text`` into tokens with surface forms and byte offsets.

    Empty input yields an empty list. Token byte ranges are strictly
    increasing and non-overlapping.
    """
    tokens: List[Token] = []
    if not text:
        return tokens
    if text.isascii():
        for m in _TOKEN_RE.finditer(text):
            surface = m.group()
            tokens.append(Token(surface, surface.lower(), m.start(), m.end()))
        return tokens
    # Non-ASCII: convert character offsets to byte offsets with a single
    # running pass instead of re-encoding prefixes.
    byte_pos = 0
    char_pos = 0
    for m in _TOKEN_RE.finditer(text):
        byte_pos += len(text[char_pos : m.start()].encode("utf-8"))
        surface = m.group()
        nbytes = len(surface.encode("utf-8"))
        tokens.append(Token(surface, surface.lower(), byte_pos, byte_pos + nbytes))
        byte_pos += nbytes
        char_pos = m.end()
    return tokens


def analyze_terms(text: str) -> List[str]:
    """Fast path: normalized token strings only, no offsets.

    Equivalent to ``[t.normalized for t in analyze(text)]``.  Tokenizes
    before lowercasing: for a handful of code points (e.g. U+0130)
    ``str.lower()`` introduces combining marks that would otherwise
    change the token boundaries.
    """
    if not text:
        return []
    return [m.group().lower() for m in _TOKEN_RE.finditer(text)]
