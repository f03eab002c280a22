"""Pure-Python posting kernels.

Reference implementation of the byte-level hot loops; the compiled
variant in ``_speedups.pyx`` must be observationally identical (same
bytes out of encode, same arrays out of decode, bitwise-equal floats
out of the score accumulation).

Wire format: unsigned LEB128 varints (7 data bits per byte, high bit
set while more bytes follow, least-significant group first).  A posting
list of length n is 2n varints: doc-ordinal deltas interleaved with
term frequencies.  The first delta is the first ordinal itself; later
deltas are strictly positive.
"""

from __future__ import annotations

import numpy as np

__all__ = ["encode_postings", "decode_postings", "accumulate_bm25"]


def _append_uvarint(buf: bytearray, value: int) -> None:
    if value < 0:
        raise ValueError("varint values must be non-negative")
    while value >= 0x80:
        buf.append((value & 0x7F) | 0x80)
        value >>= 7
    buf.append(value)


def encode_postings(ordinals, tfs) -> bytes:
    """Encode parallel (ordinal, tf) sequences into a delta varint blob.

    Ordinals must be strictly increasing and non-negative; tfs >= 1.
    """
    if len(ordinals) != len(tfs):
        raise ValueError("ordinals and tfs must have equal length")
    buf = bytearray()
    prev = 0
    first = True
    for ordinal, tf in zip(ordinals, tfs):
        ordinal = int(ordinal)
        tf = int(tf)
        delta = ordinal - prev
        if (first and delta < 0) or (not first and delta <= 0):
            raise ValueError("doc ordinals must be strictly increasing")
        if tf < 1:
            raise ValueError("term frequencies must be >= 1")
        _append_uvarint(buf, delta)
        _append_uvarint(buf, tf)
        prev = ordinal
        first = False
    return bytes(buf)


def decode_postings(data, count: int):
    """Decode ``count`` postings from ``data``.

    Returns (ordinals, tfs) as int64 numpy arrays.  Raises ValueError
    on truncated input.
    """
    ordinals = np.empty(count, dtype=np.int64)
    tfs = np.empty(count, dtype=np.int64)
    view = memoryview(data)
    n = len(view)
    i = 0
    prev = 0
    for p in range(count):
        value = 0
        shift = 0
        while True:
            if i >= n:
                raise ValueError("truncated postings data")
            byte = view[i]
            i += 1
            value |= (byte & 0x7F) << shift
            if byte < 0x80:
                break
            shift += 7
        prev += value
        ordinals[p] = prev
        value = 0
        shift = 0
        while True:
            if i >= n:
                raise ValueError("truncated postings data")
            byte = view[i]
            i += 1
            value |= (byte & 0x7F) << shift
            if byte < 0x80:
                break
            shift += 7
        tfs[p] = value
    return ordinals, tfs


def accumulate_bm25(data, count: int, idf: float, norm, scores) -> None:
    """Add this term's BM25 contribution to ``scores`` in place.

    For each posting (d, tf): scores[d] += idf * tf / (tf + norm[d]),
    where norm[d] = k1 * (1 - b + b * dl[d] / avgdl) is precomputed.
    """
    view = memoryview(data)
    n = len(view)
    ndocs = len(scores)
    i = 0
    ordinal = 0
    for _ in range(count):
        value = 0
        shift = 0
        while True:
            if i >= n:
                raise ValueError("truncated postings data")
            byte = view[i]
            i += 1
            value |= (byte & 0x7F) << shift
            if byte < 0x80:
                break
            shift += 7
        ordinal += value
        value = 0
        shift = 0
        while True:
            if i >= n:
                raise ValueError("truncated postings data")
            byte = view[i]
            i += 1
            value |= (byte & 0x7F) << shift
            if byte < 0x80:
                break
            shift += 7
        if ordinal >= ndocs:
            raise ValueError("doc ordinal out of range")
        tf = float(value)
        scores[ordinal] += idf * tf / (tf + norm[ordinal])
