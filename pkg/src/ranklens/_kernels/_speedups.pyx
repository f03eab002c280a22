# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled posting kernels: LEB128 varint codec and fused BM25 accumulation.

Must stay observationally identical to ``_fallback``; the parity tests
compare bytes, arrays and float results between the two backends.
"""

import numpy as np

cimport cython
from libc.stdint cimport int64_t, uint64_t

__all__ = ["encode_postings", "decode_postings", "accumulate_bm25"]


cdef inline int _uvarint_len(uint64_t value) noexcept nogil:
    cdef int n = 1
    while value >= 0x80:
        value >>= 7
        n += 1
    return n


def encode_postings(ordinals, tfs):
    """Encode parallel (ordinal, tf) sequences into a delta varint blob."""
    cdef int64_t[::1] ords = np.ascontiguousarray(ordinals, dtype=np.int64)
    cdef int64_t[::1] freqs = np.ascontiguousarray(tfs, dtype=np.int64)
    if ords.shape[0] != freqs.shape[0]:
        raise ValueError("ordinals and tfs must have equal length")
    cdef Py_ssize_t count = ords.shape[0]
    cdef Py_ssize_t p
    cdef int64_t prev = 0, delta
    cdef uint64_t value
    cdef Py_ssize_t total = 0
    for p in range(count):
        delta = ords[p] - prev
        if delta < 0 or (p > 0 and delta == 0):
            raise ValueError("doc ordinals must be strictly increasing")
        if freqs[p] < 1:
            raise ValueError("term frequencies must be >= 1")
        total += _uvarint_len(<uint64_t> delta) + _uvarint_len(<uint64_t> freqs[p])
        prev = ords[p]
    out = bytearray(total)
    cdef unsigned char[::1] buf = out
    cdef Py_ssize_t i = 0
    prev = 0
    with nogil:
        for p in range(count):
            value = <uint64_t> (ords[p] - prev)
            while value >= 0x80:
                buf[i] = <unsigned char> ((value & 0x7F) | 0x80)
                value >>= 7
                i += 1
            buf[i] = <unsigned char> value
            i += 1
            value = <uint64_t> freqs[p]
            while value >= 0x80:
                buf[i] = <unsigned char> ((value & 0x7F) | 0x80)
                value >>= 7
                i += 1
            buf[i] = <unsigned char> value
            i += 1
            prev = ords[p]
    return bytes(out)


def decode_postings(data, Py_ssize_t count):
    """Decode ``count`` postings; returns (ordinals, tfs) int64 arrays."""
    cdef const unsigned char[::1] view = data
    ordinals = np.empty(count, dtype=np.int64)
    tfs = np.empty(count, dtype=np.int64)
    cdef int64_t[::1] ords = ordinals
    cdef int64_t[::1] freqs = tfs
    cdef Py_ssize_t n = view.shape[0]
    cdef Py_ssize_t i = 0, p
    cdef uint64_t value
    cdef int shift
    cdef unsigned char byte
    cdef int64_t prev = 0
    cdef bint truncated = False
    with nogil:
        for p in range(count):
            value = 0
            shift = 0
            while True:
                if i >= n:
                    truncated = True
                    break
                byte = view[i]
                i += 1
                value |= (<uint64_t> (byte & 0x7F)) << shift
                if byte < 0x80:
                    break
                shift += 7
            if truncated:
                break
            prev += <int64_t> value
            ords[p] = prev
            value = 0
            shift = 0
            while True:
                if i >= n:
                    truncated = True
                    break
                byte = view[i]
                i += 1
                value |= (<uint64_t> (byte & 0x7F)) << shift
                if byte < 0x80:
                    break
                shift += 7
            if truncated:
                break
            freqs[p] = <int64_t> value
    if truncated:
        raise ValueError("truncated postings data")
    return ordinals, tfs


def accumulate_bm25(data, Py_ssize_t count, double idf, norm, scores):
    """scores[d] += idf * tf / (tf + norm[d]) for each posting (d, tf)."""
    cdef const unsigned char[::1] view = data
    cdef double[::1] norm_v = norm
    cdef double[::1] scores_v = scores
    cdef Py_ssize_t n = view.shape[0]
    cdef Py_ssize_t ndocs = scores_v.shape[0]
    cdef Py_ssize_t i = 0, p
    cdef uint64_t value
    cdef int shift
    cdef unsigned char byte
    cdef int64_t ordinal = 0
    cdef double tf
    cdef int error = 0
    with nogil:
        for p in range(count):
            value = 0
            shift = 0
            while True:
                if i >= n:
                    error = 1
                    break
                byte = view[i]
                i += 1
                value |= (<uint64_t> (byte & 0x7F)) << shift
                if byte < 0x80:
                    break
                shift += 7
            if error:
                break
            ordinal += <int64_t> value
            value = 0
            shift = 0
            while True:
                if i >= n:
                    error = 1
                    break
                byte = view[i]
                i += 1
                value |= (<uint64_t> (byte & 0x7F)) << shift
                if byte < 0x80:
                    break
                shift += 7
            if error:
                break
            if ordinal >= ndocs:
                error = 2
                break
            tf = <double> value
            scores_v[ordinal] += idf * tf / (tf + norm_v[ordinal])
    if error == 1:
        raise ValueError("truncated postings data")
    if error == 2:
        raise ValueError("doc ordinal out of range")
