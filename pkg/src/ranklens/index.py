"""Inverted index: build, persist, load, lookup.

On-disk layout (single file, all fixed-width integers little-endian,
all varints unsigned LEB128 — 7 data bits per byte, high bit set while
more bytes follow):

  header     magic "RLIX" | u32 version (=1) | u64 doc count |
             u64 term count | f64 avgdl | u64 postings section length
  dictionary per term, sorted by UTF-8 bytes:
             u32 term length | term bytes | u64 df | u64 postings offset
             (offset relative to the postings section start)
  postings   per term: 2*df varints, doc-ordinal deltas interleaved
             with term frequencies; first delta is the ordinal itself
  doc table  per document, in ordinal order:
             u32 id length | id bytes | u32 token count (dl)
  checksum   8-byte BLAKE2b digest of every preceding byte

Doc ordinals are assigned in corpus order, which keeps deltas small and
builds deterministic.  After ``load`` the dictionary and doc table live
in memory; posting bytes are read on demand from the mapped file.  A
loaded index is immutable and safe for concurrent lookups.
"""

from __future__ import annotations

import hashlib
import mmap
import struct
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Tuple

import numpy as np

from ranklens import _kernels
from ranklens.corpus_io import Passage
from ranklens.errors import CorruptIndexError, IndexFormatError, StructureError
from ranklens.textprep import analyze_terms

__all__ = ["InvertedIndex", "IndexStats", "PostingList", "build", "save", "load"]

_MAGIC = b"RLIX"
_VERSION = 1
_HEADER = struct.Struct("<4sIQQdQ")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_CHECKSUM_BYTES = 8


def _checksum(view) -> bytes:
    return hashlib.blake2b(view, digest_size=_CHECKSUM_BYTES).digest()


class PostingList(NamedTuple):
    doc_ordinals: np.ndarray
    tfs: np.ndarray

    @property
    def df(self) -> int:
        return len(self.doc_ordinals)


@dataclass(frozen=True)
class IndexStats:
    doc_count: int
    avgdl: float
    doc_lengths: np.ndarray
    term_count: int


class InvertedIndex:
    """Term dictionary + compressed postings + document statistics."""

    def __init__(
        self,
        dictionary: Dict[str, Tuple[int, int, int]],
        postings_buf,
        doc_ids: List[str],
        doc_lengths: np.ndarray,
        avgdl: float,
        mmap_obj=None,
        file_obj=None,
    ) -> None:
        # dictionary maps term -> (df, start, end) into postings_buf
        self._dict = dictionary
        self._postings = postings_buf
        self._doc_ids = doc_ids
        self._dl = doc_lengths
        self._avgdl = avgdl
        self._mmap = mmap_obj
        self._file = file_obj
        self._id_to_ordinal: Optional[Dict[str, int]] = None

    # -- statistics ---------------------------------------------------

    @property
    def doc_count(self) -> int:
        return len(self._doc_ids)

    @property
    def term_count(self) -> int:
        return len(self._dict)

    @property
    def avgdl(self) -> float:
        return self._avgdl

    @property
    def doc_lengths(self) -> np.ndarray:
        return self._dl

    def stats(self) -> IndexStats:
        return IndexStats(self.doc_count, self._avgdl, self._dl, self.term_count)

    # -- lookups ------------------------------------------------------

    def terms(self) -> Iterable[str]:
        return self._dict.keys()

    def df(self, term: str) -> int:
        entry = self._dict.get(term)
        return entry[0] if entry else 0

    def postings_blob(self, term: str) -> Tuple[int, memoryview]:
        """(df, raw varint bytes) for a term; df 0 with empty view if absent."""
        entry = self._dict.get(term)
        if entry is None:
            return 0, memoryview(b"")
        df, start, end = entry
        return df, memoryview(self._postings)[start:end]

    def lookup(self, term: str) -> PostingList:
        """Full decoded postings for ``term``; empty arrays if unindexed."""
        df, blob = self.postings_blob(term)
        if df == 0:
            empty = np.empty(0, dtype=np.int64)
            return PostingList(empty, empty.copy())
        ordinals, tfs = _kernels.decode_postings(blob, df)
        return PostingList(ordinals, tfs)

    def doc_id(self, ordinal: int) -> str:
        return self._doc_ids[ordinal]

    def doc_ids(self) -> List[str]:
        return self._doc_ids

    def ordinal(self, doc_id: str) -> int:
        if self._id_to_ordinal is None:
            self._id_to_ordinal = {d: i for i, d in enumerate(self._doc_ids)}
        return self._id_to_ordinal[doc_id]

    def doc_length(self, ordinal: int) -> int:
        return int(self._dl[ordinal])

    # -- persistence ----------------------------------------------------

    def save(self, path) -> None:
        """Write the sectioned binary format described in the module docstring."""
        terms = sorted(self._dict)
        hasher = hashlib.blake2b(digest_size=_CHECKSUM_BYTES)
        with open(path, "wb") as out:

            def emit(data: bytes) -> None:
                hasher.update(data)
                out.write(data)

            blobs = []
            offsets = []
            running = 0
            for term in terms:
                df, blob = self.postings_blob(term)
                blobs.append(blob)
                offsets.append(running)
                running += len(blob)
            emit(
                _HEADER.pack(
                    _MAGIC,
                    _VERSION,
                    self.doc_count,
                    len(terms),
                    self._avgdl,
                    running,
                )
            )
            for term, offset in zip(terms, offsets):
                raw = term.encode("utf-8")
                emit(_U32.pack(len(raw)))
                emit(raw)
                emit(_U64.pack(self._dict[term][0]))
                emit(_U64.pack(offset))
            for blob in blobs:
                emit(bytes(blob))
            for ordinal, doc_id in enumerate(self._doc_ids):
                raw = doc_id.encode("utf-8")
                emit(_U32.pack(len(raw)))
                emit(raw)
                emit(_U32.pack(int(self._dl[ordinal])))
            out.write(hasher.digest())

    def close(self) -> None:
        if self._mmap is not None:
            self._mmap.close()
            self._mmap = None
        if self._file is not None:
            self._file.close()
            self._file = None

    def __enter__(self) -> "InvertedIndex":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def build(
    corpus: Iterable[Passage],
    analyzer: Callable[[str], List[str]] = analyze_terms,
) -> InvertedIndex:
    """Index a passage stream.

    Documents that analyze to zero tokens are kept (dl=0) so ordinals
    stay dense; they can never match a query.  Duplicate doc ids are a
    build error.
    """
    doc_ids: List[str] = []
    seen: Dict[str, int] = {}
    doc_lengths: List[int] = []
    # term -> [encoded bytearray, last ordinal, df]
    postings: Dict[str, list] = {}

    for passage in corpus:
        if passage.doc_id in seen:
            raise StructureError(f"duplicate doc_id {passage.doc_id!r}")
        ordinal = len(doc_ids)
        seen[passage.doc_id] = ordinal
        doc_ids.append(passage.doc_id)
        terms = analyzer(passage.text)
        doc_lengths.append(len(terms))
        counts: Dict[str, int] = {}
        for term in terms:
            counts[term] = counts.get(term, 0) + 1
        for term, tf in counts.items():
            entry = postings.get(term)
            if entry is None:
                entry = [bytearray(), 0, 0]
                postings[term] = entry
            buf = entry[0]
            delta = ordinal - entry[1]
            while delta >= 0x80:
                buf.append((delta & 0x7F) | 0x80)
                delta >>= 7
            buf.append(delta)
            while tf >= 0x80:
                buf.append((tf & 0x7F) | 0x80)
                tf >>= 7
            buf.append(tf)
            entry[1] = ordinal
            entry[2] += 1

    dictionary: Dict[str, Tuple[int, int, int]] = {}
    parts: List[bytes] = []
    running = 0
    for term in sorted(postings):
        buf, _last, df = postings[term]
        blob = bytes(buf)
        dictionary[term] = (df, running, running + len(blob))
        parts.append(blob)
        running += len(blob)
    buf_all = b"".join(parts)

    n = len(doc_ids)
    dl = np.asarray(doc_lengths, dtype=np.int64)
    avgdl = float(dl.sum() / n) if n else 0.0
    return InvertedIndex(dictionary, buf_all, doc_ids, dl, avgdl)


def save(index: InvertedIndex, path) -> None:
    index.save(path)


def load(path) -> InvertedIndex:
    """Map an index file, verify its checksum, and load the dictionary."""
    handle = open(path, "rb")
    mapped = None
    view = None
    try:
        try:
            mapped = mmap.mmap(handle.fileno(), 0, access=mmap.ACCESS_READ)
        except ValueError:
            raise CorruptIndexError(f"{path}: truncated (empty file)") from None
        view = memoryview(mapped)
        size = len(view)
        if size < len(_MAGIC):
            raise CorruptIndexError(f"{path}: truncated ({size} bytes)")
        if bytes(view[: len(_MAGIC)]) != _MAGIC:
            raise IndexFormatError(f"{path}: not an index file (bad magic)")
        if size < _HEADER.size + _CHECKSUM_BYTES:
            raise CorruptIndexError(f"{path}: truncated ({size} bytes)")
        version = _U32.unpack_from(view, 4)[0]
        if version != _VERSION:
            raise IndexFormatError(
                f"{path}: unsupported format version {version} (expected {_VERSION})"
            )
        if _checksum(view[:-_CHECKSUM_BYTES]) != bytes(view[-_CHECKSUM_BYTES:]):
            raise CorruptIndexError(f"{path}: checksum mismatch")
        _magic, _version, n_docs, term_count, avgdl, postings_len = _HEADER.unpack_from(
            view, 0
        )

        pos = _HEADER.size
        limit = size - _CHECKSUM_BYTES
        names: List[str] = []
        dfs: List[int] = []
        rel_offsets: List[int] = []
        try:
            for _ in range(term_count):
                (term_len,) = _U32.unpack_from(view, pos)
                pos += 4
                names.append(bytes(view[pos : pos + term_len]).decode("utf-8"))
                pos += term_len
                (df,) = _U64.unpack_from(view, pos)
                pos += 8
                (offset,) = _U64.unpack_from(view, pos)
                pos += 8
                dfs.append(df)
                rel_offsets.append(offset)
            postings_base = pos
            pos += postings_len
            doc_ids: List[str] = []
            doc_lengths = np.empty(n_docs, dtype=np.int64)
            for ordinal in range(n_docs):
                (id_len,) = _U32.unpack_from(view, pos)
                pos += 4
                doc_ids.append(bytes(view[pos : pos + id_len]).decode("utf-8"))
                pos += id_len
                (dl,) = _U32.unpack_from(view, pos)
                pos += 4
                doc_lengths[ordinal] = dl
        except (struct.error, UnicodeDecodeError):
            raise CorruptIndexError(f"{path}: truncated section data") from None
        if pos != limit:
            raise CorruptIndexError(
                f"{path}: section sizes inconsistent ({pos} != {limit})"
            )
        expected_avgdl = float(doc_lengths.sum() / n_docs) if n_docs else 0.0
        if avgdl != expected_avgdl:
            raise CorruptIndexError(f"{path}: stored avgdl disagrees with doc table")

        dictionary: Dict[str, Tuple[int, int, int]] = {}
        for i, term in enumerate(names):
            start = postings_base + rel_offsets[i]
            end = (
                postings_base + rel_offsets[i + 1]
                if i + 1 < term_count
                else postings_base + postings_len
            )
            dictionary[term] = (dfs[i], start, end)
        view.release()
        return InvertedIndex(
            dictionary,
            mapped,
            doc_ids,
            doc_lengths,
            avgdl,
            mmap_obj=mapped,
            file_obj=handle,
        )
    except Exception:
        if view is not None:
            view.release()
        if mapped is not None:
            mapped.close()
        handle.close()
        raise
