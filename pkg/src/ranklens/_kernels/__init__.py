"""Posting kernel selection: compiled extension if built, else pure Python.

Set RANKLENS_PURE_PYTHON=1 to force the fallback (used by the kernel
benchmark and for debugging).  ``BACKEND`` names the active choice.
"""

import os

from ranklens._kernels import _fallback

if os.environ.get("RANKLENS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from ranklens._kernels import _speedups as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

encode_postings = _impl.encode_postings
decode_postings = _impl.decode_postings
accumulate_bm25 = _impl.accumulate_bm25

__all__ = ["encode_postings", "decode_postings", "accumulate_bm25", "BACKEND"]
