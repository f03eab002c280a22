#!/usr/bin/env python3
"""Benchmark the compiled posting kernels against the pure-Python fallback.

Times the varint codec and the fused BM25 accumulation on synthetic
postings, then an end-to-end top-k retrieval over a synthetic index.
Run after building the extension (pip install -e . --no-build-isolation):

    python benchmarks/bench_kernels.py --docs 200000 --queries 50
"""

import argparse
import time

import numpy as np

from ranklens._kernels import _fallback

try:
    from ranklens._kernels import _speedups
except ImportError:
    _speedups = None

from ranklens.bm25 import Bm25Params, Bm25Scorer
from ranklens.corpus_io import Passage
from ranklens.index import build


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def synthetic_postings(rng, n):
    ordinals = np.cumsum(rng.integers(1, 40, size=n))
    tfs = rng.integers(1, 20, size=n)
    return ordinals, tfs


def bench_kernels(args):
    rng = np.random.default_rng(args.seed)
    ordinals, tfs = synthetic_postings(rng, args.postings)
    ndocs = int(ordinals[-1]) + 1
    blob = _fallback.encode_postings(ordinals, tfs)
    norm = rng.uniform(0.5, 2.0, size=ndocs)
    print(f"postings: {args.postings:,} entries, {len(blob):,} bytes "
          f"({len(blob) / args.postings:.2f} B/posting)")
    impls = [("python", _fallback)] + ([("cython", _speedups)] if _speedups else [])
    rows = []
    for name, impl in impls:
        t_enc = timeit(lambda: impl.encode_postings(ordinals, tfs))
        t_dec = timeit(lambda: impl.decode_postings(blob, args.postings))

        def accumulate():
            scores = np.zeros(ndocs)
            impl.accumulate_bm25(blob, args.postings, 1.3, norm, scores)

        t_acc = timeit(accumulate)
        rows.append((name, t_enc, t_dec, t_acc))
    print(f"{'backend':<8} {'encode':>10} {'decode':>10} {'accumulate':>11}")
    for name, t_enc, t_dec, t_acc in rows:
        print(f"{name:<8} {t_enc * 1e3:>8.1f}ms {t_dec * 1e3:>8.1f}ms {t_acc * 1e3:>9.1f}ms")
    if len(rows) == 2:
        _, pe, pd, pa = rows[0]
        _, ce, cd, ca = rows[1]
        print(f"{'speedup':<8} {pe / ce:>9.1f}x {pd / cd:>9.1f}x {pa / ca:>10.1f}x")


def bench_retrieval(args):
    rng = np.random.default_rng(args.seed + 1)
    vocab = [f"w{i:04d}" for i in range(2000)]
    weights = 1.0 / np.arange(1, len(vocab) + 1)
    weights /= weights.sum()
    print(f"\nbuilding synthetic index: {args.docs:,} docs ...")
    corpus = (
        Passage(str(d), " ".join(rng.choice(vocab, size=40, p=weights)))
        for d in range(args.docs)
    )
    idx = build(corpus)
    queries = [list(rng.choice(vocab[:300], size=3)) for _ in range(args.queries)]

    import ranklens._kernels as kernels

    impls = [("python", _fallback)] + ([("cython", _speedups)] if _speedups else [])
    results = []
    for name, impl in impls:
        kernels.accumulate_bm25 = impl.accumulate_bm25
        scorer = Bm25Scorer(idx, Bm25Params(k=1000))
        elapsed = timeit(lambda: [scorer.retrieve(q) for q in queries], repeats=2)
        results.append((name, elapsed))
        print(f"retrieve top-1000, {args.queries} queries [{name:<6}]: "
              f"{elapsed:.2f}s ({args.queries / elapsed:.1f} q/s)")
    kernels.accumulate_bm25 = kernels._impl.accumulate_bm25
    if len(results) == 2:
        print(f"retrieval speedup: {results[0][1] / results[1][1]:.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--postings", type=int, default=2_000_000)
    parser.add_argument("--docs", type=int, default=100_000)
    parser.add_argument("--queries", type=int, default=20)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()
    if _speedups is None:
        print("note: compiled kernels not built; benchmarking pure Python only")
    bench_kernels(args)
    bench_retrieval(args)


if __name__ == "__main__":
    main()
