"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--vocab 50000] [--docs 20000] [--dim 200]

Both backends run on identical inputs; the script also reports the largest
absolute difference between their outputs.
"""
import argparse
import time

import numpy as np

from moralframe import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def make_inputs(vocab, docs, dim, doc_len, seed):
    rng = np.random.default_rng(seed)
    vectors = rng.normal(0.0, 1.0, (vocab, dim))
    directions = rng.normal(0.0, 1.0, (3, dim))
    lengths = rng.integers(1, doc_len, docs)
    indptr = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
    ids = rng.integers(0, vocab, int(indptr[-1])).astype(np.int64)
    counts = rng.integers(1, 5, int(indptr[-1])).astype(np.float64)
    return vectors, directions, indptr, ids, counts


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--vocab", type=int, default=50_000)
    ap.add_argument("--docs", type=int, default=20_000)
    ap.add_argument("--dim", type=int, default=200)
    ap.add_argument("--doc-len", type=int, default=150)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    vectors, directions, indptr, ids, counts = make_inputs(args.vocab, args.docs, args.dim, args.doc_len, args.seed)
    print(f"vocab={args.vocab} docs={args.docs} dim={args.dim} nnz={ids.size}")
    if not _kernels.HAVE_NUMBA:
        print("numba not importable; timing the numpy fallback only")

    t_np, cos_np = best_of(lambda: _kernels.row_cosines_numpy(vectors, directions), args.repeat)
    cos_values = cos_np
    t_npm, (mean_np, _) = best_of(lambda: _kernels.doc_weighted_mean_numpy(indptr, ids, counts, cos_values), args.repeat)
    rows = [("row_cosines", "numpy", t_np), ("doc_weighted_mean", "numpy", t_npm)]

    if _kernels.HAVE_NUMBA:
        # first call compiles; keep it out of the timings
        _kernels.row_cosines_numba(vectors[:2], directions)
        _kernels.doc_weighted_mean_numba(indptr[:2], ids[: indptr[1]], counts[: indptr[1]], cos_values)
        t_nb, cos_nb = best_of(lambda: _kernels.row_cosines_numba(vectors, directions), args.repeat)
        t_nbm, (mean_nb, _) = best_of(lambda: _kernels.doc_weighted_mean_numba(indptr, ids, counts, cos_values), args.repeat)
        rows += [("row_cosines", "numba", t_nb), ("doc_weighted_mean", "numba", t_nbm)]

    print(f"{'kernel':<20}{'backend':<10}{'best (ms)':>12}")
    for name, backend, t in rows:
        print(f"{name:<20}{backend:<10}{t * 1e3:>12.2f}")
    if _kernels.HAVE_NUMBA:
        print(f"speedup row_cosines: {t_np / t_nb:.2f}x, doc_weighted_mean: {t_npm / t_nbm:.2f}x")
        print(f"max |numpy - numba|: cosines {np.max(np.abs(cos_np - cos_nb)):.2e}, means {np.nanmax(np.abs(mean_np - mean_nb)):.2e}")


if __name__ == "__main__":
    main()
