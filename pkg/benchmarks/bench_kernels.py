"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--sets 200] [--dim 40] [--negatives 15]

Both backends run the same single-chunk workload from identical starting
weights, so the final matrices are also compared.
"""
import argparse
import time

import numpy as np

from itemvec import _pykernels
from itemvec.evaluation import synth_corpus
from itemvec.sampling import NegativeTable
from itemvec.trainer import init_model, pairs_per_set

try:
    from itemvec import _kernels
except ImportError:
    _kernels = None


def run(impl, U, V, corpus, table, args):
    U, V = U.copy(), V.copy()
    pairs = int(pairs_per_set(corpus.lengths(), args.window).sum())
    seeds = np.array([11], dtype=np.uint64)
    t0 = time.perf_counter()
    done = impl.train_sets(U, V, corpus.ids, corpus.offsets, table.prob, table.alias,
                           args.negatives, args.window, 0.025, 0.0125, pairs, seeds, False)
    elapsed = time.perf_counter() - t0
    return U, V, done, elapsed


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--sets", type=int, default=200)
    p.add_argument("--set-size", type=int, default=20)
    p.add_argument("--dim", type=int, default=40)
    p.add_argument("--negatives", type=int, default=15)
    p.add_argument("--window", type=int, default=0, help="0 = all pairs")
    args = p.parse_args()

    corpus, vocab, _ = synth_corpus(13, 100, args.sets, args.set_size, 0.1, seed=0)
    table = NegativeTable(vocab.counts)
    model = init_model(vocab, args.dim, seed=0)
    # non-zero context vectors so the dot products are not trivial
    model.V[:] = np.random.default_rng(1).normal(0, 0.1, model.V.shape)

    results = {}
    backends = [("python", _pykernels)] + ([("cython", _kernels)] if _kernels else [])
    for name, impl in backends:
        U, V, done, elapsed = run(impl, model.U, model.V, corpus, table, args)
        results[name] = (U, V)
        print(f"{name:<8}{done:>10d} pairs  {elapsed:8.3f}s  {1e6 * elapsed / done:9.3f} us/pair")
    if _kernels is None:
        print("compiled backend not built; only the fallback was timed")
        return
    (Up, Vp), (Uc, Vc) = results["python"], results["cython"]
    print(f"max |dU| {np.abs(Up - Uc).max():.1e}, max |dV| {np.abs(Vp - Vc).max():.1e}")


if __name__ == "__main__":
    main()
