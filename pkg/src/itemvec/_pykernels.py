"""Pure-Python SGNS kernels.

Reference implementation of everything in ``_kernels.pyx``. It consumes the
random stream in the same order as the compiled code, so for ``threads=1``
the two backends agree to floating-point rounding of the dot products.
"""
from __future__ import annotations

import math

import numpy as np

from .rng import SplitMix64

BACKEND = "python"

MAX_EXP = 6.0
TABLE_SIZE = 1000
MAX_NEGATIVE_REDRAWS = 8

SIGMOID_TABLE = np.array(
    [1.0 / (1.0 + math.exp(-((i / TABLE_SIZE) * 2.0 - 1.0) * MAX_EXP)) for i in range(TABLE_SIZE)]
)


def sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _table_sigmoid(x: float) -> float:
    if x >= MAX_EXP:
        return 1.0
    if x <= -MAX_EXP:
        return 0.0
    return float(SIGMOID_TABLE[int((x + MAX_EXP) * (TABLE_SIZE / MAX_EXP / 2.0))])


def sgns_update(U, V, target, context, negatives, lr, use_table=False):
    sig = _table_sigmoid if use_table else sigmoid
    u = U[target]
    neu1e = np.zeros(U.shape[1])
    v = V[context]
    g = (1.0 - sig(float(u @ v))) * lr
    neu1e += g * v
    v += g * u
    for n in negatives:
        v = V[n]
        g = -sig(float(u @ v)) * lr
        neu1e += g * v
        v += g * u
    u += neu1e


def draw_alias(prob, alias, rng: SplitMix64) -> int:
    i = rng.bounded(len(prob))
    if rng.uniform() < prob[i]:
        return i
    return int(alias[i])


def alias_sample(prob, alias, size, seed):
    rng = SplitMix64(seed)
    prob = prob.tolist()
    alias = alias.tolist()
    out = np.empty(size, dtype=np.int32)
    for k in range(size):
        out[k] = draw_alias(prob, alias, rng)
    return out


def splitmix_stream(seed, size):
    rng = SplitMix64(seed)
    return np.array([rng.next_u64() for _ in range(size)], dtype=np.uint64)


def _negatives(prob, alias, context, n_neg, rng):
    out = []
    for _ in range(n_neg):
        for _attempt in range(MAX_NEGATIVE_REDRAWS + 1):
            n = draw_alias(prob, alias, rng)
            if n != context:
                out.append(n)
                break
    return out


def train_sets(U, V, ids, offsets, prob, alias, n_neg, window, lr_start, lr_end,
               epoch_pairs, seeds, use_table=False):
    """Run one pass of SGNS over the flattened sets ``ids[offsets[s]:offsets[s+1]]``.

    Sets are split into ``len(seeds)`` contiguous chunks, each driven by its
    own generator; here the chunks run one after another.
    """
    prob = prob.tolist()
    alias = alias.tolist()
    nchunks = len(seeds)
    nsets = len(offsets) - 1
    total = 0
    for c in range(nchunks):
        rng = SplitMix64(int(seeds[c]))
        lo = c * nsets // nchunks
        hi = (c + 1) * nsets // nchunks
        done = 0
        for s in range(lo, hi):
            items = ids[offsets[s]:offsets[s + 1]].tolist()
            k = len(items)
            if k < 2:
                continue
            if window > 0:
                rng.shuffle(items)
            for i in range(k):
                if window > 0:
                    j_lo, j_hi = max(0, i - window), min(k - 1, i + window)
                else:
                    j_lo, j_hi = 0, k - 1
                for j in range(j_lo, j_hi + 1):
                    if j == i:
                        continue
                    progress = min(1.0, done * nchunks / epoch_pairs) if epoch_pairs > 0 else 1.0
                    lr = lr_start + (lr_end - lr_start) * progress
                    negs = _negatives(prob, alias, items[j], n_neg, rng)
                    sgns_update(U, V, items[i], items[j], negs, lr, use_table)
                    done += 1
        total += done
    return total
