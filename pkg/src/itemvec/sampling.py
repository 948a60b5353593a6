"""Negative-sampling distribution over items, realised as a Vose alias table."""
from __future__ import annotations

import numpy as np

from . import kernels
from .rng import SplitMix64

POWER = 0.75


class NegativeTable:
    """Alias table drawing item ``i`` with probability ``counts[i]**power / Z``.

    Attributes:
        prob: acceptance threshold per column.
        alias: fallback item per column.
        weights: the normalized target distribution.
    """

    def __init__(self, counts, power: float = POWER):
        counts = np.asarray(counts, dtype=np.float64)
        if counts.ndim != 1 or len(counts) == 0:
            raise ValueError("need a nonempty 1-d count vector")
        if np.any(counts < 0) or counts.sum() <= 0:
            raise ValueError("counts must be nonnegative with a positive sum")
        w = counts ** power
        self.weights = w / w.sum()
        self.prob, self.alias = vose(self.weights)

    def __len__(self) -> int:
        return len(self.prob)

    def sample(self, size: int, seed: int) -> np.ndarray:
        """Draw ``size`` ids using the backend kernel with a fresh stream from ``seed``."""
        return kernels.alias_sample(self.prob, self.alias, int(size), int(seed) & (2**64 - 1))


def vose(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose's alias method for a normalized probability vector."""
    n = len(weights)
    scaled = np.asarray(weights, dtype=np.float64) * n
    prob = np.ones(n, dtype=np.float64)
    alias = np.arange(n, dtype=np.intc)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    # leftovers are 1 up to rounding
    return prob, alias


def sample_negative(table: NegativeTable, rng: SplitMix64) -> int:
    i = rng.bounded(len(table.prob))
    if rng.uniform() < table.prob[i]:
        return i
    return int(table.alias[i])
