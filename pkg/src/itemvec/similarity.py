"""Cosine similarity and exact nearest-neighbour queries over item vectors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .corpus import Vocabulary

VARIANTS = ("target", "context", "additive", "concat")
ZERO_NORM = 1e-12


@dataclass
class ItemSpace:
    """Rows of ``vectors`` are item representations, indexed by vocabulary id."""

    vectors: np.ndarray
    vocab: Vocabulary
    variant: str = "target"
    _unit: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.vocab):
            raise ValueError("vectors must be |W| x d")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def unit(self) -> np.ndarray:
        """Row-normalized vectors; rows with norm below 1e-12 stay zero."""
        if self._unit is None:
            norms = np.linalg.norm(self.vectors, axis=1)
            scale = np.zeros_like(norms)
            ok = norms >= ZERO_NORM
            scale[ok] = 1.0 / norms[ok]
            self._unit = self.vectors * scale[:, None]
        return self._unit

    def scores(self, seed: int) -> np.ndarray:
        """Cosine of item ``seed`` against every item."""
        return np.clip(self.unit @ self.unit[seed], -1.0, 1.0)


@dataclass
class NeighborList:
    seed: int
    neighbors: list[tuple[int, float]]
    truncated: bool = False

    @property
    def ids(self) -> list[int]:
        return [i for i, _ in self.neighbors]


def assemble(model, variant: str = "target") -> ItemSpace:
    """Build an :class:`ItemSpace` from a trained model.

    Embedding models support ``target`` (U), ``context`` (V), ``additive``
    (U + V) and ``concat`` ([U V]); SVD models only ``target``, their
    single representation matrix.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if hasattr(model, "R"):
        if variant != "target":
            raise ValueError("SVD models have a single representation; use variant 'target'")
        return ItemSpace(model.R, model.vocab, "target")
    if variant == "target":
        return ItemSpace(model.U, model.vocab, variant)
    if model.V is None:
        raise ValueError(f"variant {variant!r} needs context vectors")
    if variant == "context":
        vectors = model.V
    elif variant == "additive":
        vectors = model.U + model.V
    else:
        vectors = np.hstack([model.U, model.V])
    return ItemSpace(vectors, model.vocab, variant)


def cosine(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx < ZERO_NORM or ny < ZERO_NORM:
        return 0.0
    return float(x @ y / (nx * ny))


def top_indices(scores: np.ndarray, candidates: np.ndarray, k: int) -> np.ndarray:
    """Positions into ``candidates`` of the k best scores, ties by ascending candidate id.

    ``candidates`` must be sorted ascending.
    """
    n = len(scores)
    if k >= n:
        return np.lexsort((candidates, -scores))
    kth = np.partition(-scores, k - 1)[k - 1]
    pool = np.flatnonzero(-scores <= kth)
    order = np.lexsort((candidates[pool], -scores[pool]))
    return pool[order[:k]]


def top_k(space: ItemSpace, seed: int, k: int, exclude: Iterable[int] = ()) -> NeighborList:
    """Exact brute-force k nearest neighbours of ``seed`` by cosine similarity."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(space.vocab)
    if not 0 <= seed < n:
        raise IndexError(f"seed {seed} out of range")
    mask = np.ones(n, dtype=bool)
    mask[seed] = False
    for e in exclude:
        mask[e] = False
    candidates = np.flatnonzero(mask)
    scores = space.scores(seed)[candidates]
    truncated = k > len(candidates)
    picked = top_indices(scores, candidates, min(k, len(candidates))) if len(candidates) else []
    return NeighborList(seed, [(int(candidates[p]), float(scores[p])) for p in picked], truncated)


def neighbor_table(space: ItemSpace, seeds: Iterable[int], k: int = 4) -> list[NeighborList]:
    return [top_k(space, s, k) for s in seeds]
