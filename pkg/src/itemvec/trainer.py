"""item2vec training: skip-gram with negative sampling over item sets."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .corpus import Corpus, Vocabulary, _filter, subsample
from .rng import SplitMix64
from .sampling import NegativeTable, sample_negative

logger = logging.getLogger(__name__)

MAX_NEGATIVE_REDRAWS = 8

ALL_PAIRS = "all_pairs"
SHUFFLED_WINDOW = "shuffled_window"


def parse_pair_mode(text: str) -> tuple[str, int]:
    """Parse ``"all"`` / ``"all_pairs"`` or ``"window:C"`` into ``(mode, window)``."""
    if text in ("all", ALL_PAIRS):
        return ALL_PAIRS, 0
    head, _, tail = text.partition(":")
    if head in ("window", SHUFFLED_WINDOW) and tail:
        c = int(tail)
        if c < 1:
            raise ValueError("window size must be >= 1")
        return SHUFFLED_WINDOW, c
    raise ValueError(f"bad pair mode {text!r}; expected 'all' or 'window:C'")


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters; defaults are the N=15, 20-epoch setup with m=100.

    ``rho=None`` disables subsampling. With ``resample_each_epoch=False`` the
    corpus is thinned once up front instead of afresh every epoch.
    """

    dim: int = 100
    negatives: int = 15
    epochs: int = 20
    rho: float | None = 1e-3
    initial_lr: float = 0.025
    final_lr: float = 1e-4
    pair_mode: str = ALL_PAIRS
    window: int = 0
    seed: int = 0
    threads: int = 1
    max_set_size: int = 500
    resample_each_epoch: bool = True
    fast_sigmoid: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0 < self.final_lr <= self.initial_lr:
            raise ValueError("need 0 < final_lr <= initial_lr")
        if self.rho is not None and self.rho <= 0:
            raise ValueError("rho must be positive (or None to disable subsampling)")
        if self.pair_mode not in (ALL_PAIRS, SHUFFLED_WINDOW):
            raise ValueError(f"unknown pair_mode {self.pair_mode!r}")
        if self.pair_mode == SHUFFLED_WINDOW and self.window < 1:
            raise ValueError("shuffled_window needs window >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.max_set_size < 2:
            raise ValueError("max_set_size must be >= 2")

    @property
    def kernel_window(self) -> int:
        return self.window if self.pair_mode == SHUFFLED_WINDOW else 0


@dataclass
class EmbeddingModel:
    """Target vectors ``U`` and context vectors ``V`` (rows indexed by item id)."""

    U: np.ndarray
    V: np.ndarray | None
    vocab: Vocabulary

    def __post_init__(self):
        if self.U.shape[0] != len(self.vocab):
            raise ValueError("U rows must match vocabulary size")
        if self.V is not None and self.V.shape != self.U.shape:
            raise ValueError("U and V must have the same shape")

    @property
    def dim(self) -> int:
        return self.U.shape[1]

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.U).all() and (self.V is None or np.isfinite(self.V).all()))


def init_model(vocab: Vocabulary, dim: int, seed: int) -> EmbeddingModel:
    """U uniform in [-0.5/dim, 0.5/dim], V zero."""
    rng = np.random.default_rng(seed)
    U = (rng.random((len(vocab), dim)) - 0.5) / dim
    return EmbeddingModel(U, np.zeros_like(U), vocab)


def window_pairs(seq: Sequence[int], c: int) -> list[tuple[int, int]]:
    """Skip-gram pairs ``(seq[i], seq[j])`` with ``0 < |i - j| <= c``, in order."""
    k = len(seq)
    return [(seq[i], seq[j])
            for i in range(k)
            for j in range(max(0, i - c), min(k - 1, i + c) + 1)
            if j != i]


def generate_pairs(items: Sequence[int], mode: str = "all",
                   rng: SplitMix64 | None = None) -> list[tuple[int, int]]:
    """Positive (target, context) pairs for one set.

    ``"all"`` yields all K(K-1) ordered pairs; ``"window:C"`` shuffles the
    set with ``rng`` then applies a window of size C.
    """
    kind, c = parse_pair_mode(mode)
    items = list(items)
    if kind == ALL_PAIRS:
        return [(a, b) for a in items for b in items if a != b]
    if rng is None:
        raise ValueError("shuffled_window mode needs an rng")
    rng.shuffle(items)
    return window_pairs(items, c)


def pairs_per_set(lengths: np.ndarray, window: int = 0) -> np.ndarray:
    """Number of pairs generated from sets of the given sizes."""
    k = np.asarray(lengths, dtype=np.int64)
    full = k * (k - 1)
    if window <= 0:
        return full
    windowed = 2 * (window * k - window * (window + 1) // 2)
    return np.where(k - 1 <= window, full, windowed)


def sigmoid(x: float) -> float:
    """Logistic function, branching on sign so ``exp`` never overflows."""
    return kernels.sigmoid(float(x))


def log_sigmoid(x: float) -> float:
    if x >= 0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


def pair_loss(model: EmbeddingModel, target: int, context: int, negatives: Sequence[int]) -> float:
    """``log s(u_t.v_c) + sum_k log s(-u_t.v_nk)``; always <= 0."""
    u = model.U[target]
    loss = log_sigmoid(float(u @ model.V[context]))
    for n in negatives:
        loss += log_sigmoid(-float(u @ model.V[n]))
    return loss


def sgns_step(model: EmbeddingModel, target: int, context: int, negatives: Sequence[int],
              lr: float, fast_sigmoid: bool = False) -> None:
    """One in-place gradient-ascent step on :func:`pair_loss`.

    Context and negative rows are updated as they are visited; the target row
    receives the sum of their pre-update contributions at the end.
    """
    kernels.sgns_update(model.U, model.V, int(target), int(context),
                        np.asarray(negatives, dtype=np.intc), float(lr), fast_sigmoid)


def mean_pair_loss(model: EmbeddingModel, corpus: Corpus, negatives: int = 5,
                   seed: int = 0, max_pairs: int = 100_000) -> float:
    """Average :func:`pair_loss` over all-pairs positives with seeded random negatives.

    Negatives follow the training rule: a draw equal to the context is redrawn
    up to 8 times, then dropped.
    """
    table = NegativeTable(model.vocab.counts)
    rng = SplitMix64(seed)
    total, n = 0.0, 0
    for items in corpus:
        for t, c in generate_pairs(items, "all"):
            negs = []
            for _ in range(negatives):
                for _attempt in range(MAX_NEGATIVE_REDRAWS + 1):
                    draw = sample_negative(table, rng)
                    if draw != c:
                        negs.append(draw)
                        break
            total += pair_loss(model, t, c, negs)
            n += 1
            if n >= max_pairs:
                return total / n
    if n == 0:
        raise ValueError("corpus yields no pairs")
    return total / n


def _cap_sets(corpus: Corpus, max_size: int, rng: np.random.Generator) -> Corpus:
    lengths = corpus.lengths()
    big = np.flatnonzero(lengths > max_size)
    if len(big) == 0:
        return corpus
    keep = np.ones(len(corpus.ids), dtype=bool)
    for s in big:
        lo = corpus.offsets[s]
        drop = np.ones(lengths[s], dtype=bool)
        drop[rng.choice(lengths[s], max_size, replace=False)] = False
        keep[lo:lo + lengths[s]][drop] = False
    return _filter(corpus, keep)


def _permute(corpus: Corpus, order: np.ndarray) -> Corpus:
    lengths = corpus.lengths()[order]
    starts = corpus.offsets[:-1][order]
    offsets = np.zeros(len(order) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    idx = np.arange(offsets[-1]) - np.repeat(offsets[:-1], lengths) + np.repeat(starts, lengths)
    return Corpus(corpus.ids[idx], offsets)


def epoch_corpus(corpus: Corpus, vocab: Vocabulary, config: TrainConfig, epoch: int) -> Corpus:
    """The thinned, capped and reordered corpus one epoch trains on."""
    ss = np.random.SeedSequence([config.seed, epoch])
    rng = np.random.default_rng(ss)
    data = corpus
    if config.rho is not None:
        sub_epoch = epoch if config.resample_each_epoch else 0
        data = subsample(corpus, vocab, config.rho, [config.seed, sub_epoch, 1])
    data = _cap_sets(data, config.max_set_size, rng)
    return _permute(data, rng.permutation(len(data)))


def train(corpus: Corpus, vocab: Vocabulary, config: TrainConfig,
          callback: Callable[[int, EmbeddingModel], None] | None = None) -> EmbeddingModel:
    """Fit an :class:`EmbeddingModel` by SGNS over all positive pairs of each set.

    The learning rate decays linearly from ``initial_lr`` to ``final_lr``
    across the run, spread evenly over the pairs of each epoch. ``callback``
    is invoked after every epoch with the (live) model.
    """
    if len(corpus) == 0:
        raise ValueError("nothing to train")
    model = init_model(vocab, config.dim, config.seed)
    table = NegativeTable(vocab.counts)
    lr0, lr1, E = config.initial_lr, config.final_lr, config.epochs
    trained = 0
    for epoch in range(E):
        t0 = time.perf_counter()
        data = epoch_corpus(corpus, vocab, config, epoch)
        epoch_pairs = int(pairs_per_set(data.lengths(), config.kernel_window).sum())
        nchunks = max(1, min(config.threads, len(data)))
        seeds = np.random.default_rng([config.seed, epoch, 2]).integers(
            0, 2**64, size=nchunks, dtype=np.uint64)
        done = 0
        if epoch_pairs > 0:
            done = kernels.train_sets(
                model.U, model.V, data.ids, data.offsets, table.prob, table.alias,
                config.negatives, config.kernel_window,
                lr0 - (lr0 - lr1) * epoch / E, lr0 - (lr0 - lr1) * (epoch + 1) / E,
                epoch_pairs, seeds, config.fast_sigmoid)
        trained += done
        logger.info("epoch %d/%d: %d sets, %d pairs, %.1fs",
                    epoch + 1, E, len(data), done, time.perf_counter() - t0)
        if callback is not None:
            callback(epoch, model)
    if trained == 0:
        raise ValueError("nothing to train")
    return model
