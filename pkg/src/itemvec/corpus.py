"""Vocabulary and item-set corpus construction, plus frequency subsampling."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np


class CorpusError(ValueError):
    """Raised for malformed or empty input data."""


class Vocabulary:
    """Bijective item-token <-> id map with per-item occurrence counts.

    Ids are assigned by descending count, ties broken by first appearance, so
    ``range(q)`` is always the top-q most popular items.
    """

    def __init__(self, tokens: Sequence[str], counts: Sequence[int]):
        if len(tokens) != len(counts):
            raise ValueError("tokens and counts differ in length")
        self.tokens = tuple(tokens)
        self.counts = np.asarray(counts, dtype=np.int64)
        self.counts.setflags(write=False)
        self._index = {t: i for i, t in enumerate(self.tokens)}
        if len(self._index) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)}, total_tokens={self.total_tokens})"

    @property
    def total_tokens(self) -> int:
        return int(self.counts.sum())

    def lookup(self, token: str) -> int:
        return self._index[token]

    def get(self, token: str, default: int | None = None) -> int | None:
        return self._index.get(token, default)

    def token_of(self, i: int) -> str:
        return self.tokens[i]

    def frequencies(self) -> np.ndarray:
        """Relative frequency ``count / total_tokens`` per item."""
        return self.counts / self.total_tokens


class Corpus:
    """Immutable sequence of item sets stored as one flat id array plus offsets."""

    def __init__(self, ids: np.ndarray, offsets: np.ndarray):
        self.ids = np.ascontiguousarray(ids, dtype=np.int32)
        self.offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        if self.offsets.ndim != 1 or len(self.offsets) == 0 or self.offsets[0] != 0:
            raise ValueError("offsets must start at 0")
        if self.offsets[-1] != len(self.ids):
            raise ValueError("offsets do not cover ids")
        self.ids.setflags(write=False)
        self.offsets.setflags(write=False)

    @classmethod
    def from_sets(cls, sets: Iterable[Sequence[int]]) -> "Corpus":
        sets = [list(s) for s in sets]
        lengths = np.array([len(s) for s in sets], dtype=np.int64)
        offsets = np.zeros(len(sets) + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        ids = np.fromiter((i for s in sets for i in s), dtype=np.int32, count=int(offsets[-1]))
        return cls(ids, offsets)

    def __len__(self) -> int:
        return len(self.offsets) - 1

    def __getitem__(self, s: int) -> list[int]:
        if s < 0:
            s += len(self)
        return self.ids[self.offsets[s]:self.offsets[s + 1]].tolist()

    def __iter__(self) -> Iterator[list[int]]:
        for s in range(len(self)):
            yield self[s]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return np.array_equal(self.ids, other.ids) and np.array_equal(self.offsets, other.offsets)

    def __repr__(self) -> str:
        return f"Corpus(sets={len(self)}, tokens={len(self.ids)})"

    @property
    def sets(self) -> list[list[int]]:
        return list(self)

    def lengths(self) -> np.ndarray:
        return np.diff(self.offsets)

    def set_index(self) -> np.ndarray:
        """Set number of every entry in ``ids``."""
        return np.repeat(np.arange(len(self), dtype=np.int64), self.lengths())

    def item_counts(self, n_items: int) -> np.ndarray:
        """Number of sets containing each item (sets hold distinct ids)."""
        return np.bincount(self.ids, minlength=n_items).astype(np.int64)


@dataclass
class IngestStats:
    raw_events: int = 0
    sets_emitted: int = 0
    items_dropped_minfreq: int = 0
    tokens_dropped_subsample: int = 0


def build(raw_sets: Iterable[Sequence[str]], min_count: int = 1,
          raw_events: int = 0) -> tuple[Vocabulary, Corpus, IngestStats]:
    """Build vocabulary and corpus from token sets, deduplicating within each set.

    Items present in fewer than ``min_count`` sets are removed; sets that end
    up empty are dropped.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    deduped = [list(dict.fromkeys(s)) for s in raw_sets]
    counts: dict[str, int] = {}
    for s in deduped:
        for tok in s:
            counts[tok] = counts.get(tok, 0) + 1
    if not counts:
        raise CorpusError("empty corpus")

    first_seen = {tok: i for i, tok in enumerate(counts)}
    kept = sorted((t for t, c in counts.items() if c >= min_count),
                  key=lambda t: (-counts[t], first_seen[t]))
    if not kept:
        raise CorpusError("empty corpus")
    vocab = Vocabulary(kept, [counts[t] for t in kept])

    sets = []
    for s in deduped:
        ids = [vocab.get(t) for t in s]
        ids = [i for i in ids if i is not None]
        if ids:
            sets.append(ids)
    stats = IngestStats(
        raw_events=raw_events,
        sets_emitted=len(sets),
        items_dropped_minfreq=len(counts) - len(kept),
    )
    return vocab, Corpus.from_sets(sets), stats


def ingest_events(lines: Iterable[str], min_count: int = 1) -> tuple[Vocabulary, Corpus, IngestStats]:
    """Group ``user_id<TAB>item_token`` lines into one item set per user.

    Users keep their first-appearance order; blank lines are ignored.
    """
    by_user: dict[str, list[str]] = {}
    n_events = 0
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1].strip():
            raise CorpusError(f"line {lineno}: expected 'user_id<TAB>item_token', got {line!r}")
        by_user.setdefault(parts[0], []).append(parts[1].strip())
        n_events += 1
    return build(by_user.values(), min_count, raw_events=n_events)


_SPLIT = re.compile(r"[ \t]+")


def ingest_baskets(lines: Iterable[str], min_count: int = 1) -> tuple[Vocabulary, Corpus, IngestStats]:
    """One basket per line, tokens separated by runs of spaces or tabs."""
    baskets = []
    n_events = 0
    for line in lines:
        toks = [t for t in _SPLIT.split(line.strip()) if t]
        n_events += len(toks)
        baskets.append(toks)
    return build(baskets, min_count, raw_events=n_events)


def ingest_file(path, fmt: str = "events", min_count: int = 1):
    readers = {"events": ingest_events, "baskets": ingest_baskets}
    if fmt not in readers:
        raise ValueError(f"unknown format {fmt!r}; expected 'events' or 'baskets'")
    with open(path, encoding="utf-8") as fh:
        return readers[fmt](fh, min_count)


def discard_probability(count: int, total: int, rho: float) -> float:
    """``1 - sqrt(rho / f)`` with ``f = count / total``, clamped to [0, 1]."""
    return max(0.0, 1.0 - math.sqrt(rho * total / count))


def discard_probabilities(vocab: Vocabulary, rho: float) -> np.ndarray:
    if rho <= 0:
        raise ValueError("rho must be positive")
    p = 1.0 - np.sqrt(rho * vocab.total_tokens / vocab.counts)
    return np.clip(p, 0.0, 1.0)


def subsample(corpus: Corpus, vocab: Vocabulary, rho: float, seed) -> Corpus:
    """Drop each item occurrence independently with its discard probability.

    Sets left empty are removed. The input corpus is not modified.
    """
    p = discard_probabilities(vocab, rho)
    rng = np.random.default_rng(seed)
    keep = rng.random(len(corpus.ids)) >= p[corpus.ids]
    return _filter(corpus, keep)


def _filter(corpus: Corpus, keep: np.ndarray) -> Corpus:
    set_of = corpus.set_index()
    lengths = np.bincount(set_of[keep], minlength=len(corpus))
    lengths = lengths[lengths > 0]
    offsets = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    return Corpus(corpus.ids[keep], offsets)


def rebuild_vocabulary(corpus: Corpus, vocab: Vocabulary) -> Vocabulary:
    """Recount item occurrences of ``corpus`` against the token list of ``vocab``."""
    return Vocabulary(vocab.tokens, corpus.item_counts(len(vocab)))
