"""Genre-consistency evaluation, mislabel detection and evaluation scaffolding."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .corpus import Corpus, Vocabulary, build
from .similarity import ItemSpace, top_indices


@dataclass
class GenreCatalog:
    """Item token -> genre label. Misses are recorded in ``missing``."""

    labels: dict[str, str]
    missing: set[str] = field(default_factory=set, repr=False)

    def __post_init__(self):
        for tok, g in self.labels.items():
            if not g:
                raise ValueError(f"empty genre label for {tok!r}")

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, token: str) -> bool:
        return token in self.labels

    def lookup(self, token: str) -> str | None:
        g = self.labels.get(token)
        if g is None:
            self.missing.add(token)
        return g

    @property
    def genres(self) -> list[str]:
        return sorted(set(self.labels.values()))

    @classmethod
    def read(cls, path) -> "GenreCatalog":
        labels = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\r\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[1].strip():
                    raise ValueError(f"{path}:{lineno}: expected 'item_token<TAB>genre_label'")
                labels[parts[0]] = parts[1].strip()
        return cls(labels)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for tok, g in self.labels.items():
                fh.write(f"{tok}\t{g}\n")


@dataclass
class ConsistencyReport:
    q: int
    k: int
    accuracy: float
    per_genre: dict[str, float]
    evaluated_count: int
    skipped_count: int
    correct: int = 0

    def format(self) -> str:
        lines = [
            f"{'top-q':<16}{self.q}",
            f"{'k':<16}{self.k}",
            f"{'accuracy':<16}{self.accuracy:.4f}",
            f"{'evaluated':<16}{self.evaluated_count}",
            f"{'skipped':<16}{self.skipped_count}",
        ]
        width = max((len(g) for g in self.per_genre), default=0) + 2
        for g, acc in sorted(self.per_genre.items()):
            lines.append(f"  {g:<{width}}{acc:.4f}")
        return "\n".join(lines)

    def tsv_rows(self, label: str = "all") -> list[str]:
        rows = [f"{label}\t{self.q}\t{self.k}\t*\t{self.accuracy:.6f}\t"
                f"{self.evaluated_count}\t{self.skipped_count}"]
        for g, acc in sorted(self.per_genre.items()):
            rows.append(f"{label}\t{self.q}\t{self.k}\t{g}\t{acc:.6f}\t\t")
        return rows


TSV_HEADER = "slice\tq\tk\tgenre\taccuracy\tevaluated\tskipped"


@dataclass
class MislabelRecord:
    item: str
    catalog_genre: str
    predicted_genre: str
    vote_margin: float


def vote(labels: list[str]) -> tuple[str, float]:
    """Plurality label of neighbours listed nearest-first, and its vote share.

    Ties go to whichever tied label appears first in the list.
    """
    counts = Counter(labels)
    best = max(counts.values())
    pred = next(g for g in labels if counts[g] == best)
    return pred, best / len(labels)


class _Knn:
    """Nearest labelled neighbours; unlabelled items never enter the ranking."""

    def __init__(self, space: ItemSpace, catalog: GenreCatalog):
        self.space = space
        self.item_labels = [catalog.labels.get(t) for t in space.vocab.tokens]
        self.labelled = np.array([i for i, g in enumerate(self.item_labels) if g is not None],
                                 dtype=np.int64)
        self._labelled_unit = space.unit[self.labelled]

    def neighbor_labels(self, item: int, k: int) -> list[str]:
        scores = np.clip(self._labelled_unit @ self.space.unit[item], -1.0, 1.0)
        keep = self.labelled != item
        cands = self.labelled[keep]
        if len(cands) == 0:
            return []
        picked = top_indices(scores[keep], cands, min(k, len(cands)))
        return [self.item_labels[cands[p]] for p in picked]


def _popularity(space: ItemSpace, vocab: Vocabulary) -> np.ndarray:
    if space.vocab is vocab:
        return np.asarray(vocab.counts)
    return np.array([vocab.counts[vocab.get(t)] if t in vocab else 0 for t in space.vocab.tokens],
                    dtype=np.int64)


def genre_consistency(space: ItemSpace, catalog: GenreCatalog, vocab: Vocabulary,
                      q: int, k: int = 8, items: Iterable[int] | None = None) -> ConsistencyReport:
    """KNN genre-consistency accuracy over the ``q`` most popular items.

    Each item's genre is predicted by plurality vote over its ``k`` nearest
    labelled neighbours. Popularity is the item's count in ``vocab`` (the
    number of sets containing it), ties broken by id. ``items`` restricts the
    pool the top q are taken from, e.g. to an unpopular slice.
    """
    if q < 1 or k < 1:
        raise ValueError("q and k must be >= 1")
    pop = _popularity(space, vocab)
    pool = np.arange(len(space.vocab)) if items is None else np.array(sorted(items), dtype=np.int64)
    chosen = pool[np.lexsort((pool, -pop[pool]))][:q]

    knn = _Knn(space, catalog)
    correct = skipped = 0
    per_genre_hits: Counter[str] = Counter()
    per_genre_total: Counter[str] = Counter()
    for i in chosen:
        label = catalog.lookup(space.vocab.tokens[i])
        neigh = knn.neighbor_labels(int(i), k) if label is not None else []
        if not neigh:
            skipped += 1
            continue
        pred, _ = vote(neigh)
        per_genre_total[label] += 1
        if pred == label:
            correct += 1
            per_genre_hits[label] += 1
    evaluated = len(chosen) - skipped
    if evaluated == 0:
        raise ValueError("empty evaluable set")
    return ConsistencyReport(
        q=q, k=k, accuracy=correct / evaluated,
        per_genre={g: per_genre_hits[g] / n for g, n in per_genre_total.items()},
        evaluated_count=evaluated, skipped_count=skipped, correct=correct,
    )


def unpopular_slice(vocab: Vocabulary, corpus: Corpus, threshold_users: int = 15) -> set[int]:
    """Items occurring in fewer than ``threshold_users`` sets."""
    counts = corpus.item_counts(len(vocab))
    return {int(i) for i in np.flatnonzero(counts < threshold_users)}


def mislabel_report(space: ItemSpace, catalog: GenreCatalog, vocab: Vocabulary, k: int = 8,
                    min_margin: float = 0.75) -> list[MislabelRecord]:
    """Items whose KNN-predicted genre disagrees with the catalog by a vote share of at least ``min_margin``."""
    knn = _Knn(space, catalog)
    found = []
    for i in knn.labelled:
        neigh = knn.neighbor_labels(int(i), k)
        if not neigh:
            continue
        pred, margin = vote(neigh)
        label = knn.item_labels[i]
        if pred != label and margin >= min_margin:
            found.append((int(i), MislabelRecord(space.vocab.tokens[i], label, pred, margin)))
    found.sort(key=lambda r: (-r[1].vote_margin, r[0]))
    return [r for _, r in found]


def softmax_row(model, i: int) -> np.ndarray:
    """Full-softmax ``p(j | i)`` for every j, stabilised by max subtraction."""
    logits = model.V @ model.U[i]
    logits = logits - logits.max()
    e = np.exp(logits)
    return e / e.sum()


def softmax_prob(model, i: int, j: int) -> float:
    """``exp(u_i.v_j) / sum_k exp(u_i.v_k)``; meant as a small-vocabulary oracle."""
    return float(softmax_row(model, i)[j])


def synth_corpus(genres: int, items_per_genre: int, sets: int, set_size: int, noise: float,
                 seed: int = 0, zipf_s: float = 1.0) -> tuple[Corpus, Vocabulary, GenreCatalog]:
    """Genre-clustered item sets with Zipf popularity inside each genre.

    Every set picks a genre uniformly and draws ``set_size`` distinct items
    from it by Zipf weight; each slot is then replaced, with probability
    ``noise``, by a uniformly random item of another genre. Duplicates created
    by the replacement are collapsed.
    """
    if min(genres, items_per_genre, sets, set_size) < 1:
        raise ValueError("genres, items_per_genre, sets and set_size must be >= 1")
    if set_size > items_per_genre:
        raise ValueError("set_size cannot exceed items_per_genre")
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must lie in [0, 1]")
    if noise > 0 and genres < 2:
        raise ValueError("noise needs at least two genres")

    rng = np.random.default_rng(seed)
    n_items = genres * items_per_genre
    gw = len(str(genres - 1))
    iw = len(str(items_per_genre - 1))
    tokens = [f"g{g:0{gw}d}_i{i:0{iw}d}" for g in range(genres) for i in range(items_per_genre)]
    weights = 1.0 / np.arange(1, items_per_genre + 1) ** zipf_s
    weights /= weights.sum()

    set_genres = rng.integers(genres, size=sets)
    raw = []
    for g in set_genres:
        items = g * items_per_genre + rng.choice(items_per_genre, set_size, replace=False, p=weights)
        if noise > 0:
            flip = rng.random(set_size) < noise
            other = rng.integers(n_items - items_per_genre, size=int(flip.sum()))
            other[other >= g * items_per_genre] += items_per_genre
            items[flip] = other
        raw.append([tokens[i] for i in items])
    vocab, corpus, _ = build(raw)
    width = len(str(genres - 1))
    catalog = GenreCatalog({t: f"genre{int(t[1:1 + gw]):0{width}d}" for t in vocab.tokens})
    return corpus, vocab, catalog


def stratified_accuracy(space: ItemSpace, catalog: GenreCatalog, vocab: Vocabulary,
                        qs: Iterable[int], k: int = 8) -> dict[int, float]:
    """Accuracy at several popularity cutoffs, as in a top-q table."""
    return {q: genre_consistency(space, catalog, vocab, q, k).accuracy for q in qs}

