"""word2vec-compatible embedding files and corpus writers.

Text format: a ``"<count> <dim>"`` header, then one line per item holding the
token and ``dim`` space-separated decimals. The binary variant shares the
header and stores each row as the token, a space, ``dim`` little-endian
float32 values and a newline.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .corpus import Corpus, Vocabulary
from .trainer import EmbeddingModel


def _check_tokens(tokens: Sequence[str]) -> None:
    for t in tokens:
        if not t or any(ch.isspace() for ch in t):
            raise ValueError(f"token {t!r} cannot be written: empty or contains whitespace")


def save_embeddings(path, tokens: Sequence[str], vectors: np.ndarray, binary: bool = False,
                    precision: int | None = None) -> None:
    """Write ``vectors`` (one row per token).

    Text values use the shortest round-trip repr unless ``precision`` gives a
    number of significant digits.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] != len(tokens):
        raise ValueError("vectors must have one row per token")
    _check_tokens(tokens)
    n, m = vectors.shape
    if binary:
        with open(path, "wb") as fh:
            fh.write(f"{n} {m}\n".encode())
            rows = vectors.astype("<f4")
            for tok, row in zip(tokens, rows):
                fh.write(tok.encode("utf-8") + b" " + row.tobytes() + b"\n")
        return
    fmt = repr if precision is None else (lambda x: f"{x:.{precision}g}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{n} {m}\n")
        for tok, row in zip(tokens, vectors.tolist()):
            fh.write(tok + " " + " ".join(map(fmt, row)) + "\n")


def load_embeddings(path, binary: bool = False) -> tuple[list[str], np.ndarray]:
    if binary:
        return _load_binary(path)
    with open(path, encoding="utf-8") as fh:
        n, m = _parse_header(fh.readline(), path)
        tokens, rows = [], []
        for lineno, line in enumerate(fh, 2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != m + 1:
                raise ValueError(f"{path}:{lineno}: expected token and {m} values, got {len(parts) - 1}")
            tokens.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    if len(tokens) != n:
        raise ValueError(f"{path}: header announces {n} rows, found {len(tokens)}")
    return tokens, np.array(rows, dtype=np.float64).reshape(n, m)


def _parse_header(line: str, path) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise ValueError(f"{path}: bad header {line!r}")
    return int(parts[0]), int(parts[1])


def _load_binary(path) -> tuple[list[str], np.ndarray]:
    with open(path, "rb") as fh:
        data = fh.read()
    nl = data.index(b"\n")
    n, m = _parse_header(data[:nl].decode(), path)
    pos = nl + 1
    width = 4 * m
    tokens = []
    out = np.empty((n, m), dtype=np.float64)
    for i in range(n):
        while data[pos:pos + 1] == b"\n":
            pos += 1
        sp = data.index(b" ", pos)
        tokens.append(data[pos:sp].decode("utf-8"))
        pos = sp + 1
        if pos + width > len(data):
            raise ValueError(f"{path}: truncated at row {i}")
        out[i] = np.frombuffer(data, dtype="<f4", count=m, offset=pos)
        pos += width
    return tokens, out


def save_model(model: EmbeddingModel, path, context_path=None, binary: bool = False,
               precision: int | None = None) -> None:
    save_embeddings(path, model.vocab.tokens, model.U, binary, precision)
    if context_path is not None:
        if model.V is None:
            raise ValueError("model has no context vectors")
        save_embeddings(context_path, model.vocab.tokens, model.V, binary, precision)


def load_model(path, context_path=None, binary: bool = False) -> EmbeddingModel:
    """Load target (and optionally context) vectors; vocabulary counts are set to 1."""
    tokens, U = load_embeddings(path, binary)
    V = None
    if context_path is not None:
        ctx_tokens, V = load_embeddings(context_path, binary)
        if ctx_tokens != tokens:
            raise ValueError("target and context files list different tokens")
    return EmbeddingModel(U, V, Vocabulary(tokens, np.ones(len(tokens), dtype=np.int64)))


def write_baskets(path, corpus: Corpus, vocab: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for items in corpus:
            fh.write(" ".join(vocab.tokens[i] for i in items) + "\n")


def write_events(path, corpus: Corpus, vocab: Vocabulary, user_prefix: str = "u") -> None:
    width = len(str(max(len(corpus) - 1, 0)))
    with open(path, "w", encoding="utf-8") as fh:
        for s, items in enumerate(corpus):
            user = f"{user_prefix}{s:0{width}d}"
            for i in items:
                fh.write(f"{user}\t{vocab.tokens[i]}\n")
