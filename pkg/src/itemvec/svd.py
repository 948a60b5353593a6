"""Item-item SVD baseline over the positive-pair co-occurrence matrix."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus, Vocabulary

logger = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    """Subspace iteration ran out of iterations before the residual tolerance was met."""

    def __init__(self, message: str, residuals: np.ndarray):
        super().__init__(message)
        self.residuals = residuals


@dataclass
class CooccurrenceMatrix:
    """Symmetric ``|W| x |W|`` counts of ordered positive pairs, zero diagonal."""

    entries: sp.csr_matrix

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def row_sums(self) -> np.ndarray:
        return np.asarray(self.entries.sum(axis=1)).ravel()

    @property
    def col_sums(self) -> np.ndarray:
        return np.asarray(self.entries.sum(axis=0)).ravel()

    def entry(self, i: int, j: int) -> float:
        return self.entries[i, j]


@dataclass
class SvdModel:
    """Item representations ``R = U diag(sqrt(S))``."""

    R: np.ndarray
    singular_values: np.ndarray
    vocab: Vocabulary

    @property
    def dim(self) -> int:
        return self.R.shape[1]


def build_cooccurrence(corpus: Corpus, vocab: Vocabulary) -> CooccurrenceMatrix:
    """Count ordered pairs (i, j), i != j, over all sets.

    With distinct items per set this is ``B^T B`` minus its diagonal, where
    ``B`` is the set-by-item incidence matrix.
    """
    if len(corpus) == 0:
        raise ValueError("empty corpus")
    n = len(vocab)
    B = sp.csr_matrix(
        (np.ones(len(corpus.ids)), (corpus.set_index(), corpus.ids)),
        shape=(len(corpus), n),
    )
    C = (B.T @ B).tocsr()
    C.setdiag(0)
    C.eliminate_zeros()
    return CooccurrenceMatrix(C)


def normalize(matrix: CooccurrenceMatrix | sp.spmatrix) -> sp.csr_matrix:
    """Divide entry (i, j) by ``sqrt(row_sum[i] * col_sum[j])``; zero rows stay zero."""
    C = matrix.entries if isinstance(matrix, CooccurrenceMatrix) else sp.csr_matrix(matrix)
    rows = np.asarray(C.sum(axis=1)).ravel()
    cols = np.asarray(C.sum(axis=0)).ravel()

    def inv_sqrt(x):
        out = np.zeros_like(x, dtype=np.float64)
        pos = x > 0
        out[pos] = 1.0 / np.sqrt(x[pos])
        return out

    return (sp.diags(inv_sqrt(rows)) @ C @ sp.diags(inv_sqrt(cols))).tocsr()


def _fix_signs(U: np.ndarray) -> np.ndarray:
    """Flip each column so its first non-negligible coordinate is positive."""
    for c in range(U.shape[1]):
        col = U[:, c]
        big = np.flatnonzero(np.abs(col) > 1e-10 * np.abs(col).max()) if col.any() else []
        if len(big) and col[big[0]] < 0:
            U[:, c] = -col
    return U


def truncated_svd(matrix, m: int, seed: int = 0, *, oversample: int = 10, power_iters: int = 7,
                  tol: float = 1e-10, max_iter: int = 2000) -> tuple[np.ndarray, np.ndarray]:
    """Top-``m`` singular triplets of a symmetric matrix by randomized subspace iteration.

    A Gaussian block of ``m + oversample`` columns is pushed through
    ``power_iters`` power iterations, then iteration continues until every
    Ritz pair has residual ``||A x - l x|| <= tol * |l_1|``. Singular values
    are ``|l|``, left singular vectors the Ritz vectors.

    Raises:
        ValueError: ``m`` outside ``[1, n]`` or a non-square input.
        ConvergenceError: the residual tolerance is not met within ``max_iter``.
    """
    A = sp.csr_matrix(matrix, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    block = min(n, m + oversample)
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(A @ rng.standard_normal((n, block)))

    for it in range(1, max_iter + 1):
        AQ = A @ Q
        if it > power_iters or block == n:
            T = Q.T @ AQ
            lam, W = np.linalg.eigh((T + T.T) / 2)
            order = np.argsort(-np.abs(lam), kind="stable")[:m]
            lam, W = lam[order], W[:, order]
            X = Q @ W
            resid = np.linalg.norm(AQ @ W - X * lam, axis=0)
            scale = max(abs(lam[0]), np.finfo(float).tiny)
            if resid.max() <= tol * scale:
                logger.debug("subspace iteration converged after %d iterations", it)
                S = np.abs(lam)
                return _fix_signs(X), S
        Q, _ = np.linalg.qr(AQ)
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations; max residual "
        f"{resid.max():.3e} vs target {tol * scale:.3e}", resid)


def svd_representation(corpus: Corpus, vocab: Vocabulary, m: int, seed: int = 0,
                       tol: float = 1e-6, max_iter: int = 2000) -> SvdModel:
    """Co-occurrence -> normalization -> top-m SVD -> rows of ``U S^(1/2)``."""
    C = build_cooccurrence(corpus, vocab)
    U, S = truncated_svd(normalize(C), m, seed, tol=tol, max_iter=max_iter)
    return SvdModel(U * np.sqrt(S), S, vocab)
