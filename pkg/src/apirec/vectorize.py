"""Sparse TF-IDF vectors, the PPMI co-occurrence matrix, and the two cosine
similarity kernels.

The PPMI kernel rewards endpoints whose tokens are correlated rather than
identical: two endpoints sharing no token can still score above zero when
their tokens co-occur elsewhere in the corpus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .featurize import Vocabulary


@dataclass(frozen=True)
class SparseVector:
    """Ordered (index, value) pairs over a vocabulary."""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values must align")
        if len(self.indices) > 1 and not np.all(np.diff(self.indices) > 0):
            raise ValueError("indices must be strictly increasing")

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def is_zero(self) -> bool:
        return len(self.values) == 0 or not np.any(self.values)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.values, self.values)))

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        dense[self.indices] = self.values
        return dense

    def to_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values, (np.zeros(len(self.indices), dtype=np.int32), self.indices)),
            shape=(1, self.dim),
        )


def _from_pairs(pairs: dict[int, float], dim: int) -> SparseVector:
    indices = np.array(sorted(pairs), dtype=np.int32)
    values = np.array([pairs[i] for i in indices], dtype=np.float64)
    return SparseVector(indices=indices, values=values, dim=dim)


def count_vector(tokens: Mapping[str, int], vocab: Vocabulary) -> SparseVector:
    """Raw in-vocabulary token counts; out-of-vocabulary tokens are dropped."""
    pairs: dict[int, float] = {}
    for token, count in tokens.items():
        idx = vocab.index_of(token)
        if idx is not None:
            pairs[idx] = pairs.get(idx, 0.0) + float(count)
    return _from_pairs(pairs, len(vocab))


def tfidf_vector(tokens: Mapping[str, int], vocab: Vocabulary, n_endpoints: int) -> SparseVector:
    """TF-IDF weights for one endpoint's token bag.

    TF is the token's count over the endpoint's total in-vocabulary count;
    IDF is the natural log of corpus size over document frequency. An
    all-out-of-vocabulary bag yields the zero vector.
    """
    counts = count_vector(tokens, vocab)
    total = float(counts.values.sum())
    if total == 0.0:
        return counts
    values = np.array([
        (c / total) * math.log(n_endpoints / vocab.doc_freq[i])
        for i, c in zip(counts.indices, counts.values)
    ])
    return SparseVector(indices=counts.indices, values=values, dim=counts.dim)


def counts_matrix(bags: Iterable[Mapping[str, int]], vocab: Vocabulary) -> sp.csr_matrix:
    """Stack per-endpoint count vectors into an endpoints x tokens CSR matrix."""
    rows, cols, data = [], [], []
    n_rows = 0
    for r, bag in enumerate(bags):
        n_rows = r + 1
        vec = count_vector(bag, vocab)
        rows.extend([r] * vec.nnz)
        cols.extend(vec.indices.tolist())
        data.extend(vec.values.tolist())
    return sp.csr_matrix((data, (rows, cols)), shape=(n_rows, len(vocab)))


@dataclass(frozen=True)
class PpmiMatrix:
    """Symmetric nonnegative PPMI matrix over one vocabulary."""

    dim: int
    matrix: sp.csr_matrix

    def __post_init__(self) -> None:
        if self.matrix.shape != (self.dim, self.dim):
            raise ValueError("matrix shape must be dim x dim")

    @classmethod
    def identity(cls, dim: int) -> "PpmiMatrix":
        return cls(dim=dim, matrix=sp.identity(dim, format="csr"))


def build_ppmi(bags: Sequence[Mapping[str, int]], vocab: Vocabulary) -> PpmiMatrix:
    """PPMI over all ordered token pairs co-occurring within one endpoint.

    Pairs are counted with multiplicity over distinct token positions, so a
    token occurring m times contributes m*(m-1) self-pairs. PMI compares a
    pair's count against the counts expected under independence; negative
    values clamp to zero.
    """
    X = counts_matrix(bags, vocab)
    pair_counts = (X.T @ X).tocsr()
    # Remove same-position self-pairs: diagonal holds sum(m^2), we want sum(m*(m-1)).
    occurrences = np.asarray(X.sum(axis=0)).ravel()
    pair_counts = pair_counts - sp.diags(occurrences, format="csr")
    pair_counts.eliminate_zeros()
    coo = pair_counts.tocoo()

    total = coo.data.sum()
    if total <= 0:
        return PpmiMatrix(dim=len(vocab), matrix=sp.csr_matrix((len(vocab), len(vocab))))
    marginals = np.asarray(pair_counts.sum(axis=1)).ravel()
    pmi = np.log(coo.data * total / (marginals[coo.row] * marginals[coo.col]))
    ppmi = np.maximum(pmi, 0.0)
    matrix = sp.csr_matrix((ppmi, (coo.row, coo.col)), shape=(len(vocab), len(vocab)))
    matrix.eliminate_zeros()
    return PpmiMatrix(dim=len(vocab), matrix=matrix)


def cosine(x: SparseVector, y: SparseVector) -> float:
    """Plain cosine similarity; 0 when either vector is zero."""
    nx, ny = x.norm(), y.norm()
    if nx == 0.0 or ny == 0.0:
        return 0.0
    _, xi, yi = np.intersect1d(x.indices, y.indices, assume_unique=True, return_indices=True)
    if len(xi) == 0:
        return 0.0
    return float(np.dot(x.values[xi], y.values[yi]) / (nx * ny))


def ppmi_cosine(x: SparseVector, y: SparseVector, q: PpmiMatrix) -> float:
    """Cosine through the PPMI matrix as a bilinear kernel: xQy / sqrt(xQx * yQy).

    Inputs are raw token-count vectors. Degenerate cases (xQx or yQy not
    strictly positive) return 0; the kernel is not guaranteed positive
    semidefinite.
    """
    if x.dim != q.dim or y.dim != q.dim:
        raise ValueError("vector dimension does not match the PPMI matrix")
    xs, ys = x.to_csr(), y.to_csr()
    qy = q.matrix @ ys.T
    xqx = float((xs @ (q.matrix @ xs.T)).toarray()[0, 0])
    yqy = float((ys @ qy).toarray()[0, 0])
    if xqx <= 0.0 or yqy <= 0.0:
        return 0.0
    xqy = float((xs @ qy).toarray()[0, 0])
    return xqy / (math.sqrt(xqx) * math.sqrt(yqy))
