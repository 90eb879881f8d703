"""Enriched text features: reduce sparse keyword vectors by truncated SVD,
then project keyword and externally-produced dense text embeddings into a
shared space with CCA and concatenate.

No language model runs in-process; dense vectors arrive through a sidecar
file of line-delimited JSON records ``{"endpoint_name": ..., "vector": [...]}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import DegenerateMatrix, DimensionMismatch, MalformedDocument, RankDeficient, UnknownEndpointId


@dataclass(frozen=True)
class DenseEmbedding:
    """Externally-computed sentence embedding of one endpoint's text."""

    endpoint_id: int
    vector: np.ndarray


def load_dense_embeddings(path: str | Path,
                          name_to_id: Mapping[str, int]) -> dict[int, DenseEmbedding]:
    """Parse a sidecar file into endpoint_id -> embedding.

    Every row's endpoint name must exist in the corpus; all vectors must
    share one dimension and be finite. Endpoints absent from the sidecar
    simply fall back to the non-enriched text path at query time.
    """
    embeddings: dict[int, DenseEmbedding] = {}
    dim: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedDocument(f"{path}:{lineno}: {exc}") from exc
            name = row.get("endpoint_name")
            vector = row.get("vector")
            if not isinstance(name, str) or not isinstance(vector, list):
                raise MalformedDocument(f"{path}:{lineno}: expected endpoint_name and vector")
            if name not in name_to_id:
                raise UnknownEndpointId(f"{path}:{lineno}: unknown endpoint {name!r}")
            arr = np.asarray(vector, dtype=np.float64)
            if arr.ndim != 1 or not np.all(np.isfinite(arr)):
                raise MalformedDocument(f"{path}:{lineno}: vector is not a finite 1-D array")
            if dim is None:
                dim = len(arr)
            elif len(arr) != dim:
                raise DimensionMismatch(
                    f"{path}:{lineno}: vector of dim {len(arr)} after rows of dim {dim}")
            endpoint_id = name_to_id[name]
            embeddings[endpoint_id] = DenseEmbedding(endpoint_id=endpoint_id, vector=arr)
    return embeddings


@dataclass(frozen=True)
class TruncatedSvd:
    """Rank-k SVD projection of a data matrix.

    ``transformed`` holds the reduced rows (U_k S_k); ``components`` holds
    the right singular vectors (k x original dim) used to project queries.
    """

    transformed: np.ndarray
    components: np.ndarray
    singular_values: np.ndarray
    k: int
    explained_variance: float

    def project(self, vector: np.ndarray) -> np.ndarray:
        return self.components @ vector


def truncated_svd(M: np.ndarray | sp.spmatrix, variance_target: float = 0.95) -> TruncatedSvd:
    """Smallest-rank SVD whose cumulative squared singular values reach the target.

    Raises DegenerateMatrix for an all-zero input.
    """
    dense = M.toarray() if sp.issparse(M) else np.asarray(M, dtype=np.float64)
    if not np.any(dense):
        raise DegenerateMatrix("cannot decompose an all-zero matrix")
    u, s, vt = np.linalg.svd(dense, full_matrices=False)
    energy = s ** 2
    ratio = np.cumsum(energy) / energy.sum()
    k = int(np.searchsorted(ratio, variance_target - 1e-12) + 1)
    k = min(k, len(s))
    return TruncatedSvd(
        transformed=u[:, :k] * s[:k],
        components=vt[:k],
        singular_values=s[:k].copy(),
        k=k,
        explained_variance=float(ratio[k - 1]),
    )


@dataclass(frozen=True)
class CcaProjection:
    """Linear maps of the dense (u) and keyword (v) sides into a shared space.

    Columns are ordered by decreasing canonical correlation.
    """

    u_proj: np.ndarray
    v_proj: np.ndarray
    out_dim: int
    correlations: np.ndarray


def _inverse_sqrt(cov: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = scipy.linalg.eigh(cov)
    return eigvecs @ np.diag(1.0 / np.sqrt(eigvals)) @ eigvecs.T


def fit_cca(X: np.ndarray, Y: np.ndarray, out_dim: int | None = None,
            ridge: float = 1e-4) -> CcaProjection:
    """Canonical correlation analysis via whitening + SVD of the cross-covariance.

    Rows of X and Y must describe the same endpoints. A ridge on the
    covariance diagonals keeps the whitening well-posed. ``out_dim`` defaults
    to the dense-side dimension, clipped to the feasible rank.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape[0] != Y.shape[0]:
        raise ValueError("X and Y must be row-aligned")
    n = X.shape[0]
    feasible = min(X.shape[1], Y.shape[1])
    if n < 2 or feasible == 0:
        raise RankDeficient("no feasible canonical dimension")
    if out_dim is None:
        out_dim = X.shape[1]
    out_dim = min(out_dim, feasible)
    if out_dim < 1:
        raise RankDeficient("no feasible canonical dimension")

    Xc = X - X.mean(axis=0)
    Yc = Y - Y.mean(axis=0)
    denom = n - 1
    cxx = (Xc.T @ Xc) / denom + ridge * np.eye(X.shape[1])
    cyy = (Yc.T @ Yc) / denom + ridge * np.eye(Y.shape[1])
    cxy = (Xc.T @ Yc) / denom

    isqrt_x = _inverse_sqrt(cxx)
    isqrt_y = _inverse_sqrt(cyy)
    u, s, vt = np.linalg.svd(isqrt_x @ cxy @ isqrt_y, full_matrices=False)
    return CcaProjection(
        u_proj=isqrt_x @ u[:, :out_dim],
        v_proj=isqrt_y @ vt.T[:, :out_dim],
        out_dim=out_dim,
        correlations=s[:out_dim].copy(),
    )


def enrich_vector(x_dense: np.ndarray, y_keyword: np.ndarray, proj: CcaProjection) -> np.ndarray:
    """Concatenate the two projected views; output length is 2 * out_dim."""
    return np.concatenate([proj.u_proj.T @ x_dense, proj.v_proj.T @ y_keyword])
