"""Probabilistic log-linear fusion: combine tree, text, and name similarity
with a query-independent quality bias, softmax over all candidates, and
normalize by the maximum probability.

Softmax and max-normalization are strictly monotone for a fixed query, so the
ranking equals the ordering by raw linear score; probabilities are exposed
for readability only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Mapping, Protocol, Sequence

import numpy as np

from . import featurize, vectorize
from .errors import EmptyIndex, IncompatibleConfig, NoFeatures

if TYPE_CHECKING:
    from .index_store import CorpusIndex

FEATURE_NAMES = ("tree", "text", "fuzzy")
TREE_FEATURIZATIONS = ("tfidf", "ppmi")
TEXT_FEATURIZATIONS = ("tfidf", "ppmi", "dense", "enriched")
QUALITY_WEIGHT = 0.1


def default_weights(enabled_features: Sequence[str]) -> tuple[dict[str, float], float]:
    """Heuristic weights: 0.1 on quality, the remaining 0.9 split evenly.

    Raises NoFeatures for an empty feature set.
    """
    features = list(dict.fromkeys(enabled_features))
    if not features:
        raise NoFeatures("at least one similarity feature must be enabled")
    unknown = [f for f in features if f not in FEATURE_NAMES]
    if unknown:
        raise ValueError(f"unknown features {unknown}")
    share = (1.0 - QUALITY_WEIGHT) / len(features)
    return {f: share for f in features}, QUALITY_WEIGHT


@dataclass(frozen=True)
class FusionConfig:
    """Which similarity signals are fused, how each is featurized, and the weights."""

    enabled_features: tuple[str, ...] = FEATURE_NAMES
    tree_featurization: str = "ppmi"
    text_featurization: str = "tfidf"
    weights: Mapping[str, float] = field(default_factory=dict)
    quality_weight: float = QUALITY_WEIGHT

    def __post_init__(self) -> None:
        if not self.enabled_features:
            raise NoFeatures("at least one similarity feature must be enabled")
        unknown = [f for f in self.enabled_features if f not in FEATURE_NAMES]
        if unknown:
            raise ValueError(f"unknown features {unknown}")
        if self.tree_featurization not in TREE_FEATURIZATIONS:
            raise ValueError(f"unknown tree featurization {self.tree_featurization!r}")
        if self.text_featurization not in TEXT_FEATURIZATIONS:
            raise ValueError(f"unknown text featurization {self.text_featurization!r}")
        if not self.weights:
            weights, quality = default_weights(self.enabled_features)
            object.__setattr__(self, "weights", weights)
            object.__setattr__(self, "quality_weight", quality)
        if set(self.weights) != set(self.enabled_features):
            raise ValueError("weights must cover exactly the enabled features")
        if any(w < 0 for w in self.weights.values()) or self.quality_weight < 0:
            raise ValueError("weights must be nonnegative")
        total = sum(self.weights.values()) + self.quality_weight
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights plus quality weight must sum to 1, got {total}")

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "FusionConfig":
        kwargs: dict[str, Any] = {}
        if "enabled_features" in raw:
            kwargs["enabled_features"] = tuple(raw["enabled_features"])
        for key in ("tree_featurization", "text_featurization", "quality_weight"):
            if key in raw:
                kwargs[key] = raw[key]
        if "weights" in raw:
            kwargs["weights"] = dict(raw["weights"])
        return cls(**kwargs)

    def as_dict(self) -> dict[str, Any]:
        return {
            "enabled_features": list(self.enabled_features),
            "tree_featurization": self.tree_featurization,
            "text_featurization": self.text_featurization,
            "weights": dict(self.weights),
            "quality_weight": self.quality_weight,
        }


def levenshtein(a: str, b: str) -> int:
    """Standard insert/delete/substitute edit distance on characters."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def fuzzy_name_score(a: str, b: str) -> float:
    """Normalized Levenshtein similarity: 1 - distance / max length.

    Two empty strings are identical by convention and score 1.
    """
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def batch_fuzzy_scores(query: str, names: Sequence[str]) -> np.ndarray:
    """fuzzy_name_score of one query against many names, vectorized.

    Runs the DP rows across all names at once; exact same scores as the
    per-pair function.
    """
    if not names:
        return np.zeros(0)
    max_len = max(len(n) for n in names)
    n_names = len(names)
    # Codepoint matrix padded with -1, which never matches a query character.
    codes = np.full((n_names, max_len), -1, dtype=np.int64)
    lengths = np.empty(n_names, dtype=np.int64)
    for r, name in enumerate(names):
        lengths[r] = len(name)
        if name:
            codes[r, : len(name)] = np.frombuffer(name.encode("utf-32-le"), dtype=np.uint32)

    if max_len == 0:
        distances = np.full(n_names, len(query), dtype=np.int64)
    else:
        column = np.arange(max_len + 1, dtype=np.int64)
        previous = np.tile(column, (n_names, 1))
        for i, ch in enumerate(query, start=1):
            substitute = previous[:, :-1] + (codes != ord(ch))
            delete = previous[:, 1:] + 1
            tail = np.minimum(substitute, delete)
            current = np.concatenate([np.full((n_names, 1), i, dtype=np.int64), tail], axis=1)
            # Insertion relaxes left to right: cur[j] = min_k<=j (cur[k] + j - k).
            current = np.minimum.accumulate(current - column, axis=1) + column
            previous = current
        distances = previous[np.arange(n_names), lengths]

    longest = np.maximum(np.array([len(n) for n in names], dtype=np.int64), len(query))
    scores = np.where(longest == 0, 1.0, 1.0 - distances / np.maximum(longest, 1))
    return scores


def linear_score(features: Mapping[str, float], quality: float,
                 config: FusionConfig) -> tuple[float, dict[str, float]]:
    """Weighted sum of per-feature similarities plus the quality bias.

    Returns the raw score and its per-feature breakdown (weighted
    contributions, summing to the raw score). Features absent from the
    mapping contribute 0.
    """
    breakdown = {name: config.weights[name] * features.get(name, 0.0)
                 for name in config.enabled_features}
    breakdown["quality"] = config.quality_weight * quality
    return sum(breakdown.values()), breakdown


@dataclass(frozen=True)
class RankedResult:
    """One recommendation: candidate id, normalized probability, score breakdown."""

    endpoint_id: int
    name: str
    normalized_probability: float
    raw_score: float
    feature_breakdown: dict[str, float]


class QueryLike(Protocol):
    endpoint_name: str
    operations: Mapping[str, Any]


@dataclass
class QueryFeatures:
    """Featurized query draft, ready for scoring against an index."""

    name: str
    tree_counts: vectorize.SparseVector
    tree_tfidf: vectorize.SparseVector
    keyword_counts: vectorize.SparseVector
    keyword_tfidf: vectorize.SparseVector
    dense: np.ndarray | None = None


def featurize_query(query: QueryLike, index: "CorpusIndex") -> QueryFeatures:
    """Run the standard featurization pipeline on a draft."""
    tree_bag = featurize.tree_path_tokens(query)
    text = featurize.extract_text(query)
    keyword_bag = featurize.keyword_tokens(text)
    n = len(index.records)
    return QueryFeatures(
        name=query.endpoint_name,
        tree_counts=vectorize.count_vector(tree_bag, index.tree_vocab),
        tree_tfidf=vectorize.tfidf_vector(tree_bag, index.tree_vocab, n),
        keyword_counts=vectorize.count_vector(keyword_bag, index.keyword_vocab),
        keyword_tfidf=vectorize.tfidf_vector(keyword_bag, index.keyword_vocab, n),
        dense=getattr(query, "dense_embedding", None),
    )


def _matrix_cosine(matrix, row_norms: np.ndarray, query: vectorize.SparseVector) -> np.ndarray:
    qnorm = query.norm()
    if qnorm == 0.0:
        return np.zeros(matrix.shape[0])
    dots = np.asarray(matrix @ query.to_dense()).ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = np.where(row_norms > 0, dots / (row_norms * qnorm), 0.0)
    return sims


def _matrix_ppmi_cosine(counts, xqx: np.ndarray, q: vectorize.PpmiMatrix,
                        query: vectorize.SparseVector) -> np.ndarray:
    q_dense = query.to_dense()
    q_image = np.asarray(q.matrix @ q_dense).ravel()
    qqq = float(q_dense @ q_image)
    if qqq <= 0.0:
        return np.zeros(counts.shape[0])
    dots = np.asarray(counts @ q_image).ravel()
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = np.where(xqx > 0, dots / (np.sqrt(np.maximum(xqx, 0.0)) * math.sqrt(qqq)), 0.0)
    return sims


def _dense_cosine(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    qnorm = float(np.linalg.norm(query))
    norms = np.linalg.norm(matrix, axis=1)
    if qnorm == 0.0:
        return np.zeros(matrix.shape[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(norms > 0, matrix @ query / (norms * qnorm), 0.0)


def _check_compatibility(index: "CorpusIndex", config: FusionConfig) -> None:
    if "tree" in config.enabled_features and config.tree_featurization == "ppmi" \
            and index.ppmi_tree is None:
        raise IncompatibleConfig("index was built without a tree PPMI matrix")
    if "text" in config.enabled_features:
        if config.text_featurization == "ppmi" and index.ppmi_keyword is None:
            raise IncompatibleConfig("index was built without a keyword PPMI matrix")
        if config.text_featurization in ("dense", "enriched") and index.enrichment is None:
            raise IncompatibleConfig("index was built without dense embeddings")


def _text_similarities(index: "CorpusIndex", config: FusionConfig,
                       qf: QueryFeatures) -> np.ndarray:
    """Text feature column; dense/enriched fall back to keyword TF-IDF when
    the query (or a candidate) has no dense embedding."""
    keyword_fallback = _matrix_cosine(index.keyword_tfidf, index.keyword_tfidf_norms, qf.keyword_tfidf)
    if config.text_featurization == "tfidf":
        return keyword_fallback
    if config.text_featurization == "ppmi":
        return _matrix_ppmi_cosine(index.keyword_counts, index.keyword_xqx,
                                   index.ppmi_keyword, qf.keyword_counts)
    enrichment = index.enrichment
    if qf.dense is None:
        return keyword_fallback
    if config.text_featurization == "dense":
        covered = _dense_cosine(enrichment.dense_matrix, qf.dense)
    else:
        q_enriched = enrichment.enrich_query(qf.dense, qf.keyword_tfidf.to_dense())
        covered = _dense_cosine(enrichment.enriched_matrix, q_enriched)
    sims = keyword_fallback.copy()
    sims[enrichment.dense_ids] = covered
    return sims


def rank_endpoints(query: QueryLike, index: "CorpusIndex", config: FusionConfig | None = None,
                   top_k: int = 10) -> list[RankedResult]:
    """Rank all indexed endpoints against a draft and return the top_k.

    Scores are softmaxed over every candidate and normalized by the maximum
    probability, so the best match always reports probability 1. Ties break
    by ascending endpoint id.
    """
    config = config or FusionConfig()
    n = len(index.records)
    if n == 0:
        raise EmptyIndex("index contains no endpoints")
    _check_compatibility(index, config)
    qf = featurize_query(query, index)

    similarities: dict[str, np.ndarray] = {}
    if "tree" in config.enabled_features:
        if config.tree_featurization == "tfidf":
            similarities["tree"] = _matrix_cosine(index.tree_tfidf, index.tree_tfidf_norms, qf.tree_tfidf)
        else:
            similarities["tree"] = _matrix_ppmi_cosine(index.tree_counts, index.tree_xqx,
                                                       index.ppmi_tree, qf.tree_counts)
    if "text" in config.enabled_features:
        similarities["text"] = _text_similarities(index, config, qf)
    if "fuzzy" in config.enabled_features:
        similarities["fuzzy"] = batch_fuzzy_scores(qf.name, index.names)

    raw = np.full(n, 0.0)
    for feature, sims in similarities.items():
        raw += config.weights[feature] * sims
    raw += config.quality_weight * index.quality_array

    # Stable softmax; dividing by the max probability cancels the partition sum.
    normalized = np.exp(raw - raw.max())
    order = np.lexsort((np.arange(n), -normalized))
    results = []
    for idx in order[:top_k]:
        breakdown = {f: float(config.weights[f] * similarities[f][idx])
                     for f in config.enabled_features}
        breakdown["quality"] = float(config.quality_weight * index.quality_array[idx])
        results.append(RankedResult(
            endpoint_id=int(idx),
            name=index.records[idx].name,
            normalized_probability=float(normalized[idx]),
            raw_score=float(raw[idx]),
            feature_breakdown=breakdown,
        ))
    return results
