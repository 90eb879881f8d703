"""Recommendation engine for OpenAPI 2.0 endpoint specifications.

Given a (possibly unfinished) endpoint draft, retrieves the most relevant
and highest-quality endpoints from an indexed corpus by fusing tree-path,
text, and name similarity with a quality bias in a log-linear model.
"""

from .errors import ApirecError
from .evaluation import (
    EvalMetrics,
    QueryDraft,
    make_draft_query,
    make_mangled_query,
    make_masked_query,
    parse_draft,
    precision_recall_f1,
    recall_at_k,
    run_retrieval_benchmark,
)
from .featurize import Vocabulary, build_vocabulary, extract_text, keyword_tokens, tree_path_tokens
from .index_store import BuildConfig, CorpusIndex, build_index, load_index, save_index
from .ingest import (
    EndpointRecord,
    EndpointTree,
    SpecDocument,
    build_definitions_dict,
    extract_endpoint_trees,
    ingest_directory,
    merge_into_corpus,
    parse_spec,
)
from .quality import DEFAULT_RUBRIC, QualityRubric, score_info, score_node, score_paths, score_spec
from .rank import FusionConfig, RankedResult, default_weights, fuzzy_name_score, linear_score, rank_endpoints
from .vectorize import PpmiMatrix, SparseVector, build_ppmi, cosine, ppmi_cosine, tfidf_vector

__version__ = "0.1.0"

__all__ = [
    "ApirecError",
    "BuildConfig",
    "CorpusIndex",
    "DEFAULT_RUBRIC",
    "EndpointRecord",
    "EndpointTree",
    "EvalMetrics",
    "FusionConfig",
    "PpmiMatrix",
    "QualityRubric",
    "QueryDraft",
    "RankedResult",
    "SparseVector",
    "SpecDocument",
    "Vocabulary",
    "build_definitions_dict",
    "build_index",
    "build_ppmi",
    "build_vocabulary",
    "cosine",
    "default_weights",
    "extract_endpoint_trees",
    "extract_text",
    "fuzzy_name_score",
    "ingest_directory",
    "keyword_tokens",
    "linear_score",
    "load_index",
    "make_draft_query",
    "make_mangled_query",
    "make_masked_query",
    "merge_into_corpus",
    "parse_draft",
    "parse_spec",
    "ppmi_cosine",
    "precision_recall_f1",
    "rank_endpoints",
    "recall_at_k",
    "run_retrieval_benchmark",
    "save_index",
    "score_info",
    "score_node",
    "score_paths",
    "score_spec",
    "tfidf_vector",
    "tree_path_tokens",
]
