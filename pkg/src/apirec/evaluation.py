"""Benchmark harness: degrade corpus endpoints into masked, mangled, or
early-draft queries and measure how well the original is retrieved.

Every generator is a deterministic function of (input, seed): choices walk
sorted keys and draw from one seeded RNG, so reruns reproduce the same
drafts and the same metrics.
"""

from __future__ import annotations

import copy
import json
import random
import string
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Any, Mapping, Sequence

import numpy as np
import yaml

from . import rank as rank_mod
from .errors import MalformedDocument
from .ingest import EndpointRecord

if TYPE_CHECKING:
    from .index_store import CorpusIndex

_LETTERS = string.ascii_lowercase


@dataclass
class QueryDraft:
    """A degraded endpoint specification used as a query.

    May be syntactically invalid OpenAPI; the engine only needs a tree.
    ``origin_id`` carries the ground truth for retrieval scoring.
    """

    endpoint_name: str
    operations: dict[str, Any]
    origin_id: int | None = None
    seed: int = 0
    dense_embedding: np.ndarray | None = None


@dataclass
class EvalMetrics:
    """Recall@k plus the user-study-style precision/recall/F1."""

    recall_at: dict[int, float] = field(default_factory=dict)
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0


def parse_draft(draft: str | Mapping[str, Any]) -> QueryDraft:
    """Turn a user draft into a QueryDraft.

    Accepts YAML/JSON text or a parsed tree shaped either as
    ``{"/path": {...path item...}}`` or as a full document with a ``paths``
    table; the first endpoint-name key wins. The draft may be syntactically
    invalid OpenAPI, it only has to parse as a tree.
    """
    if isinstance(draft, str):
        try:
            tree = yaml.safe_load(draft)
        except yaml.YAMLError as exc:
            raise MalformedDocument(f"unparsable draft: {exc}") from exc
    else:
        tree = draft
    if not isinstance(tree, Mapping) or not tree:
        raise MalformedDocument("draft is not a non-empty object tree")
    paths = tree.get("paths") if isinstance(tree.get("paths"), Mapping) else tree
    for name, item in paths.items():
        if isinstance(name, str) and name.startswith("/"):
            operations = item if isinstance(item, Mapping) else {}
            return QueryDraft(endpoint_name=name, operations=dict(operations))
    raise MalformedDocument("draft contains no endpoint key starting with '/'")


def load_synonym_lexicon(path: str | Path | None = None) -> dict[str, str]:
    """word -> synonym pairs from a tab-separated file (bundled list by default)."""
    if path is None:
        text = resources.files("apirec.resources").joinpath("synonyms.txt").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    lexicon = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].rstrip()
        if not line:
            continue
        word, _, synonym = line.partition("\t")
        if word and synonym:
            lexicon[word.strip()] = synonym.strip()
    return lexicon


def _drop_half(items: Sequence[str], rng: random.Random) -> set[str]:
    """Pick floor(n/2) keys to remove; never removes everything."""
    ordered = sorted(items)
    return set(rng.sample(ordered, len(ordered) // 2))


def _model_nodes(node: Any, found: list[dict] | None = None) -> list[dict]:
    """All resolved-model nodes in a tree, in deterministic walk order."""
    if found is None:
        found = []
    if isinstance(node, dict):
        if isinstance(node.get("$model"), str):
            found.append(node)
        for key in sorted(node, key=str):
            if key != "$model":
                _model_nodes(node[key], found)
    elif isinstance(node, list):
        for item in node:
            _model_nodes(item, found)
    return found


def _remove_structure(operations: dict[str, Any], rng: random.Random) -> dict[str, Any]:
    """Shared first stage: remove 50% of definitions, operations, responses."""
    ops = copy.deepcopy(operations)

    model_names = sorted({n["$model"] for n in _model_nodes(ops)})
    removed_models = set(rng.sample(model_names, len(model_names) // 2))
    for node in _model_nodes(ops):
        if node["$model"] in removed_models:
            node.clear()

    for method in _drop_half(list(ops), rng):
        del ops[method]

    for method in sorted(ops):
        op = ops[method]
        if not isinstance(op, dict):
            continue
        responses = op.get("responses")
        if isinstance(responses, dict):
            for code in _drop_half([str(k) for k in responses], rng):
                responses.pop(code, None)
    return ops


def _mask_text(text: str, fraction: float, rng: random.Random) -> str:
    tokens = text.split()
    n_drop = int(len(tokens) * fraction)
    drop = set(rng.sample(range(len(tokens)), n_drop))
    return " ".join(t for i, t in enumerate(tokens) if i not in drop)


def _mask_name(name: str, rng: random.Random) -> str:
    n_drop = int(len(name) * 0.3)
    drop = set(rng.sample(range(len(name)), n_drop))
    return "".join(ch for i, ch in enumerate(name) if i not in drop)


def make_masked_query(record: EndpointRecord, seed: int) -> QueryDraft:
    """Degrade an endpoint by deletion: structure, properties, text, name."""
    rng = random.Random(seed)
    ops = _remove_structure(record.operations, rng)

    for node in _model_nodes(ops):
        props = node.get("properties")
        if isinstance(props, dict):
            for prop in _drop_half(list(props), rng):
                del props[prop]

    for method in sorted(ops):
        op = ops[method]
        if not isinstance(op, dict):
            continue
        for key in ("description", "summary"):
            if isinstance(op.get(key), str):
                op[key] = _mask_text(op[key], 0.5, rng)

    return QueryDraft(
        endpoint_name=_mask_name(record.name, rng),
        operations=ops,
        origin_id=record.endpoint_id,
        seed=seed,
    )


def _misspell(word: str, rng: random.Random) -> str:
    if not word:
        return word
    pos = rng.randrange(len(word))
    alternatives = [c for c in _LETTERS if c != word[pos]]
    return word[:pos] + rng.choice(alternatives) + word[pos + 1:]


def _mangle_word(word: str, lexicon: Mapping[str, str], rng: random.Random) -> str:
    use_synonym = rng.random() < 0.5
    if use_synonym and word.lower() in lexicon:
        return lexicon[word.lower()]
    return _misspell(word, rng)


def _mangle_text(text: str, fraction: float, lexicon: Mapping[str, str],
                 rng: random.Random) -> str:
    tokens = text.split()
    n_pick = int(len(tokens) * fraction)
    picked = set(rng.sample(range(len(tokens)), n_pick))
    return " ".join(_mangle_word(t, lexicon, rng) if i in picked else t
                    for i, t in enumerate(tokens))


def _mangle_name(name: str, rng: random.Random) -> str:
    n_pick = int(len(name) * 0.3)
    picked = set(rng.sample(range(len(name)), n_pick))
    out = []
    for i, ch in enumerate(name):
        if i in picked:
            out.append(rng.choice([c for c in _LETTERS if c != ch]))
        else:
            out.append(ch)
    return "".join(out)


def make_mangled_query(record: EndpointRecord, seed: int,
                       lexicon: Mapping[str, str] | None = None) -> QueryDraft:
    """Degrade an endpoint by corruption: misspellings and synonym swaps.

    An empty lexicon falls back to misspelling-only.
    """
    lexicon = lexicon if lexicon is not None else load_synonym_lexicon()
    rng = random.Random(seed)
    ops = _remove_structure(record.operations, rng)

    for node in _model_nodes(ops):
        props = node.get("properties")
        if isinstance(props, dict):
            for prop in _drop_half(list(props), rng):
                props[_mangle_word(prop, lexicon, rng)] = props.pop(prop)

    for method in sorted(ops):
        op = ops[method]
        if not isinstance(op, dict):
            continue
        for key in ("description", "summary"):
            if isinstance(op.get(key), str):
                op[key] = _mangle_text(op[key], 0.5, lexicon, rng)

    return QueryDraft(
        endpoint_name=_mangle_name(record.name, rng),
        operations=ops,
        origin_id=record.endpoint_id,
        seed=seed,
    )


def make_draft_query(record: EndpointRecord, seed: int) -> QueryDraft:
    """Simulate a developer's early draft.

    Keeps only the descriptions/summaries of operations and parameters, drops
    half of the operations and parameters, masks 40% of any text longer than
    5 tokens, and keeps only the last 30% of the endpoint name.
    """
    rng = random.Random(seed)
    ops: dict[str, Any] = {}
    for method in sorted(record.operations):
        op = record.operations[method]
        if not isinstance(op, Mapping):
            continue
        kept: dict[str, Any] = {}
        for key in ("summary", "description"):
            if isinstance(op.get(key), str):
                kept[key] = op[key]
        params = op.get("parameters")
        if isinstance(params, list):
            kept_params = [{"description": p["description"]} for p in params
                           if isinstance(p, Mapping) and isinstance(p.get("description"), str)]
            if kept_params:
                kept["parameters"] = kept_params
        ops[method] = kept

    for method in _drop_half(list(ops), rng):
        del ops[method]
    for method in sorted(ops):
        params = ops[method].get("parameters")
        if params:
            drop = set(rng.sample(range(len(params)), len(params) // 2))
            ops[method]["parameters"] = [p for i, p in enumerate(params) if i not in drop]

    for method in sorted(ops):
        op = ops[method]
        for key in ("summary", "description"):
            if isinstance(op.get(key), str) and len(op[key].split()) > 5:
                op[key] = _mask_text(op[key], 0.4, rng)
        for param in op.get("parameters", []):
            if len(param["description"].split()) > 5:
                param["description"] = _mask_text(param["description"], 0.4, rng)

    keep = max(1, int(len(record.name) * 0.3))
    return QueryDraft(
        endpoint_name=record.name[-keep:],
        operations=ops,
        origin_id=record.endpoint_id,
        seed=seed,
    )


def recall_at_k(runs: Sequence[tuple[int, Sequence[int]]], k: int) -> float:
    """Fraction of runs whose origin id appears within the top k ranked ids."""
    if not runs:
        return 0.0
    hits = sum(1 for origin, ranked in runs if origin in list(ranked)[:k])
    return hits / len(runs)


def precision_recall_f1(judged: Sequence[tuple[bool, bool]]) -> EvalMetrics:
    """Precision/recall/F1 over (recommended, useful) judgments.

    Empty denominators yield 0 by convention.
    """
    tp = sum(1 for rec, useful in judged if rec and useful)
    fp = sum(1 for rec, useful in judged if rec and not useful)
    fn = sum(1 for rec, useful in judged if not rec and useful)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalMetrics(precision=precision, recall=recall, f1=f1)


@dataclass
class QueryLog:
    """Per-query benchmark record: what was asked and what came back."""

    query_index: int
    origin_id: int
    draft_name: str
    ranked: list[tuple[int, float]]

    def as_dict(self) -> dict[str, Any]:
        return {
            "query_index": self.query_index,
            "origin_id": self.origin_id,
            "draft_name": self.draft_name,
            "ranked": [[i, p] for i, p in self.ranked],
        }


def run_retrieval_benchmark(index: "CorpusIndex", config: rank_mod.FusionConfig | None = None,
                            n_queries: int = 1000, mode: str = "masked", seed: int = 0,
                            lexicon: Mapping[str, str] | None = None,
                            ks: Sequence[int] = (1, 5, 10),
                            ) -> tuple[EvalMetrics, list[QueryLog]]:
    """Sample endpoints, degrade them, and measure Recall@k of the originals.

    Fully reproducible from the seed: sampling and per-query seeds come from
    one RNG stream drawn up front.
    """
    if mode not in ("masked", "mangled"):
        raise ValueError(f"unknown benchmark mode {mode!r}")
    config = config or rank_mod.FusionConfig()
    rng = random.Random(seed)
    n = min(n_queries, len(index.records))
    origin_ids = rng.sample(range(len(index.records)), n)
    query_seeds = [rng.randrange(2 ** 62) for _ in range(n)]
    if mode == "mangled" and lexicon is None:
        lexicon = load_synonym_lexicon()

    top_k = max(ks)
    runs: list[tuple[int, list[int]]] = []
    logs: list[QueryLog] = []
    for position, (origin, qseed) in enumerate(zip(origin_ids, query_seeds)):
        record = index.records[origin]
        if mode == "masked":
            draft = make_masked_query(record, qseed)
        else:
            draft = make_mangled_query(record, qseed, lexicon)
        results = rank_mod.rank_endpoints(draft, index, config, top_k=top_k)
        ranked_ids = [r.endpoint_id for r in results]
        runs.append((origin, ranked_ids))
        logs.append(QueryLog(
            query_index=position,
            origin_id=origin,
            draft_name=draft.endpoint_name,
            ranked=[(r.endpoint_id, r.normalized_probability) for r in results],
        ))
    metrics = EvalMetrics(recall_at={k: recall_at_k(runs, k) for k in ks})
    return metrics, logs


def write_query_logs(logs: Sequence[QueryLog], path: str | Path) -> None:
    """Line-delimited per-query records, one JSON object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for entry in logs:
            fh.write(json.dumps(entry.as_dict(), sort_keys=True) + "\n")
