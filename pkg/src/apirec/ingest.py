"""Parse OpenAPI 2.0 documents, resolve local ``$ref``s into endpoint trees,
and merge duplicate endpoints into a corpus of unique records.

Only documents declaring swagger version 2.0 are admitted. External refs are
never fetched; they are recorded as unresolved markers so a corpus build is
reproducible offline.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Mapping

import yaml

from . import featurize
from .errors import MalformedDocument, MissingPaths, UnsupportedVersion
from .quality import DEFAULT_RUBRIC, OPERATION_METHODS, QualityRubric, score_spec

log = logging.getLogger(__name__)

# Real specs nest shallowly; the cap guarantees termination on any input.
REF_DEPTH_CAP = 5

DefinitionsDict = dict[str, Any]


@dataclass
class SpecDocument:
    """One parsed specification split into its three major sections."""

    source_id: str
    info: Any
    paths: dict[str, Any]
    definitions: DefinitionsDict
    swagger_version: str


@dataclass
class EndpointTree:
    """One endpoint's operations with local ``$ref``s resolved inline."""

    endpoint_name: str
    operations: dict[str, Any]
    unresolved_refs: list[str] = field(default_factory=list)
    cycles: list[str] = field(default_factory=list)


@dataclass
class EndpointRecord:
    """One unique endpoint of the corpus.

    ``operations`` keeps the merged operation nodes so previews and query
    synthesis do not need the source documents.
    """

    endpoint_id: int
    name: str
    tree_tokens: Counter
    keyword_tokens: Counter
    raw_text: str
    quality: float
    source_spec_ids: list[str]
    operations: dict[str, Any] = field(default_factory=dict)


def _stringify_keys(node: Any) -> Any:
    """Deep-convert mapping keys to strings (YAML yields int keys like 200)."""
    if isinstance(node, dict):
        return {str(k): _stringify_keys(v) for k, v in node.items()}
    if isinstance(node, list):
        return [_stringify_keys(v) for v in node]
    return node


def parse_spec(data: bytes | str, format: str = "json", source_id: str = "") -> SpecDocument:
    """Parse raw bytes into a SpecDocument.

    Raises MalformedDocument for syntax errors or a non-object root,
    UnsupportedVersion for anything but swagger 2.0, and MissingPaths when
    the paths section is absent.
    """
    text = data.decode("utf-8", errors="replace") if isinstance(data, bytes) else data
    try:
        if format == "json":
            raw = json.loads(text)
        elif format == "yaml":
            raw = yaml.safe_load(text)
        else:
            raise ValueError(f"unknown format {format!r}")
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise MalformedDocument(f"{source_id or '<bytes>'}: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedDocument(f"{source_id or '<bytes>'}: document root is not an object")
    raw = _stringify_keys(raw)

    version = raw.get("swagger")
    if isinstance(version, (int, float)):
        version = f"{version:.1f}"
    if version != "2.0":
        declared = version if version is not None else raw.get("openapi", "none")
        raise UnsupportedVersion(f"{source_id or '<bytes>'}: declared version {declared!r}, need 2.0")

    if "paths" not in raw:
        raise MissingPaths(f"{source_id or '<bytes>'}: no paths section")
    paths = raw["paths"]
    if not isinstance(paths, dict):
        raise MalformedDocument(f"{source_id or '<bytes>'}: paths section is not an object")
    # Drop vendor-extension keys; endpoint names always start with "/".
    paths = {k: v for k, v in paths.items() if isinstance(k, str) and k.startswith("/")}

    definitions = raw.get("definitions")
    return SpecDocument(
        source_id=source_id,
        info=raw.get("info"),
        paths=paths,
        definitions=definitions if isinstance(definitions, dict) else {},
        swagger_version="2.0",
    )


def build_definitions_dict(doc: SpecDocument) -> DefinitionsDict:
    """Model name -> schema node. A doc without definitions yields {}."""
    return dict(doc.definitions)


def _ref_target(ref: str) -> str | None:
    prefix = "#/definitions/"
    if not ref.startswith(prefix):
        return None
    # JSON-pointer unescaping for the rare model name with / or ~.
    return ref[len(prefix):].replace("~1", "/").replace("~0", "~")


def _resolve(node: Any, defs: DefinitionsDict, depth: int, visited: frozenset[str],
             tree: EndpointTree) -> Any:
    if isinstance(node, list):
        return [_resolve(v, defs, depth, visited, tree) for v in node]
    if not isinstance(node, dict):
        return node
    ref = node.get("$ref")
    if isinstance(ref, str):
        model = _ref_target(ref)
        if model is None or model not in defs:
            tree.unresolved_refs.append(ref)
            return {"$unresolved": ref}
        if model in visited:
            tree.cycles.append(model)
            return {"$cycle": model}
        if depth >= REF_DEPTH_CAP:
            tree.unresolved_refs.append(f"{ref} (depth cap)")
            return {"$unresolved": ref}
        schema = defs[model]
        props = schema.get("properties") if isinstance(schema, Mapping) else None
        resolved_props = {}
        if isinstance(props, Mapping):
            for prop, sub in props.items():
                resolved_props[prop] = _resolve(sub, defs, depth + 1, visited | {model}, tree)
        return {"$model": model, "properties": resolved_props}
    return {k: _resolve(v, defs, depth, visited, tree) for k, v in node.items()}


def extract_endpoint_trees(doc: SpecDocument, defs: DefinitionsDict | None = None) -> list[EndpointTree]:
    """One tree per paths key, with local refs inlined.

    Path-level parameters are folded into every operation, mirroring their
    OpenAPI semantics. Unresolved and cyclic refs are recorded per tree and
    never abort extraction.
    """
    if defs is None:
        defs = build_definitions_dict(doc)
    trees = []
    for name, item in doc.paths.items():
        tree = EndpointTree(endpoint_name=name, operations={})
        if isinstance(item, Mapping):
            shared_params = item.get("parameters")
            shared_params = shared_params if isinstance(shared_params, list) else []
            for method in OPERATION_METHODS:
                op = item.get(method)
                if not isinstance(op, Mapping):
                    continue
                resolved = _resolve(dict(op), defs, 0, frozenset(), tree)
                if shared_params:
                    own = resolved.get("parameters")
                    own = own if isinstance(own, list) else []
                    resolved["parameters"] = [
                        _resolve(p, defs, 0, frozenset(), tree) for p in shared_params
                    ] + own
                tree.operations[method] = resolved
        trees.append(tree)
    return trees


class CorpusAccumulator:
    """Single-writer reduction of endpoint trees into unique records.

    Duplicate endpoint names (e.g. multiple versions of one API) are merged:
    token multisets and raw text are concatenated, source ids extended, and
    quality keeps the maximum of the contributing specs.
    """

    def __init__(self, rubric: QualityRubric = DEFAULT_RUBRIC,
                 lemmatizer: featurize.Lemmatizer | None = None,
                 stopwords: frozenset[str] | None = None):
        self._rubric = rubric
        self._lemmatizer = lemmatizer
        self._stopwords = stopwords
        self._by_name: dict[str, EndpointRecord] = {}
        # Keyed by source_id: object identity is unsafe here because ids are
        # reused once a parsed document is garbage collected.
        self._doc_quality: dict[str, float] = {}

    def __len__(self) -> int:
        return len(self._by_name)

    def _quality_of(self, doc: SpecDocument) -> float:
        key = doc.source_id
        if key not in self._doc_quality:
            self._doc_quality[key] = score_spec(doc, self._rubric)
        return self._doc_quality[key]

    def add(self, tree: EndpointTree, source: SpecDocument) -> None:
        quality = self._quality_of(source)
        tree_tokens = featurize.tree_path_tokens(tree, self._lemmatizer)
        text = featurize.extract_text(tree)
        keyword = featurize.keyword_tokens(text, lemmatizer=self._lemmatizer,
                                           stopwords=self._stopwords)
        record = self._by_name.get(tree.endpoint_name)
        if record is None:
            self._by_name[tree.endpoint_name] = EndpointRecord(
                endpoint_id=-1,
                name=tree.endpoint_name,
                tree_tokens=tree_tokens,
                keyword_tokens=keyword,
                raw_text=text,
                quality=quality,
                source_spec_ids=[source.source_id],
                operations={m: op for m, op in tree.operations.items()},
            )
            return
        record.tree_tokens.update(tree_tokens)
        record.keyword_tokens.update(keyword)
        record.raw_text = " ".join(p for p in (record.raw_text, text) if p)
        record.quality = max(record.quality, quality)
        record.source_spec_ids.append(source.source_id)
        for method, op in tree.operations.items():
            record.operations.setdefault(method, op)

    def finalize(self) -> list[EndpointRecord]:
        """Assign dense ids in lexicographic name order and return the records."""
        records = []
        for i, name in enumerate(sorted(self._by_name)):
            record = self._by_name[name]
            record.endpoint_id = i
            records.append(record)
        return records


def merge_into_corpus(records: CorpusAccumulator, tree: EndpointTree,
                      source: SpecDocument) -> CorpusAccumulator:
    """Fold one endpoint tree into the accumulator and return it."""
    records.add(tree, source)
    return records


@dataclass
class IngestReport:
    """What happened while scanning a corpus directory."""

    files_seen: int = 0
    files_parsed: int = 0
    files_skipped: int = 0
    skipped: list[tuple[str, str]] = field(default_factory=list)
    trees_extracted: int = 0
    unique_endpoints: int = 0

    def as_dict(self) -> dict[str, Any]:
        return {
            "files_seen": self.files_seen,
            "files_parsed": self.files_parsed,
            "files_skipped": self.files_skipped,
            "skipped": [list(pair) for pair in self.skipped],
            "trees_extracted": self.trees_extracted,
            "unique_endpoints": self.unique_endpoints,
        }


def iter_spec_files(corpus_dir: str | Path) -> Iterator[Path]:
    """All .json/.yaml/.yml files under a directory, sorted for determinism."""
    root = Path(corpus_dir)
    files = [p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in (".json", ".yaml", ".yml")]
    return iter(sorted(files, key=lambda p: p.relative_to(root).as_posix()))


def ingest_directory(corpus_dir: str | Path, rubric: QualityRubric = DEFAULT_RUBRIC,
                     lemmatizer: featurize.Lemmatizer | None = None,
                     stopwords: frozenset[str] | None = None,
                     ) -> tuple[list[EndpointRecord], IngestReport]:
    """Scan a directory tree of specs into merged endpoint records.

    Malformed or non-2.0 files are skipped with a logged warning and counted
    in the report; any nesting is accepted (one spec per file).
    """
    root = Path(corpus_dir)
    accumulator = CorpusAccumulator(rubric, lemmatizer, stopwords)
    report = IngestReport()
    for path in iter_spec_files(root):
        report.files_seen += 1
        source_id = path.relative_to(root).as_posix()
        fmt = "json" if path.suffix.lower() == ".json" else "yaml"
        try:
            doc = parse_spec(path.read_bytes(), fmt, source_id=source_id)
        except (MalformedDocument, UnsupportedVersion, MissingPaths) as exc:
            log.warning("skipping %s: %s", source_id, exc)
            report.files_skipped += 1
            report.skipped.append((source_id, type(exc).__name__))
            continue
        report.files_parsed += 1
        defs = build_definitions_dict(doc)
        for tree in extract_endpoint_trees(doc, defs):
            merge_into_corpus(accumulator, tree, doc)
            report.trees_extracted += 1
    records = accumulator.finalize()
    report.unique_endpoints = len(records)
    return records, report
