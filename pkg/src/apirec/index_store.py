"""Build, persist, and load the immutable corpus index.

On-disk layout is a directory with a human-readable ``manifest`` (metadata
plus per-file sha256 checksums), a ``records`` file of line-delimited
endpoint records, JSON vocabularies, and matrix blobs in a little-endian
binary layout:

    magic "ARIX" | version u32 | rows u32 | cols u32 | nnz u32
    then nnz coordinate triples: row u32, col u32, value f32

All numeric payloads are quantized to 32-bit floats at build time, so a
saved index round-trips bit-exactly and a rebuild from the same directory is
byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import struct
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import scipy.sparse as sp

from . import featurize, vectorize
from .enrich import CcaProjection, TruncatedSvd, enrich_vector, fit_cca, load_dense_embeddings, truncated_svd
from .errors import CorruptIndex, NoValidSpecs, VersionMismatch
from .featurize import Vocabulary
from .ingest import EndpointRecord, IngestReport, ingest_directory
from .quality import DEFAULT_RUBRIC, QualityRubric
from .vectorize import PpmiMatrix

FORMAT_VERSION = 1
_BLOB_MAGIC = b"ARIX"
_HEADER = struct.Struct("<4sIIII")
_TRIPLE_DTYPE = np.dtype([("row", "<u4"), ("col", "<u4"), ("value", "<f4")])


@dataclass(frozen=True)
class BuildConfig:
    """Featurization manifest for an index build."""

    min_df_tree: int = 10
    min_df_keyword: int = 15
    ppmi_tree: bool = True
    ppmi_keyword: bool = True
    svd_variance_target: float = 0.95
    cca_out_dim: int | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "min_df_tree": self.min_df_tree,
            "min_df_keyword": self.min_df_keyword,
            "ppmi_tree": self.ppmi_tree,
            "ppmi_keyword": self.ppmi_keyword,
            "svd_variance_target": self.svd_variance_target,
            "cca_out_dim": self.cca_out_dim,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "BuildConfig":
        return cls(**{k: raw[k] for k in cls.__dataclass_fields__ if k in raw})


@dataclass
class Enrichment:
    """Dense embeddings plus the fitted SVD/CCA projections.

    Row r of every matrix belongs to endpoint ``dense_ids[r]``; endpoints
    not covered by the sidecar fall back to plain keyword features.
    """

    dense_ids: np.ndarray
    dense_matrix: np.ndarray
    svd: TruncatedSvd
    cca: CcaProjection
    enriched_matrix: np.ndarray

    def enrich_query(self, dense: np.ndarray, keyword_tfidf_dense: np.ndarray) -> np.ndarray:
        reduced = self.svd.project(keyword_tfidf_dense)
        return enrich_vector(dense, reduced, self.cca)


@dataclass
class CorpusIndex:
    """Immutable searchable collection over one corpus build."""

    records: list[EndpointRecord]
    tree_vocab: Vocabulary
    keyword_vocab: Vocabulary
    tree_counts: sp.csr_matrix
    tree_tfidf: sp.csr_matrix
    keyword_counts: sp.csr_matrix
    keyword_tfidf: sp.csr_matrix
    ppmi_tree: PpmiMatrix | None
    ppmi_keyword: PpmiMatrix | None
    enrichment: Enrichment | None
    build_config: BuildConfig
    ingest_report: IngestReport
    format_version: int = FORMAT_VERSION

    @cached_property
    def names(self) -> list[str]:
        return [r.name for r in self.records]

    @cached_property
    def quality_array(self) -> np.ndarray:
        return np.array([r.quality for r in self.records], dtype=np.float64)

    @cached_property
    def tree_tfidf_norms(self) -> np.ndarray:
        return _row_norms(self.tree_tfidf)

    @cached_property
    def keyword_tfidf_norms(self) -> np.ndarray:
        return _row_norms(self.keyword_tfidf)

    @cached_property
    def tree_xqx(self) -> np.ndarray:
        return _row_bilinear(self.tree_counts, self.ppmi_tree)

    @cached_property
    def keyword_xqx(self) -> np.ndarray:
        return _row_bilinear(self.keyword_counts, self.ppmi_keyword)

    def stats(self) -> dict[str, Any]:
        return {
            "endpoints": len(self.records),
            "tree_vocab_size": len(self.tree_vocab),
            "keyword_vocab_size": len(self.keyword_vocab),
            "ingest": self.ingest_report.as_dict(),
        }


def _row_norms(matrix: sp.csr_matrix) -> np.ndarray:
    data = matrix.copy()
    data.data = data.data.astype(np.float64) ** 2
    return np.sqrt(np.asarray(data.sum(axis=1)).ravel())


def _row_bilinear(counts: sp.csr_matrix, q: PpmiMatrix | None, chunk: int = 1024) -> np.ndarray:
    """x_i . (Q x_i) per row, chunked to bound the intermediate product."""
    if q is None:
        raise ValueError("index has no PPMI matrix for this source")
    n = counts.shape[0]
    out = np.zeros(n)
    for start in range(0, n, chunk):
        block = counts[start:start + chunk].astype(np.float64)
        image = block @ q.matrix.astype(np.float64)
        out[start:start + chunk] = np.asarray(block.multiply(image).sum(axis=1)).ravel()
    return out


def _tfidf_matrix(records: list[EndpointRecord], vocab: Vocabulary, source: str) -> sp.csr_matrix:
    rows, cols, data = [], [], []
    n = len(records)
    for r, record in enumerate(records):
        bag = record.tree_tokens if source == "tree" else record.keyword_tokens
        vec = vectorize.tfidf_vector(bag, vocab, n)
        rows.extend([r] * vec.nnz)
        cols.extend(vec.indices.tolist())
        data.extend(vec.values.tolist())
    return sp.csr_matrix((data, (rows, cols)), shape=(n, len(vocab)))


def _quantize(matrix: sp.csr_matrix) -> sp.csr_matrix:
    out = matrix.astype(np.float32).tocsr()
    out.sort_indices()
    return out


def _build_enrichment(records: list[EndpointRecord], keyword_tfidf: sp.csr_matrix,
                      sidecar: str | Path, config: BuildConfig) -> Enrichment | None:
    name_to_id = {r.name: r.endpoint_id for r in records}
    embeddings = load_dense_embeddings(sidecar, name_to_id)
    if not embeddings:
        return None
    ids = np.array(sorted(embeddings), dtype=np.int64)
    dense = np.stack([embeddings[i].vector for i in ids])
    keyword_rows = keyword_tfidf[ids].astype(np.float64)
    svd = truncated_svd(keyword_rows, config.svd_variance_target)
    out_dim = config.cca_out_dim if config.cca_out_dim is not None else dense.shape[1]
    cca = fit_cca(dense, svd.transformed, out_dim=out_dim)
    enriched = np.stack([
        enrich_vector(dense[r], svd.transformed[r], cca) for r in range(len(ids))
    ])
    return Enrichment(
        dense_ids=ids,
        dense_matrix=dense.astype(np.float32),
        svd=TruncatedSvd(
            transformed=svd.transformed.astype(np.float32),
            components=svd.components.astype(np.float32),
            singular_values=svd.singular_values.astype(np.float32),
            k=svd.k,
            explained_variance=svd.explained_variance,
        ),
        cca=CcaProjection(
            u_proj=cca.u_proj.astype(np.float32),
            v_proj=cca.v_proj.astype(np.float32),
            out_dim=cca.out_dim,
            correlations=cca.correlations.astype(np.float32),
        ),
        enriched_matrix=enriched.astype(np.float32),
    )


def build_index(corpus_dir: str | Path, config: BuildConfig | None = None,
                rubric: QualityRubric = DEFAULT_RUBRIC,
                embeddings_sidecar: str | Path | None = None) -> CorpusIndex:
    """Run ingest -> quality -> featurize -> vectorize (-> enrich) over a directory.

    Deterministic given the directory content and config. Raises NoValidSpecs
    when nothing parses and EmptyVocabulary when a df filter removes every
    token.
    """
    config = config or BuildConfig()
    records, report = ingest_directory(corpus_dir, rubric)
    if not records:
        raise NoValidSpecs(f"no valid 2.0 specifications under {corpus_dir}")

    tree_vocab = featurize.vocabulary_for_records(records, "tree", config.min_df_tree)
    keyword_vocab = featurize.vocabulary_for_records(records, "keyword", config.min_df_keyword)

    tree_counts = _quantize(vectorize.counts_matrix((r.tree_tokens for r in records), tree_vocab))
    keyword_counts = _quantize(vectorize.counts_matrix((r.keyword_tokens for r in records), keyword_vocab))
    tree_tfidf = _quantize(_tfidf_matrix(records, tree_vocab, "tree"))
    keyword_tfidf = _quantize(_tfidf_matrix(records, keyword_vocab, "keyword"))

    ppmi_tree = None
    if config.ppmi_tree:
        built = vectorize.build_ppmi([r.tree_tokens for r in records], tree_vocab)
        ppmi_tree = PpmiMatrix(dim=built.dim, matrix=_quantize(built.matrix))
    ppmi_keyword = None
    if config.ppmi_keyword:
        built = vectorize.build_ppmi([r.keyword_tokens for r in records], keyword_vocab)
        ppmi_keyword = PpmiMatrix(dim=built.dim, matrix=_quantize(built.matrix))

    enrichment = None
    if embeddings_sidecar is not None:
        enrichment = _build_enrichment(records, keyword_tfidf, embeddings_sidecar, config)

    return CorpusIndex(
        records=records,
        tree_vocab=tree_vocab,
        keyword_vocab=keyword_vocab,
        tree_counts=tree_counts,
        tree_tfidf=tree_tfidf,
        keyword_counts=keyword_counts,
        keyword_tfidf=keyword_tfidf,
        ppmi_tree=ppmi_tree,
        ppmi_keyword=ppmi_keyword,
        enrichment=enrichment,
        build_config=config,
        ingest_report=report,
    )


# --- persistence ---

def _json_bytes(payload: Any, indent: int | None = None) -> bytes:
    return json.dumps(payload, sort_keys=True, ensure_ascii=True, indent=indent,
                      separators=(",", ": ") if indent else (",", ":")).encode("utf-8")


def _write_blob(path: Path, matrix: sp.spmatrix | np.ndarray) -> None:
    if sp.issparse(matrix):
        csr = matrix.tocsr()
        csr.sort_indices()
        coo = csr.tocoo()
        rows, cols, values = coo.row, coo.col, coo.data.astype(np.float32)
        shape = csr.shape
    else:
        dense = np.asarray(matrix, dtype=np.float32)
        if dense.ndim == 1:
            dense = dense.reshape(1, -1)
        nz = np.nonzero(dense)
        rows, cols, values = nz[0], nz[1], dense[nz]
        shape = dense.shape
    triples = np.empty(len(values), dtype=_TRIPLE_DTYPE)
    triples["row"] = rows
    triples["col"] = cols
    triples["value"] = values
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_BLOB_MAGIC, FORMAT_VERSION, shape[0], shape[1], len(values)))
        fh.write(triples.tobytes())


def _read_blob(path: Path, sparse: bool) -> sp.csr_matrix | np.ndarray:
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise CorruptIndex(f"{path.name}: truncated header")
    magic, version, rows, cols, nnz = _HEADER.unpack_from(raw)
    if magic != _BLOB_MAGIC:
        raise CorruptIndex(f"{path.name}: bad magic")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"{path.name}: blob version {version}")
    expected = _HEADER.size + nnz * _TRIPLE_DTYPE.itemsize
    if len(raw) != expected:
        raise CorruptIndex(f"{path.name}: expected {expected} bytes, found {len(raw)}")
    triples = np.frombuffer(raw, dtype=_TRIPLE_DTYPE, count=nnz, offset=_HEADER.size)
    r = triples["row"].astype(np.int64)
    c = triples["col"].astype(np.int64)
    v = triples["value"].astype(np.float32)
    if sparse:
        matrix = sp.csr_matrix((v, (r, c)), shape=(rows, cols))
        matrix.sort_indices()
        return matrix
    dense = np.zeros((rows, cols), dtype=np.float32)
    dense[r, c] = v
    return dense


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _record_to_json(record: EndpointRecord) -> dict[str, Any]:
    return {
        "endpoint_id": record.endpoint_id,
        "name": record.name,
        "tree_tokens": sorted(record.tree_tokens.items()),
        "keyword_tokens": sorted(record.keyword_tokens.items()),
        "raw_text": record.raw_text,
        "quality": record.quality,
        "source_spec_ids": record.source_spec_ids,
        "operations": record.operations,
    }

def _record_from_json(raw: Mapping[str, Any]) -> EndpointRecord:
    return EndpointRecord(
        endpoint_id=raw["endpoint_id"],
        name=raw["name"],
        tree_tokens=Counter(dict((t, c) for t, c in raw["tree_tokens"])),
        keyword_tokens=Counter(dict((t, c) for t, c in raw["keyword_tokens"])),
        raw_text=raw["raw_text"],
        quality=raw["quality"],
        source_spec_ids=list(raw["source_spec_ids"]),
        operations=dict(raw["operations"]),
    )


def _vocab_to_json(vocab: Vocabulary) -> dict[str, Any]:
    return {"min_df": vocab.min_df, "tokens": list(vocab.tokens), "doc_freq": list(vocab.doc_freq)}


def _vocab_from_json(raw: Mapping[str, Any]) -> Vocabulary:
    return Vocabulary(tokens=tuple(raw["tokens"]), doc_freq=tuple(raw["doc_freq"]),
                      min_df=raw["min_df"])


def save_index(index: CorpusIndex, path: str | Path) -> None:
    """Persist an index directory; a rebuild of the same corpus is byte-identical."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)

    (root / "records").write_bytes(
        b"".join(_json_bytes(_record_to_json(r)) + b"\n" for r in index.records))
    (root / "tree_vocab").write_bytes(_json_bytes(_vocab_to_json(index.tree_vocab)))
    (root / "keyword_vocab").write_bytes(_json_bytes(_vocab_to_json(index.keyword_vocab)))

    blobs: dict[str, sp.spmatrix | np.ndarray] = {
        "tree_counts.bin": index.tree_counts,
        "tree_tfidf.bin": index.tree_tfidf,
        "keyword_counts.bin": index.keyword_counts,
        "keyword_tfidf.bin": index.keyword_tfidf,
    }
    if index.ppmi_tree is not None:
        blobs["ppmi_tree.bin"] = index.ppmi_tree.matrix
    if index.ppmi_keyword is not None:
        blobs["ppmi_keyword.bin"] = index.ppmi_keyword.matrix
    enrichment_meta = None
    if index.enrichment is not None:
        e = index.enrichment
        blobs["dense.bin"] = e.dense_matrix
        blobs["svd_components.bin"] = e.svd.components
        blobs["cca_u.bin"] = e.cca.u_proj
        blobs["cca_v.bin"] = e.cca.v_proj
        blobs["enriched.bin"] = e.enriched_matrix
        enrichment_meta = {
            "dense_ids": [int(i) for i in e.dense_ids],
            "correlations": [float(c) for c in e.cca.correlations],
            "out_dim": e.cca.out_dim,
            "svd_k": e.svd.k,
            "svd_singular_values": [float(s) for s in e.svd.singular_values],
            "svd_explained_variance": e.svd.explained_variance,
        }
    for name, matrix in blobs.items():
        _write_blob(root / name, matrix)

    files = {}
    for name in ["records", "tree_vocab", "keyword_vocab"] + sorted(blobs):
        target = root / name
        files[name] = {"sha256": _sha256(target), "bytes": target.stat().st_size}
    manifest = {
        "format_version": index.format_version,
        "build_config": index.build_config.as_dict(),
        "featurizations": {
            "ppmi_tree": index.ppmi_tree is not None,
            "ppmi_keyword": index.ppmi_keyword is not None,
            "enriched": index.enrichment is not None,
        },
        "enrichment": enrichment_meta,
        "stats": index.stats(),
        "files": files,
    }
    (root / "manifest").write_bytes(_json_bytes(manifest, indent=2) + b"\n")


def load_index(path: str | Path) -> CorpusIndex:
    """Load a persisted index, verifying format version and checksums."""
    root = Path(path)
    manifest_path = root / "manifest"
    if not manifest_path.is_file():
        raise CorruptIndex(f"{root}: no manifest file")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptIndex(f"{root}: manifest is not valid JSON: {exc}") from exc
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"{root}: format_version {version!r}, supported {FORMAT_VERSION}")

    for name, meta in manifest.get("files", {}).items():
        target = root / name
        if not target.is_file():
            raise CorruptIndex(f"{root}: missing file {name}")
        if _sha256(target) != meta.get("sha256"):
            raise CorruptIndex(f"{root}: checksum mismatch for {name}")

    try:
        records = [_record_from_json(json.loads(line))
                   for line in (root / "records").read_text(encoding="utf-8").splitlines() if line]
        tree_vocab = _vocab_from_json(json.loads((root / "tree_vocab").read_text(encoding="utf-8")))
        keyword_vocab = _vocab_from_json(json.loads((root / "keyword_vocab").read_text(encoding="utf-8")))
    except (KeyError, ValueError) as exc:
        raise CorruptIndex(f"{root}: {exc}") from exc

    featurizations = manifest.get("featurizations", {})
    ppmi_tree = ppmi_keyword = None
    tree_counts = _read_blob(root / "tree_counts.bin", sparse=True)
    tree_tfidf = _read_blob(root / "tree_tfidf.bin", sparse=True)
    keyword_counts = _read_blob(root / "keyword_counts.bin", sparse=True)
    keyword_tfidf = _read_blob(root / "keyword_tfidf.bin", sparse=True)
    if featurizations.get("ppmi_tree"):
        ppmi_tree = PpmiMatrix(dim=len(tree_vocab), matrix=_read_blob(root / "ppmi_tree.bin", sparse=True))
    if featurizations.get("ppmi_keyword"):
        ppmi_keyword = PpmiMatrix(dim=len(keyword_vocab),
                                  matrix=_read_blob(root / "ppmi_keyword.bin", sparse=True))

    enrichment = None
    meta = manifest.get("enrichment")
    if featurizations.get("enriched") and meta:
        enrichment = Enrichment(
            dense_ids=np.array(meta["dense_ids"], dtype=np.int64),
            dense_matrix=np.asarray(_read_blob(root / "dense.bin", sparse=False)),
            svd=TruncatedSvd(
                transformed=np.zeros((0, 0), dtype=np.float32),
                components=np.asarray(_read_blob(root / "svd_components.bin", sparse=False)),
                singular_values=np.array(meta["svd_singular_values"], dtype=np.float32),
                k=meta["svd_k"],
                explained_variance=meta["svd_explained_variance"],
            ),
            cca=CcaProjection(
                u_proj=np.asarray(_read_blob(root / "cca_u.bin", sparse=False)),
                v_proj=np.asarray(_read_blob(root / "cca_v.bin", sparse=False)),
                out_dim=meta["out_dim"],
                correlations=np.array(meta["correlations"], dtype=np.float32),
            ),
            enriched_matrix=np.asarray(_read_blob(root / "enriched.bin", sparse=False)),
        )

    ingest_raw = manifest.get("stats", {}).get("ingest", {})
    report = IngestReport(
        files_seen=ingest_raw.get("files_seen", 0),
        files_parsed=ingest_raw.get("files_parsed", 0),
        files_skipped=ingest_raw.get("files_skipped", 0),
        skipped=[tuple(pair) for pair in ingest_raw.get("skipped", [])],
        trees_extracted=ingest_raw.get("trees_extracted", 0),
        unique_endpoints=ingest_raw.get("unique_endpoints", len(records)),
    )
    return CorpusIndex(
        records=records,
        tree_vocab=tree_vocab,
        keyword_vocab=keyword_vocab,
        tree_counts=tree_counts,
        tree_tfidf=tree_tfidf,
        keyword_counts=keyword_counts,
        keyword_tfidf=keyword_tfidf,
        ppmi_tree=ppmi_tree,
        ppmi_keyword=ppmi_keyword,
        enrichment=enrichment,
        build_config=BuildConfig.from_dict(manifest.get("build_config", {})),
        ingest_report=report,
        format_version=version,
    )


def _csr_equal(a: sp.csr_matrix, b: sp.csr_matrix) -> bool:
    if a.shape != b.shape:
        return False
    a, b = a.tocsr(), b.tocsr()
    a.sort_indices()
    b.sort_indices()
    return (np.array_equal(a.indptr, b.indptr) and np.array_equal(a.indices, b.indices)
            and np.array_equal(a.data, b.data))


def index_equals(a: CorpusIndex, b: CorpusIndex) -> bool:
    """Field-for-field equality, used by the round-trip tests."""
    if len(a.records) != len(b.records):
        return False
    for ra, rb in zip(a.records, b.records):
        if (ra.endpoint_id, ra.name, ra.tree_tokens, ra.keyword_tokens, ra.raw_text,
                ra.quality, ra.source_spec_ids, ra.operations) != \
           (rb.endpoint_id, rb.name, rb.tree_tokens, rb.keyword_tokens, rb.raw_text,
                rb.quality, rb.source_spec_ids, rb.operations):
            return False
    if a.tree_vocab != b.tree_vocab or a.keyword_vocab != b.keyword_vocab:
        return False
    for ma, mb in [(a.tree_counts, b.tree_counts), (a.tree_tfidf, b.tree_tfidf),
                   (a.keyword_counts, b.keyword_counts), (a.keyword_tfidf, b.keyword_tfidf)]:
        if not _csr_equal(ma, mb):
            return False
    for pa, pb in [(a.ppmi_tree, b.ppmi_tree), (a.ppmi_keyword, b.ppmi_keyword)]:
        if (pa is None) != (pb is None):
            return False
        if pa is not None and not _csr_equal(pa.matrix, pb.matrix):
            return False
    if (a.enrichment is None) != (b.enrichment is None):
        return False
    if a.enrichment is not None:
        ea, eb = a.enrichment, b.enrichment
        if not (np.array_equal(ea.dense_ids, eb.dense_ids)
                and np.array_equal(ea.dense_matrix, eb.dense_matrix)
                and np.array_equal(ea.svd.components, eb.svd.components)
                and np.array_equal(ea.cca.u_proj, eb.cca.u_proj)
                and np.array_equal(ea.cca.v_proj, eb.cca.v_proj)
                and np.array_equal(ea.enriched_matrix, eb.enriched_matrix)):
            return False
    return (a.build_config == b.build_config and a.format_version == b.format_version
            and a.ingest_report.as_dict() == b.ingest_report.as_dict())
