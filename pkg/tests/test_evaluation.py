import json
from collections import Counter

import pytest

from apirec import (
    BuildConfig,
    FusionConfig,
    build_index,
    make_draft_query,
    make_mangled_query,
    make_masked_query,
    parse_draft,
    precision_recall_f1,
    recall_at_k,
    run_retrieval_benchmark,
)
from apirec.errors import MalformedDocument
from apirec.evaluation import _misspell, load_synonym_lexicon, write_query_logs
from apirec.ingest import EndpointRecord
import random


def _record(name="/songs/{id}", n_ops=2) -> EndpointRecord:
    methods = ["get", "post", "put", "delete"][:n_ops]
    operations = {
        m: {
            "summary": "Get artist information for the given song",
            "description": "Returns detailed artist information and album history records",
            "parameters": [{"name": "songId", "in": "path"}],
            "responses": {
                "200": {"description": "ok",
                        "schema": {"$model": "Artist",
                                   "properties": {"artistName": {}, "artistId": {},
                                                  "genre": {}, "founded": {}}}},
                "404": {"description": "missing"},
            },
        }
        for m in methods
    }
    return EndpointRecord(
        endpoint_id=7, name=name, tree_tokens=Counter(), keyword_tokens=Counter(),
        raw_text="", quality=0.9, source_spec_ids=["s"], operations=operations,
    )


# --- masked queries ---

def test_masked_removes_half_the_operations():
    draft = make_masked_query(_record(n_ops=2), seed=1)
    assert len(draft.operations) == 1


def test_masked_keeps_single_operation():
    draft = make_masked_query(_record(n_ops=1), seed=1)
    assert len(draft.operations) == 1


def test_masked_name_loses_30_percent():
    record = _record(name="/abcdefghi")  # 10 characters
    draft = make_masked_query(record, seed=3)
    assert len(draft.endpoint_name) == 7


def test_masked_is_deterministic():
    record = _record()
    assert make_masked_query(record, seed=9) == make_masked_query(record, seed=9)
    assert make_masked_query(record, seed=9) != make_masked_query(record, seed=10)


def test_masked_drops_half_of_definition_properties():
    record = _record(n_ops=1)
    draft = make_masked_query(record, seed=4)
    op = draft.operations["get"]
    schema = op["responses"].get("200", {}).get("schema") if "200" in op.get("responses", {}) else None
    if schema and schema.get("$model"):
        assert len(schema["properties"]) == 2  # 4 properties -> 2 dropped


def test_masked_halves_description_tokens():
    record = _record(n_ops=1)
    source_tokens = record.operations["get"]["description"].split()
    draft = make_masked_query(record, seed=5)
    kept = draft.operations["get"]["description"].split()
    assert len(kept) == len(source_tokens) - len(source_tokens) // 2


def test_masked_original_untouched():
    record = _record()
    before = json.dumps(record.operations, sort_keys=True)
    make_masked_query(record, seed=0)
    assert json.dumps(record.operations, sort_keys=True) == before


# --- mangled queries ---

def test_misspell_changes_exactly_one_character():
    rng = random.Random(0)
    word = "information"
    out = _misspell(word, rng)
    assert len(out) == len(word)
    assert sum(1 for a, b in zip(word, out) if a != b) == 1


def test_mangled_uses_lexicon_synonyms():
    lexicon = {"artistname": "creative_person"}
    record = _record(n_ops=1)
    hits = 0
    for seed in range(20):
        draft = make_mangled_query(record, seed, lexicon)
        if "creative_person" in json.dumps(draft.operations):
            hits += 1
    assert hits > 0


def test_mangled_empty_lexicon_falls_back_to_misspelling():
    record = _record(n_ops=1)
    draft = make_mangled_query(record, seed=2, lexicon={})
    text = draft.operations["get"]["description"]
    assert len(text.split()) == len(record.operations["get"]["description"].split())


def test_mangled_name_same_length_some_chars_replaced():
    record = _record(name="/abcdefghi")
    draft = make_mangled_query(record, seed=6, lexicon={})
    assert len(draft.endpoint_name) == len(record.name)
    assert sum(1 for a, b in zip(record.name, draft.endpoint_name) if a != b) == 3


def test_mangled_is_deterministic():
    record = _record()
    lex = load_synonym_lexicon()
    assert make_mangled_query(record, 5, lex) == make_mangled_query(record, 5, lex)


def test_bundled_lexicon_has_paper_style_pairs():
    lex = load_synonym_lexicon()
    assert lex["artist"] == "creative_person"


# --- draft queries ---

def test_draft_keeps_last_30_percent_of_name():
    record = _record(name="/abcdefghi")  # 10 characters
    draft = make_draft_query(record, seed=1)
    assert draft.endpoint_name == "ghi"


def test_draft_short_text_unmasked():
    record = _record(n_ops=1)
    record.operations["get"]["summary"] = "Get the song record"  # 4 tokens
    draft = make_draft_query(record, seed=2)
    if "summary" in draft.operations.get("get", {}):
        assert draft.operations["get"]["summary"] == "Get the song record"


def test_draft_strips_structure():
    draft = make_draft_query(_record(n_ops=1), seed=3)
    for op in draft.operations.values():
        assert set(op) <= {"summary", "description", "parameters"}
        for param in op.get("parameters", []):
            assert set(param) == {"description"}


def test_draft_is_deterministic():
    record = _record()
    assert make_draft_query(record, 8) == make_draft_query(record, 8)


# --- metrics ---

def test_recall_all_hits():
    runs = [(1, [1, 2, 3])] * 4
    assert recall_at_k(runs, 1) == 1.0


def test_recall_rank_six():
    runs = [(9, [1, 2, 3, 4, 5, 9, 7, 8, 6, 10])] * 3
    assert recall_at_k(runs, 5) == 0.0
    assert recall_at_k(runs, 10) == 1.0


def test_recall_mixed_ranks():
    ranked = list(range(20))
    runs = [(0, ranked), (1, ranked), (6, ranked), (10, ranked)]
    assert recall_at_k(runs, 1) == 0.25
    assert recall_at_k(runs, 5) == 0.5
    assert recall_at_k(runs, 10) == 0.75


def test_prf_all_useful():
    metrics = precision_recall_f1([(True, True)] * 5)
    assert (metrics.precision, metrics.recall, metrics.f1) == (1.0, 1.0, 1.0)


def test_prf_balanced():
    judged = [(True, True)] * 2 + [(True, False)] * 2 + [(False, True)] * 2
    metrics = precision_recall_f1(judged)
    assert metrics.precision == 0.5
    assert metrics.recall == 0.5
    assert metrics.f1 == 0.5


def test_prf_no_recommendations():
    metrics = precision_recall_f1([(False, True), (False, False)])
    assert (metrics.precision, metrics.recall, metrics.f1) == (0.0, 0.0, 0.0)


# --- benchmark runner ---

def test_benchmark_single_endpoint_corpus(tmp_path, minimal_spec_bytes):
    (tmp_path / "one.json").write_bytes(minimal_spec_bytes)
    index = build_index(tmp_path, BuildConfig(min_df_tree=1, min_df_keyword=1))
    metrics, logs = run_retrieval_benchmark(index, FusionConfig(), n_queries=1, mode="masked", seed=0)
    assert metrics.recall_at[1] in (0.0, 1.0)
    assert len(logs) == 1


def test_benchmark_deterministic(synthetic_index):
    kwargs = dict(config=FusionConfig(), n_queries=10, mode="masked", seed=21)
    m1, logs1 = run_retrieval_benchmark(synthetic_index, **kwargs)
    m2, logs2 = run_retrieval_benchmark(synthetic_index, **kwargs)
    assert m1 == m2
    assert logs1 == logs2


def test_benchmark_recall_monotone(synthetic_index):
    metrics, _ = run_retrieval_benchmark(synthetic_index, FusionConfig(),
                                         n_queries=20, mode="mangled", seed=2)
    assert metrics.recall_at[1] <= metrics.recall_at[5] <= metrics.recall_at[10]


def test_benchmark_rejects_unknown_mode(synthetic_index):
    with pytest.raises(ValueError):
        run_retrieval_benchmark(synthetic_index, mode="shuffled")


def test_query_log_roundtrips_to_jsonl(synthetic_index, tmp_path):
    _, logs = run_retrieval_benchmark(synthetic_index, FusionConfig(), n_queries=3,
                                      mode="masked", seed=5)
    out = tmp_path / "log.jsonl"
    write_query_logs(logs, out)
    lines = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
    assert len(lines) == 3
    assert all({"query_index", "origin_id", "draft_name", "ranked"} <= set(line) for line in lines)
    assert [line["query_index"] for line in lines] == [0, 1, 2]


# --- draft parsing ---

def test_parse_draft_yaml_text():
    draft = parse_draft("/songs/{id}:\n  get:\n    summary: Get a song\n")
    assert draft.endpoint_name == "/songs/{id}"
    assert "get" in draft.operations


def test_parse_draft_full_document():
    draft = parse_draft({"swagger": "2.0", "paths": {"/a": {"get": {}}}})
    assert draft.endpoint_name == "/a"


def test_parse_draft_rejects_non_tree():
    with pytest.raises(MalformedDocument):
        parse_draft("- just\n- a\n- list\n")
    with pytest.raises(MalformedDocument):
        parse_draft({"no_paths": True})
