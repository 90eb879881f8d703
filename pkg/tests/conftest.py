import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpusgen import generate_corpus  # noqa: E402

from apirec import BuildConfig, build_index  # noqa: E402

REPO_ROOT = Path(__file__).resolve().parents[1]
DEMO_DATA = REPO_ROOT / "demos" / "data"

MINIMAL_SPEC = {
    "swagger": "2.0",
    "info": {"title": "Tiny API", "version": "1.0.0"},
    "paths": {
        "/things": {
            "get": {
                "summary": "List things",
                "responses": {"200": {"description": "ok"}},
            }
        }
    },
}

MUSIC_SPEC = {
    "swagger": "2.0",
    "info": {"title": "Music API", "version": "1.0.0"},
    "paths": {
        "/songs/{id}/artist": {
            "get": {
                "summary": "Get artist of a song",
                "description": "Returns the artist for the given song.",
                "parameters": [{"name": "songID", "in": "path", "type": "string"}],
                "responses": {
                    "200": {"description": "OK", "schema": {"$ref": "#/definitions/Artist"}}
                },
            }
        }
    },
    "definitions": {
        "Artist": {"properties": {"artistName": {"type": "string"}}}
    },
}


@pytest.fixture
def minimal_spec_bytes() -> bytes:
    return json.dumps(MINIMAL_SPEC).encode()


@pytest.fixture
def music_spec_bytes() -> bytes:
    return json.dumps(MUSIC_SPEC).encode()


@pytest.fixture(scope="session")
def demo_corpus_dir() -> Path:
    return DEMO_DATA


@pytest.fixture(scope="session")
def demo_index(demo_corpus_dir):
    return build_index(demo_corpus_dir, BuildConfig(min_df_tree=1, min_df_keyword=1))


@pytest.fixture(scope="session")
def synthetic_corpus_dir(tmp_path_factory) -> Path:
    target = tmp_path_factory.mktemp("synthetic_corpus")
    generate_corpus(target, n_endpoints=100, seed=7)
    return target


@pytest.fixture(scope="session")
def synthetic_index(synthetic_corpus_dir):
    # df thresholds scaled to the 100-endpoint corpus (the defaults assume ~12k).
    return build_index(synthetic_corpus_dir, BuildConfig(min_df_tree=2, min_df_keyword=2))
