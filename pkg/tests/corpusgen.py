"""Deterministic generator of a small APIs.guru-shaped corpus.

Produces one OpenAPI 2.0 JSON file per synthetic API, with templated but
varied endpoint names, operations, parameters, models, and descriptions.
Used by the benchmark and acceptance tests so they run offline.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

DOMAINS = {
    "music": ["song", "album", "artist", "playlist", "track"],
    "store": ["product", "order", "cart", "customer", "invoice"],
    "social": ["post", "comment", "profile", "friend", "feed"],
    "travel": ["flight", "hotel", "booking", "trip", "ticket"],
    "fitness": ["workout", "exercise", "goal", "activity", "routine"],
    "library": ["book", "author", "loan", "member", "shelf"],
    "finance": ["account", "transfer", "statement", "card", "balance"],
    "kitchen": ["recipe", "ingredient", "menu", "course", "chef"],
    "garden": ["plant", "seed", "bed", "harvest", "tool"],
    "cinema": ["movie", "screening", "seat", "director", "review"],
}

_SUMMARY_TEMPLATES = [
    "Get a {noun}",
    "List {noun} entries",
    "Create a new {noun}",
    "Update an existing {noun}",
    "Search {noun} records",
]

_DESCRIPTION_TEMPLATES = [
    "Returns the {noun} matching the given identifier from the {domain} catalog.",
    "Returns a paginated collection of {noun} records sorted by creation time.",
    "Creates a new {noun} entry and stores it in the {domain} database.",
    "Updates the stored {noun} with the values supplied in the request body.",
    "Searches the {domain} catalog for {noun} records matching the filter.",
]

_METHOD_CHOICES = [("get",), ("get", "post"), ("get",), ("get", "delete"), ("get", "put")]


def _model_for(noun: str, other: str) -> dict:
    return {
        "type": "object",
        "properties": {
            f"{noun}Id": {"type": "string"},
            f"{noun}Name": {"type": "string"},
            "createdAt": {"type": "string"},
            "description": {"type": "string"},
            f"{other}Id": {"type": "string"},
        },
    }


def _operation(method: str, noun: str, domain: str, idx: int, rng: random.Random,
               degrade: bool) -> dict:
    template = idx % len(_SUMMARY_TEMPLATES)
    op = {
        "summary": _SUMMARY_TEMPLATES[template].format(noun=noun),
        "description": _DESCRIPTION_TEMPLATES[template].format(noun=noun, domain=domain),
        "operationId": f"{method}{noun.capitalize()}{idx}",
        "tags": [domain],
        "produces": ["application/json"],
        "parameters": [
            {"name": f"{noun}Id", "in": "path", "required": True, "type": "string"},
            {"name": "limit", "in": "query", "type": "integer"},
        ],
        "responses": {
            "200": {
                "description": "successful operation",
                "schema": {"$ref": f"#/definitions/{noun.capitalize()}"},
            },
            "404": {"description": f"{noun} not found"},
        },
    }
    if rng.random() < 0.5:
        op["parameters"].append({"name": "offset", "in": "query", "type": "integer"})
    if degrade:
        # Cheaper specs: drop optional keys so quality varies across the corpus.
        op.pop("tags", None)
        if rng.random() < 0.5:
            op.pop("summary", None)
        op["deprecated"] = "yes"  # wrong type on purpose
    return op


def generate_corpus(target_dir: str | Path, n_endpoints: int = 100, seed: int = 7) -> list[str]:
    """Write synthetic spec files; returns the generated endpoint names."""
    root = Path(target_dir)
    root.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    names = []
    domains = sorted(DOMAINS)
    per_domain = n_endpoints // len(domains)
    for d, domain in enumerate(domains):
        nouns = DOMAINS[domain]
        degrade_spec = d % 3 == 2
        info = {
            "title": f"{domain.capitalize()} Service API",
            "version": f"{1 + d % 3}.0.{d}",
        }
        if not degrade_spec:
            info["description"] = f"Operations for the {domain} service."
            info["contact"] = {"name": f"{domain} team"}
        paths = {}
        definitions = {}
        for i in range(per_domain):
            noun = nouns[i % len(nouns)]
            other = nouns[(i + 1) % len(nouns)]
            definitions[noun.capitalize()] = _model_for(noun, other)
            shape = i % 4
            if shape == 0:
                name = f"/{domain}/{noun}s/{{{noun}Id}}"
            elif shape == 1:
                name = f"/{domain}/{noun}s"
            elif shape == 2:
                name = f"/{domain}/{other}s/{{{other}Id}}/{noun}s"
            else:
                name = f"/{domain}/{noun}s/{{{noun}Id}}/{other}"
            methods = _METHOD_CHOICES[i % len(_METHOD_CHOICES)]
            paths[name] = {
                m: _operation(m, noun, domain, i, rng, degrade_spec and i % 2 == 0)
                for m in methods
            }
            names.append(name)
        spec = {
            "swagger": "2.0",
            "info": info,
            "paths": paths,
            "definitions": definitions,
        }
        (root / f"{domain}.json").write_text(json.dumps(spec, indent=1), encoding="utf-8")
    return names
