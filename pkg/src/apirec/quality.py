"""Rubric-based quality scoring of OpenAPI 2.0 documents.

A document is graded on its ``info`` section and on every operation under
``paths``: required keys must all be present, and each expected key that is
present must hold a value of the expected type. Scores are averaged upward
(operation -> endpoint -> paths) and the final grade is a weighted blend of
the paths and info scores.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any, Mapping

if TYPE_CHECKING:
    from .ingest import SpecDocument

OPERATION_METHODS = ("get", "put", "post", "delete", "options", "head", "patch")

# No coercion: numbers never match "str", and bool is checked before the
# int-subclass quirk can bite.
_TYPE_CHECKS = {
    "str": lambda v: isinstance(v, str),
    "list": lambda v: isinstance(v, list),
    "dict": lambda v: isinstance(v, dict),
    "bool": lambda v: isinstance(v, bool),
}


@dataclass(frozen=True)
class QualityRubric:
    """Required/expected key tables plus the section blend weights."""

    info_required: frozenset[str] = frozenset({"title", "version"})
    info_expected: Mapping[str, str] = field(default_factory=lambda: {
        "title": "str",
        "description": "str",
        "termsOfService": "str",
        "contact": "dict",
        "license": "dict",
        "version": "str",
    })
    op_required: frozenset[str] = frozenset({"responses"})
    op_expected: Mapping[str, str] = field(default_factory=lambda: {
        "tags": "list",
        "summary": "str",
        "description": "str",
        "externalDocs": "dict",
        "operationId": "str",
        "consumes": "list",
        "produces": "list",
        "parameters": "dict",
        "responses": "dict",
        "schemes": "list",
        "deprecated": "bool",
        "security": "dict",
    })
    lambda_paths: float = 0.7
    lambda_info: float = 0.3

    def __post_init__(self) -> None:
        if abs(self.lambda_paths + self.lambda_info - 1.0) > 1e-9:
            raise ValueError("section weights must sum to 1")
        if not self.info_required <= set(self.info_expected):
            raise ValueError("info required keys must be a subset of expected keys")
        if not self.op_required <= set(self.op_expected):
            raise ValueError("operation required keys must be a subset of expected keys")
        for table in (self.info_expected, self.op_expected):
            for key, type_name in table.items():
                if type_name not in _TYPE_CHECKS:
                    raise ValueError(f"unknown expected type {type_name!r} for key {key!r}")


DEFAULT_RUBRIC = QualityRubric()


def load_rubric(path: str | Path) -> QualityRubric:
    """Load a rubric override file.

    The file is JSON mirroring the default tables::

        {"info": {"required": [...], "expected": {"title": "str", ...}},
         "operation": {"required": [...], "expected": {...}},
         "lambda_paths": 0.7, "lambda_info": 0.3}

    Absent sections fall back to the defaults.
    """
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    info = raw.get("info", {})
    op = raw.get("operation", {})
    return QualityRubric(
        info_required=frozenset(info.get("required", DEFAULT_RUBRIC.info_required)),
        info_expected=dict(info.get("expected", DEFAULT_RUBRIC.info_expected)),
        op_required=frozenset(op.get("required", DEFAULT_RUBRIC.op_required)),
        op_expected=dict(op.get("expected", DEFAULT_RUBRIC.op_expected)),
        lambda_paths=float(raw.get("lambda_paths", DEFAULT_RUBRIC.lambda_paths)),
        lambda_info=float(raw.get("lambda_info", DEFAULT_RUBRIC.lambda_info)),
    )


def score_node(node: Mapping[str, Any], required: frozenset[str] | set[str],
               expected: Mapping[str, str]) -> float:
    """Grade one associative node against a required/expected key table.

    Returns 0 when any required key is missing. Otherwise returns the
    fraction of present expected keys whose value has the expected type.
    A node with required keys present but no expected keys present scores 1:
    absence of optional keys is not a defect.
    """
    if any(key not in node for key in required):
        return 0.0
    present = [key for key in expected if key in node]
    if not present:
        return 1.0
    matches = sum(1 for key in present if _TYPE_CHECKS[expected[key]](node[key]))
    return matches / len(present)


def _has_response_description(op: Mapping[str, Any]) -> bool:
    responses = op.get("responses")
    if not isinstance(responses, dict):
        return False
    return any(isinstance(r, dict) and "description" in r for r in responses.values())


def score_operation(op: Any, rubric: QualityRubric = DEFAULT_RUBRIC) -> float:
    """Depth-1 score of a single operation node.

    Operations lacking any response description score 0 rather than being
    skipped, so omission is never rewarded.
    """
    if not isinstance(op, Mapping) or not _has_response_description(op):
        return 0.0
    return score_node(op, rubric.op_required, rubric.op_expected)


def score_info(doc: "SpecDocument", rubric: QualityRubric = DEFAULT_RUBRIC) -> float:
    """Score the info section; absent or non-associative info scores 0."""
    if not isinstance(doc.info, Mapping):
        return 0.0
    return score_node(doc.info, rubric.info_required, rubric.info_expected)


def score_paths(doc: "SpecDocument", rubric: QualityRubric = DEFAULT_RUBRIC) -> float:
    """Three-level mean: operation scores -> endpoint mean -> paths mean."""
    if not doc.paths:
        return 0.0
    endpoint_scores = []
    for item in doc.paths.values():
        if not isinstance(item, Mapping):
            endpoint_scores.append(0.0)
            continue
        op_scores = [score_operation(item[m], rubric) for m in OPERATION_METHODS if m in item]
        endpoint_scores.append(sum(op_scores) / len(op_scores) if op_scores else 0.0)
    return sum(endpoint_scores) / len(endpoint_scores)


def score_spec(doc: "SpecDocument", rubric: QualityRubric = DEFAULT_RUBRIC) -> float:
    """Blend of the paths and info grades, in [0, 1]."""
    return rubric.lambda_paths * score_paths(doc, rubric) + rubric.lambda_info * score_info(doc, rubric)
