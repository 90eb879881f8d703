"""Turn endpoint trees into the three feature sources used for matching:
tree-path tokens, keyword tokens from operation text, and the endpoint name.

Tokenization is fully deterministic: a rule-based suffix stripper stands in
for a dictionary lemmatizer, and the stop-word list is a bundled resource.
Both can be overridden from plain-text files.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Protocol, Sequence

from .errors import EmptyVocabulary
from .quality import OPERATION_METHODS

_VOWELS = set("aeiouy")
# Plain plural stripping never touches these endings ("status", "class", "analysis").
_PROTECTED_S_ENDINGS = ("ss", "us", "is")

_CAMEL_BOUNDARY = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")
_NON_ALNUM = re.compile(r"[^A-Za-z0-9]+")


def _resource_text(name: str) -> str:
    return resources.files("apirec.resources").joinpath(name).read_text(encoding="utf-8")


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Stop-word set from a plain-text file (one word per line, '#' comments).

    Without a path, the bundled English list is used.
    """
    text = Path(path).read_text(encoding="utf-8") if path else _resource_text("stopwords.txt")
    words = set()
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


@dataclass(frozen=True)
class _LemmaRule:
    suffix: str
    replacement: str
    min_stem: int
    need_vowel: bool
    undouble: bool


class Lemmatizer:
    """Deterministic rule-based suffix stripper.

    Rules are applied top to bottom; the first applicable one wins. The
    ``undouble`` flag collapses a doubled final consonant (getting -> get)
    except after l/s/z, where doubling is part of the stem (falling -> fall).
    """

    def __init__(self, rules: Sequence[_LemmaRule]):
        self._rules = tuple(rules)

    @classmethod
    def from_file(cls, path: str | Path | None = None) -> "Lemmatizer":
        text = Path(path).read_text(encoding="utf-8") if path else _resource_text("lemma_rules.txt")
        rules = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].rstrip()
            if not line:
                continue
            suffix, replacement, min_stem, flags = line.split("\t")
            flag_set = set(flags.split(",")) if flags != "-" else set()
            rules.append(_LemmaRule(
                suffix=suffix,
                replacement="" if replacement == "-" else replacement,
                min_stem=int(min_stem),
                need_vowel="vowel" in flag_set,
                undouble="undouble" in flag_set,
            ))
        return cls(rules)

    def __call__(self, word: str) -> str:
        for rule in self._rules:
            if not word.endswith(rule.suffix):
                continue
            if rule.suffix == "s" and word.endswith(_PROTECTED_S_ENDINGS):
                continue
            stem = word[: len(word) - len(rule.suffix)] + rule.replacement
            if len(stem) < rule.min_stem:
                continue
            if rule.need_vowel and not (_VOWELS & set(stem)):
                continue
            if rule.undouble and len(stem) >= 2 and stem[-1] == stem[-2] \
                    and stem[-1] not in _VOWELS and stem[-1] not in "lsz":
                stem = stem[:-1]
            return stem
        return word


_DEFAULT_LEMMATIZER: Lemmatizer | None = None
_DEFAULT_STOPWORDS: frozenset[str] | None = None


def default_lemmatizer() -> Lemmatizer:
    global _DEFAULT_LEMMATIZER
    if _DEFAULT_LEMMATIZER is None:
        _DEFAULT_LEMMATIZER = Lemmatizer.from_file()
    return _DEFAULT_LEMMATIZER


def default_stopwords() -> frozenset[str]:
    global _DEFAULT_STOPWORDS
    if _DEFAULT_STOPWORDS is None:
        _DEFAULT_STOPWORDS = load_stopwords()
    return _DEFAULT_STOPWORDS


def keyword_tokens(text: str, *, lemmatizer: Lemmatizer | None = None,
                   stopwords: frozenset[str] | None = None) -> Counter:
    """Keyword-token multiset of a natural-language text.

    Lowercases, splits on whitespace/punctuation/camelCase/snake_case, drops
    stop words and pure-punctuation tokens, and lemmatizes. A token is also
    dropped when its lemma is a stop word, which keeps the operation
    idempotent over its own rejoined output.
    """
    lemmatizer = lemmatizer or default_lemmatizer()
    stopwords = stopwords if stopwords is not None else default_stopwords()
    tokens: Counter = Counter()
    for chunk in _NON_ALNUM.split(text):
        if not chunk:
            continue
        for piece in _CAMEL_BOUNDARY.split(chunk):
            word = piece.lower()
            if not word or word in stopwords:
                continue
            lemma = lemmatizer(word)
            if lemma in stopwords:
                continue
            tokens[lemma] += 1
    return tokens


def normalize_variable(name: str, lemmatizer: Lemmatizer | None = None) -> str:
    """Normalize one variable name for use inside a tree-path token.

    Special characters are removed (no splitting: ``songID`` -> ``songid``),
    the result is lowercased and lemmatized. Returns "" for names with no
    alphanumeric content.
    """
    lemmatizer = lemmatizer or default_lemmatizer()
    flat = _NON_ALNUM.sub("", name).lower()
    return lemmatizer(flat) if flat else ""


class TreeLike(Protocol):
    endpoint_name: str
    operations: Mapping[str, Any]


def extract_text(tree: TreeLike) -> str:
    """Space-joined summaries and descriptions of the tree's operations.

    Response and parameter descriptions are excluded: they are usually
    boilerplate ("OK" for response 200) and say nothing about the endpoint.
    Operations contribute in the fixed method order used by the quality
    rubric.
    """
    parts = []
    for method in OPERATION_METHODS:
        op = tree.operations.get(method)
        if not isinstance(op, Mapping):
            continue
        for key in ("summary", "description"):
            value = op.get(key)
            if isinstance(value, str) and value.strip():
                parts.append(value.strip())
    return " ".join(parts)


def tree_path_tokens(tree: TreeLike, lemmatizer: Lemmatizer | None = None) -> Counter:
    """Tree-path token multiset of an endpoint tree.

    Each variable name (parameter, response name, schema property) becomes a
    token prefixed with its context, e.g. ``parameters_songid`` or
    ``get_responses_200_artist_artistname``. Identical names under different
    parents therefore stay distinct.
    """
    lemmatizer = lemmatizer or default_lemmatizer()
    tokens: Counter = Counter()

    def emit(context: tuple[str, ...], name: str) -> None:
        norm = normalize_variable(name, lemmatizer)
        if norm:
            tokens["_".join(context + (norm,))] += 1

    def walk_schema(node: Any, context: tuple[str, ...]) -> None:
        if isinstance(node, Mapping):
            model = node.get("$model")
            props = node.get("properties")
            if isinstance(model, str):
                model_norm = normalize_variable(model, lemmatizer)
                ctx = context + (model_norm,) if model_norm else context
                if isinstance(props, Mapping):
                    for prop, sub in props.items():
                        emit(ctx, prop)
                        prop_norm = normalize_variable(prop, lemmatizer)
                        walk_schema(sub, ctx + (prop_norm,) if prop_norm else ctx)
                return
            if isinstance(props, Mapping):
                for prop, sub in props.items():
                    emit(context, prop)
                    prop_norm = normalize_variable(prop, lemmatizer)
                    walk_schema(sub, context + (prop_norm,) if prop_norm else context)
            items = node.get("items")
            if items is not None:
                walk_schema(items, context)
            for key in ("schema", "allOf"):
                sub = node.get(key)
                if isinstance(sub, Mapping):
                    walk_schema(sub, context)
                elif isinstance(sub, list):
                    for entry in sub:
                        walk_schema(entry, context)

    for method in sorted(tree.operations):
        op = tree.operations[method]
        if not isinstance(op, Mapping):
            continue
        params = op.get("parameters")
        if isinstance(params, list):
            for param in params:
                if not isinstance(param, Mapping):
                    continue
                name = param.get("name")
                if isinstance(name, str):
                    emit(("parameters",), name)
                walk_schema(param.get("schema"), ("parameters",))
        responses = op.get("responses")
        if isinstance(responses, Mapping):
            for code, response in responses.items():
                emit((method, "responses"), str(code))
                if isinstance(response, Mapping):
                    code_norm = normalize_variable(str(code), lemmatizer)
                    walk_schema(response.get("schema"), (method, "responses", code_norm))
    return tokens


@dataclass(frozen=True)
class Vocabulary:
    """Ordered token list with per-token document frequencies.

    Tokens are sorted lexicographically; every retained token appears in at
    least ``min_df`` endpoints.
    """

    tokens: tuple[str, ...]
    doc_freq: tuple[int, ...]
    min_df: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def index_of(self, token: str) -> int | None:
        return self._index.get(token)

    def doc_freq_of(self, token: str) -> int:
        idx = self._index.get(token)
        return 0 if idx is None else self.doc_freq[idx]


def build_vocabulary(token_bags: Iterable[Mapping[str, int]], min_df: int = 1) -> Vocabulary:
    """Vocabulary over all tokens that appear in at least ``min_df`` endpoints.

    Document frequency counts endpoints containing a token, not occurrences.
    Raises EmptyVocabulary when nothing survives the filter.
    """
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    df: Counter = Counter()
    for bag in token_bags:
        df.update(set(bag))
    retained = sorted(t for t, n in df.items() if n >= min_df)
    if not retained:
        raise EmptyVocabulary(f"no token appears in at least {min_df} endpoints")
    return Vocabulary(
        tokens=tuple(retained),
        doc_freq=tuple(df[t] for t in retained),
        min_df=min_df,
    )


def vocabulary_for_records(records: Sequence[Any], source: str, min_df: int | None = None) -> Vocabulary:
    """Build the tree or keyword vocabulary of a corpus.

    ``source`` selects the token bag: "tree" (default min_df 10) or
    "keyword" (default min_df 15).
    """
    if source == "tree":
        bags = (r.tree_tokens for r in records)
        threshold = 10 if min_df is None else min_df
    elif source == "keyword":
        bags = (r.keyword_tokens for r in records)
        threshold = 15 if min_df is None else min_df
    else:
        raise ValueError(f"unknown token source {source!r}")
    return build_vocabulary(bags, threshold)
