"""Exception hierarchy shared across the package."""


class ApirecError(Exception):
    """Base class for all errors raised by this package."""


# --- document parsing ---

class MalformedDocument(ApirecError):
    """Input bytes are not well-formed JSON/YAML or not an object tree."""


class UnsupportedVersion(ApirecError):
    """Document does not declare swagger version 2.0."""


class MissingPaths(ApirecError):
    """Document has no paths section."""


# --- corpus / featurization ---

class NoValidSpecs(ApirecError):
    """Corpus directory yielded no parseable 2.0 specifications."""


class EmptyVocabulary(ApirecError):
    """No token survived the document-frequency filter."""


# --- enrichment ---

class DimensionMismatch(ApirecError):
    """Dense embedding rows do not share a single dimension."""


class UnknownEndpointId(ApirecError):
    """Sidecar row names an endpoint that is not in the corpus."""


class DegenerateMatrix(ApirecError):
    """Matrix is all-zero; no decomposition possible."""


class RankDeficient(ApirecError):
    """The feasible projection dimension is zero."""


# --- ranking ---

class NoFeatures(ApirecError):
    """Fusion config enables no similarity features."""


class EmptyIndex(ApirecError):
    """The index contains no endpoints."""


class IncompatibleConfig(ApirecError):
    """Config requests a featurization the index was not built with."""


# --- index persistence ---

class VersionMismatch(ApirecError):
    """Persisted index uses an unknown format version."""


class CorruptIndex(ApirecError):
    """Persisted index fails checksum or structural validation."""


# --- evaluation ---

class EmptyLexicon(ApirecError):
    """Synonym lexicon holds no entries."""
