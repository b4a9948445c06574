"""Exception hierarchy for structeval."""

from typing import List, Optional


class StructEvalError(Exception):
    """Root of every error raised by structeval."""


# Grammar


class GrammarError(StructEvalError):
    """Grammar file could not be turned into a valid Grammar."""


class GrammarSyntaxError(GrammarError):
    """Malformed rule in a grammar file."""

    def __init__(self, line: int, col: int, detail: str = ""):
        self.line = line
        self.col = col
        self.detail = detail
        message = f"syntax error at line {line}, column {col}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class UnknownSymbol(GrammarError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"undefined symbol '{name}'")


class BadRegex(GrammarError):
    def __init__(self, name: str, detail: str = ""):
        self.name = name
        super().__init__(f"regex terminal '{name}' does not compile: {detail}")


class DepthExceeded(StructEvalError):
    def __init__(self, depth: int):
        self.depth = depth
        super().__init__(f"derivation depth limit {depth} exceeded")


# Tree queries


class UnknownAttribute(StructEvalError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown built-in attribute '{name}'")


# Corpus


class CorpusError(StructEvalError):
    """Corpus or label file could not be read as expected."""


class CorpusIOError(CorpusError):
    """I/O failure while reading or writing corpus files."""


class MissingFile(CorpusIOError):
    def __init__(self, path: str):
        self.path = path
        super().__init__(f"file not found: {path}")


class MalformedRecord(CorpusError):
    def __init__(self, line: int, detail: str = ""):
        self.line = line
        super().__init__(f"malformed record at line {line}: {detail}")


class DuplicateId(CorpusError):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"duplicate sample id '{sample_id}'")


class TypeMismatch(CorpusError):
    def __init__(self, sample_id: str, detail: str = ""):
        self.sample_id = sample_id
        super().__init__(f"value for id '{sample_id}' has the wrong type: {detail}")


class MissingLabel(CorpusError):
    def __init__(self, sample_id: str):
        self.sample_id = sample_id
        super().__init__(f"no label for sample '{sample_id}'")


# Embeddings


class EmbeddingError(StructEvalError):
    """Embedding provider or cache failure."""


class RemoteEmbeddingError(EmbeddingError):
    def __init__(self, status: Optional[int], detail: str = ""):
        self.status = status
        super().__init__(f"remote embedding request failed (status={status}): {detail}")


class DimensionMismatch(EmbeddingError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"dimension mismatch: expected {expected}, got {got}")


class CacheCorrupt(EmbeddingError):
    def __init__(self, path: str, detail: str = ""):
        self.path = path
        super().__init__(f"embedding cache {path} is corrupt: {detail}")


# Stats


class KindMismatch(StructEvalError):
    def __init__(self, expected: str, got: str):
        super().__init__(f"expected {expected} distribution(s), got {got}")


class KTooLarge(StructEvalError):
    def __init__(self, k: int, n: int):
        self.k = k
        self.n = n
        super().__init__(f"k={k} needs more than {k} points, got {n}")


# Metrics


class MetricNotApplicable(StructEvalError):
    """A metric has no support on the given inputs; reported as n/a."""

    reason = "not-applicable"


class EmptyCorpus(MetricNotApplicable):
    reason = "empty-corpus"


class NoPairs(MetricNotApplicable):
    reason = "no-pairs"

    def __init__(self, role: str):
        self.role = role
        super().__init__(f"no matched key-node pairs in the {role} corpus")


class MissingAttribute(MetricNotApplicable):
    reason = "missing-attribute"

    def __init__(self, name: str, role: str):
        self.name = name
        self.role = role
        super().__init__(f"attribute '{name}' has no values in the {role} corpus")


class NoTokens(MetricNotApplicable):
    reason = "no-tokens"


# DP generator


class NoParsedSamples(StructEvalError):
    def __init__(self):
        super().__init__("no sample of the real corpus parses under the grammar")


class GenerationError(StructEvalError):
    """The generator could not produce a grammar-valid sample."""


# Report


class MetricAbsent(StructEvalError):
    def __init__(self, name: str, detail: str = ""):
        self.name = name
        super().__init__(f"cannot rescale '{name}': {detail}")


class MixedDatasets(StructEvalError):
    def __init__(self, datasets: List[str]):
        self.datasets = datasets
        super().__init__(f"reports mix datasets: {', '.join(sorted(datasets))}")


# Config


class ConfigError(StructEvalError):
    def __init__(self, violations: List[str]):
        self.violations = violations
        listing = "\n".join(f"  - {v}" for v in violations)
        super().__init__(f"invalid configuration ({len(violations)} violations):\n{listing}")
