"""Corpus entities: samples, attribute specifications and attribute tables."""

from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from domain.entities.parse_tree import ParseNode, ParseOutcome


class CorpusRole(str, Enum):
    REAL = "real"
    SYNTHETIC = "synthetic"


class Sample(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    text: str


class Corpus(BaseModel):
    """Ordered samples of one dataset (real or synthetic)."""

    model_config = ConfigDict(frozen=True)

    samples: Tuple[Sample, ...]
    source_path: Optional[str] = None
    role: CorpusRole = CorpusRole.REAL

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def ids(self) -> List[str]:
        return [sample.id for sample in self.samples]

    @property
    def texts(self) -> List[str]:
        return [sample.text for sample in self.samples]


class AttributeLevel(str, Enum):
    SAMPLE = "sample"
    NODE = "node"


class AttributeKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class BuiltinSource(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    builtin: str


class SidecarSource(BaseModel):
    """Label files keyed by corpus role; records are JSONL ``{id, <key>}``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    real: Optional[str] = None
    synth: Optional[str] = None
    key: str = "value"

    def path_for(self, role: CorpusRole) -> Optional[str]:
        return self.real if role is CorpusRole.REAL else self.synth


class SidecarSourceSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    sidecar: SidecarSource


class RegexCaptureSource(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    node_type: str
    pattern: str


class RegexCaptureSourceSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    regex_capture: RegexCaptureSource


AttributeSource = Union[BuiltinSource, SidecarSourceSpec, RegexCaptureSourceSpec]

BUILTIN_KINDS: Dict[str, Tuple[AttributeKind, Tuple[AttributeLevel, ...]]] = {
    "token_length": (AttributeKind.NUMERIC, (AttributeLevel.SAMPLE, AttributeLevel.NODE)),
    "num_nodes": (AttributeKind.NUMERIC, (AttributeLevel.SAMPLE,)),
    "num_all_nodes": (AttributeKind.NUMERIC, (AttributeLevel.SAMPLE,)),
    "node_type": (AttributeKind.CATEGORICAL, (AttributeLevel.NODE,)),
}


class AttributeSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    level: AttributeLevel = AttributeLevel.SAMPLE
    kind: AttributeKind = AttributeKind.NUMERIC
    source: AttributeSource

    @model_validator(mode="after")
    def _check_builtin(self) -> "AttributeSpec":
        if isinstance(self.source, BuiltinSource):
            known = BUILTIN_KINDS.get(self.source.builtin)
            if known is None:
                raise ValueError(f"unknown built-in attribute '{self.source.builtin}'")
            kind, levels = known
            if kind is not self.kind:
                raise ValueError(
                    f"built-in '{self.source.builtin}' is {kind.value}, not {self.kind.value}"
                )
            if self.level not in levels:
                raise ValueError(
                    f"built-in '{self.source.builtin}' is not defined at {self.level.value} level"
                )
        return self


AttributeValue = Union[float, str]


class Provenance(BaseModel):
    model_config = ConfigDict(frozen=True)

    sample_id: str
    node_index: Optional[int] = None


class AttributeColumn(BaseModel):
    """Values of one attribute with their provenance and the missing-value mask."""

    name: str
    level: AttributeLevel
    kind: AttributeKind
    values: List[AttributeValue] = Field(default_factory=list)
    provenance: List[Provenance] = Field(default_factory=list)
    missing: List[Provenance] = Field(default_factory=list)

    @property
    def support(self) -> int:
        return len(self.values)


class AttributeTable(BaseModel):
    columns: Dict[str, AttributeColumn] = Field(default_factory=dict)

    def column(self, name: str) -> Optional[AttributeColumn]:
        return self.columns.get(name)


class MaterializedCorpus(BaseModel):
    """A corpus parsed once, with attribute values for its parsed samples."""

    corpus: Corpus
    outcomes: Tuple[ParseOutcome, ...]
    table: AttributeTable
    key_types: FrozenSet[str] = frozenset()

    @property
    def parsed_count(self) -> int:
        return sum(1 for outcome in self.outcomes if outcome.parsed)

    def parsed_samples(self) -> List[Tuple[Sample, ParseNode]]:
        return [
            (sample, outcome.tree)
            for sample, outcome in zip(self.corpus.samples, self.outcomes)
            if outcome.parsed and outcome.tree is not None
        ]
