"""Metric configuration and per-metric results."""

from enum import Enum
from typing import Any, Dict, FrozenSet, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from domain.entities.corpus import AttributeSpec
from domain.entities.distribution import DistanceMetric, EmbeddingConfig
from domain.entities.parse_tree import KeyPairPattern


class Direction(str, Enum):
    HIGHER_BETTER = "higher-better"
    LOWER_BETTER = "lower-better"


class MetricFamily(str, Enum):
    STRUCTURAL = "structural"
    NON_STRUCTURAL = "non-structural"


class MetricKind(str, Enum):
    """Metric groups that can be switched on and off in a configuration."""

    CFG_PASS_RATE = "cfg_pass_rate"
    KND = "knd"
    AM = "am"
    KNN = "knn"
    TTR = "ttr"


class DependencyKind(str, Enum):
    COSINE = "cosine"
    SIDECAR = "sidecar"


class DependencyFunction(BaseModel):
    """How a matched key-node pair is scored.

    ``sidecar`` reads externally computed scores (for example from an LLM judge)
    as JSONL records ``{"id", "pair", "score"}`` with an optional ``"pattern"``
    label, one file per corpus role.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: DependencyKind = DependencyKind.COSINE
    real: Optional[str] = None
    synth: Optional[str] = None

    @model_validator(mode="after")
    def _check_sidecar(self) -> "DependencyFunction":
        if self.kind is DependencyKind.SIDECAR and not (self.real and self.synth):
            raise ValueError("sidecar dependency function needs 'real' and 'synth' score files")
        return self


class MetricConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    key_types: FrozenSet[str] = frozenset()
    key_pair_patterns: Tuple[KeyPairPattern, ...] = ()
    attribute_specs: Tuple[AttributeSpec, ...] = ()
    knn_k: int = 3
    distance_metric: DistanceMetric = DistanceMetric.EUCLIDEAN
    knn_parsed_only: bool = False
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)
    dependency_function: DependencyFunction = Field(default_factory=DependencyFunction)
    enabled: FrozenSet[MetricKind] = frozenset(MetricKind)

    @field_validator("knn_k")
    @classmethod
    def _check_k(cls, value: int) -> int:
        if value < 1:
            raise ValueError("knn_k must be at least 1")
        return value

    @field_validator("key_types")
    @classmethod
    def _normalize_key_types(cls, value: FrozenSet[str]) -> FrozenSet[str]:
        return frozenset(name.lower() for name in value)

    @field_validator("enabled")
    @classmethod
    def _check_enabled(cls, value: FrozenSet[MetricKind]) -> FrozenSet[MetricKind]:
        if not value:
            raise ValueError("at least one metric must be enabled")
        return value

    def is_enabled(self, kind: MetricKind) -> bool:
        return kind in self.enabled


class MetricResult(BaseModel):
    """Outcome of one metric; ``value`` is None when the metric is not applicable."""

    model_config = ConfigDict(frozen=True)

    name: str
    value: Optional[float]
    direction: Direction
    family: MetricFamily
    support: int = 0
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_support(self) -> "MetricResult":
        if self.value is not None and self.support <= 0:
            raise ValueError(f"metric '{self.name}' has a value but no support")
        return self

    @property
    def applicable(self) -> bool:
        return self.value is not None

    @classmethod
    def not_applicable(
        cls,
        name: str,
        direction: Direction,
        family: MetricFamily,
        reason: str,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> "MetricResult":
        return cls(
            name=name,
            value=None,
            direction=direction,
            family=family,
            support=0,
            metadata={**(metadata or {}), "reason": reason},
        )
