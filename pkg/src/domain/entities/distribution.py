"""Operands of the distance kernels: empirical distributions and embeddings."""

import math
from collections import Counter
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class DistributionKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class EmpiricalDistribution(BaseModel):
    """Equal-weight numeric sample or categorical count table."""

    model_config = ConfigDict(frozen=True)

    kind: DistributionKind
    values: Tuple[float, ...] = ()
    counts: Dict[str, int] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_observations(self) -> "EmpiricalDistribution":
        if self.kind is DistributionKind.NUMERIC:
            if not self.values:
                raise ValueError("numeric distribution needs at least one value")
            if not all(math.isfinite(v) for v in self.values):
                raise ValueError("numeric distribution values must be finite")
            if list(self.values) != sorted(self.values):
                raise ValueError("numeric distribution values must be sorted")
        else:
            if not self.counts:
                raise ValueError("categorical distribution needs at least one category")
            if any(count <= 0 for count in self.counts.values()):
                raise ValueError("categorical counts must be positive")
        return self

    @classmethod
    def numeric(cls, values: Iterable[float]) -> "EmpiricalDistribution":
        return cls(
            kind=DistributionKind.NUMERIC,
            values=tuple(sorted(float(v) for v in values)),
        )

    @classmethod
    def categorical(
        cls, values: Union[Iterable[str], Mapping[str, int]]
    ) -> "EmpiricalDistribution":
        if isinstance(values, Mapping):
            counts = {str(k): int(v) for k, v in values.items() if v > 0}
        else:
            counts = dict(Counter(str(v) for v in values))
        return cls(kind=DistributionKind.CATEGORICAL, counts=counts)

    @property
    def size(self) -> int:
        if self.kind is DistributionKind.NUMERIC:
            return len(self.values)
        return sum(self.counts.values())

    def normalized(self) -> Dict[str, float]:
        total = self.size
        return {category: count / total for category, count in self.counts.items()}


class DistanceMetric(str, Enum):
    EUCLIDEAN = "euclidean"
    COSINE = "cosine-distance"


class EmbeddingProvider(str, Enum):
    HASH = "hash"
    REMOTE = "remote"


class EmbeddingConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    provider: EmbeddingProvider = EmbeddingProvider.HASH
    dimension: int = 256
    endpoint: Optional[str] = None
    model: Optional[str] = None
    cache_dir: Optional[str] = None
    batch_size: int = 64

    @field_validator("dimension")
    @classmethod
    def _check_dimension(cls, value: int) -> int:
        if value < 2:
            raise ValueError("dimension must be at least 2")
        return value

    @field_validator("batch_size")
    @classmethod
    def _check_batch_size(cls, value: int) -> int:
        if value < 1:
            raise ValueError("batch_size must be positive")
        return value

    @model_validator(mode="after")
    def _check_remote(self) -> "EmbeddingConfig":
        if self.provider is EmbeddingProvider.REMOTE:
            if not self.endpoint:
                raise ValueError("remote provider requires an endpoint")
            if not self.model:
                raise ValueError("remote provider requires a model name")
        return self

    @property
    def model_name(self) -> str:
        if self.provider is EmbeddingProvider.HASH:
            return "feature-hash"
        return self.model or ""


class EmbeddingMatrix(BaseModel):
    """Row ``i`` of ``vectors`` is the embedding of ``keys[i]``."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    keys: Tuple[str, ...]
    vectors: np.ndarray

    @model_validator(mode="after")
    def _check_shape(self) -> "EmbeddingMatrix":
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-D array")
        if self.vectors.shape[0] != len(self.keys):
            raise ValueError("one vector per key is required")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("vectors contain non-finite entries")
        return self

    @classmethod
    def from_rows(
        cls, keys: List[str], rows: List[List[float]], dimension: int
    ) -> "EmbeddingMatrix":
        if rows:
            vectors = np.asarray(rows, dtype=np.float64)
        else:
            vectors = np.zeros((0, dimension), dtype=np.float64)
        return cls(keys=tuple(keys), vectors=vectors)

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.keys)


class NeighborRadii(BaseModel):
    """Distance from each point to its k-th nearest neighbour within its own set."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int
    metric: DistanceMetric
    radii: np.ndarray

    @model_validator(mode="after")
    def _check_radii(self) -> "NeighborRadii":
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.k >= len(self.radii):
            raise ValueError("k must be smaller than the point-set size")
        if np.any(self.radii < 0):
            raise ValueError("radii must be non-negative")
        return self
