"""Parameters and released statistics of the noisy-histogram generator."""

from enum import Enum
from fractions import Fraction
from typing import Dict, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Category = Union[int, str]


class DpParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: float
    delta: float = 0.0
    seed: int = 0
    n_samples: int = 100
    max_derivation_depth: int = 64
    max_repeat: int = 16
    max_terminal_tokens: int = 64
    vocab_size: int = 1024
    max_attempts: int = 50
    # Multiplier on the Laplace scale; 0 releases exact counts (tests only).
    noise_scale: float = 1.0

    @field_validator("epsilon")
    @classmethod
    def _check_epsilon(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("epsilon must be positive")
        return value

    @field_validator("delta")
    @classmethod
    def _check_delta(cls, value: float) -> float:
        if value != 0:
            raise ValueError("only pure differential privacy (delta = 0) is supported")
        return value

    @field_validator(
        "n_samples",
        "max_derivation_depth",
        "max_repeat",
        "max_terminal_tokens",
        "vocab_size",
        "max_attempts",
    )
    @classmethod
    def _check_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be at least 1")
        return value

    @field_validator("noise_scale")
    @classmethod
    def _check_noise_scale(cls, value: float) -> float:
        if value < 0:
            raise ValueError("noise_scale must be non-negative")
        return value


class HistogramKind(str, Enum):
    REPEAT = "repeat"
    ALTERNATIVE = "alternative"
    LENGTH = "length"
    UNIGRAM = "unigram"


class NoisyHistogram(BaseModel):
    """Released histogram: noised, clamped and normalized weights per category."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: HistogramKind
    symbol: str
    categories: Tuple[Category, ...]
    weights: Tuple[float, ...]
    epsilon_share: Fraction

    @model_validator(mode="after")
    def _check_weights(self) -> "NoisyHistogram":
        if len(self.categories) != len(self.weights):
            raise ValueError("one weight per category is required")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if self.weights and abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        return self

    @property
    def key(self) -> str:
        return f"{self.kind.value}:{self.symbol}"

    def weight_of(self, category: Category) -> float:
        try:
            return self.weights[self.categories.index(category)]
        except ValueError:
            return 0.0


class HistogramSet(BaseModel):
    """All histograms released for one grammar, with the privacy ledger."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    histograms: Dict[str, NoisyHistogram] = Field(default_factory=dict)
    epsilon: Fraction = Fraction(0)

    @property
    def spent(self) -> Fraction:
        return sum((h.epsilon_share for h in self.histograms.values()), Fraction(0))

    def get(self, kind: HistogramKind, symbol: str) -> Optional[NoisyHistogram]:
        return self.histograms.get(f"{kind.value}:{symbol}")
