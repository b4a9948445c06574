"""Configuration settings and evaluation-config schema for structeval."""

import json
import os
from pathlib import Path
from typing import Dict, List, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from domain.entities.corpus import (
    AttributeSpec,
    RegexCaptureSourceSpec,
    SidecarSource,
    SidecarSourceSpec,
)
from domain.entities.distribution import DistanceMetric, EmbeddingConfig
from domain.entities.grammar import Grammar
from domain.entities.metric import (
    DependencyFunction,
    DependencyKind,
    MetricConfig,
    MetricKind,
)
from domain.entities.parse_tree import KeyPairPattern
from domain.errors import ConfigError, MissingFile

# Load environment variables from .env file
load_dotenv()


class Settings(BaseSettings):
    """Process-wide settings from the environment (prefix ``STRUCTEVAL_``)."""

    model_config = SettingsConfigDict(env_prefix="STRUCTEVAL_", case_sensitive=False)

    # Remote embedding provider
    embed_token: Optional[str] = None
    embed_max_retries: int = 3
    embed_batch_size: int = 64

    # Runtime
    log_level: str = "WARNING"
    cache_dir: str = ".structeval_cache"
    jobs: int = Field(default_factory=lambda: os.cpu_count() or 1)
    parallel_threshold: int = 64


class KnnSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: int = Field(default=3, ge=1)
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN
    parsed_only: bool = False


class ReportSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    bounds: Dict[str, float] = Field(default_factory=dict)
    include_timestamps: bool = False


class EvalConfigFile(BaseModel):
    """Schema of the JSON evaluation config; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    dataset: str = "dataset"
    method: str = "method"
    epsilon: Optional[float] = None
    grammar: Optional[str] = None
    key_nodes: List[str] = Field(default_factory=list)
    key_node_pairs: List[KeyPairPattern] = Field(default_factory=list)
    attributes: List[AttributeSpec] = Field(default_factory=list)
    knn: KnnSection = Field(default_factory=KnnSection)
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)
    dependency_function: DependencyFunction = Field(default_factory=DependencyFunction)
    metrics: List[MetricKind] = Field(default_factory=lambda: list(MetricKind))
    report: ReportSection = Field(default_factory=ReportSection)

    @model_validator(mode="after")
    def _check_metrics(self) -> "EvalConfigFile":
        if not self.metrics:
            raise ValueError("at least one metric must be enabled")
        return self

    def resolve_paths(self, base: Path) -> "EvalConfigFile":
        """Return a copy with relative file paths anchored at ``base``."""

        def anchor(path: Optional[str]) -> Optional[str]:
            if path is None or Path(path).is_absolute():
                return path
            return str(base / path)

        attributes = []
        for spec in self.attributes:
            if isinstance(spec.source, SidecarSourceSpec):
                sidecar = spec.source.sidecar
                spec = spec.model_copy(
                    update={
                        "source": SidecarSourceSpec(
                            sidecar=SidecarSource(
                                real=anchor(sidecar.real),
                                synth=anchor(sidecar.synth),
                                key=sidecar.key,
                            )
                        )
                    }
                )
            attributes.append(spec)

        dependency = self.dependency_function
        if dependency.kind is DependencyKind.SIDECAR:
            dependency = DependencyFunction(
                kind=dependency.kind, real=anchor(dependency.real), synth=anchor(dependency.synth)
            )
        embedding = self.embedding
        if embedding.cache_dir is not None:
            embedding = embedding.model_copy(update={"cache_dir": anchor(embedding.cache_dir)})

        return self.model_copy(
            update={
                "grammar": anchor(self.grammar),
                "attributes": attributes,
                "dependency_function": dependency,
                "embedding": embedding,
            }
        )

    def check_node_types(self, grammar: Grammar) -> None:
        """Reject key-node names the grammar does not define, listing every one.

        Raises:
            ConfigError: a key node, pair type or capture node type is unknown
        """
        known = grammar.node_types
        violations = []
        for index, name in enumerate(self.key_nodes):
            if name.lower() not in known:
                violations.append(f"key_nodes.{index}: unknown node type '{name}'")
        for index, pattern in enumerate(self.key_node_pairs):
            for side, name in (("a", pattern.type_a), ("b", pattern.type_b)):
                if name not in known:
                    violations.append(
                        f"key_node_pairs.{index}.{side}: unknown node type '{name}'"
                    )
        for index, spec in enumerate(self.attributes):
            if isinstance(spec.source, RegexCaptureSourceSpec):
                name = spec.source.regex_capture.node_type
                if name.lower() not in known:
                    violations.append(
                        f"attributes.{index}.source.regex_capture.node_type:"
                        f" unknown node type '{name}'"
                    )
        if violations:
            raise ConfigError(violations)

    def to_metric_config(self) -> MetricConfig:
        return MetricConfig(
            key_types=frozenset(self.key_nodes),
            key_pair_patterns=tuple(self.key_node_pairs),
            attribute_specs=tuple(self.attributes),
            knn_k=self.knn.k,
            distance_metric=self.knn.metric,
            knn_parsed_only=self.knn.parsed_only,
            embedding=self.embedding,
            dependency_function=self.dependency_function,
            enabled=frozenset(self.metrics),
        )


def _violations(error: ValidationError) -> List[str]:
    listed = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        listed.append(f"{location}: {item['msg']}")
    return listed


def parse_eval_config(data: Union[dict, str], base: Optional[Path] = None) -> EvalConfigFile:
    """Validate a config mapping or JSON text, reporting every violation at once.

    Raises:
        ConfigError: the config is not valid JSON or violates the schema
    """
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            message = f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"
            raise ConfigError([message]) from e
    if not isinstance(data, dict):
        raise ConfigError(["<root>: config must be a JSON object"])
    try:
        config = EvalConfigFile.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_violations(e)) from e
    return config.resolve_paths(base) if base is not None else config


def load_eval_config(path: Union[str, Path]) -> EvalConfigFile:
    config_path = Path(path)
    if not config_path.is_file():
        raise MissingFile(str(config_path))
    return parse_eval_config(
        config_path.read_text(encoding="utf-8"), base=config_path.parent
    )


# Global settings instance
settings = Settings()
