"""Evaluation reports and rescaled radar scores."""

from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, field_validator

from domain.entities.metric import Direction, MetricFamily, MetricResult

NOT_APPLICABLE = "n/a"
REPORT_SCHEMA_VERSION = 1


class EvalReport(BaseModel):
    """Per-metric results for one (real, synthetic) pair."""

    model_config = ConfigDict(frozen=True)

    dataset: str
    method: str
    epsilon: Optional[float] = None
    metrics: Tuple[MetricResult, ...] = ()
    config_digest: str = ""
    started_at: Optional[str] = None
    finished_at: Optional[str] = None

    @field_validator("metrics")
    @classmethod
    def _unique_names(cls, value: Tuple[MetricResult, ...]) -> Tuple[MetricResult, ...]:
        seen = set()
        for result in value:
            if result.name in seen:
                raise ValueError(f"duplicate metric '{result.name}' in report")
            seen.add(result.name)
        return value

    def metric(self, name: str) -> Optional[MetricResult]:
        for result in self.metrics:
            if result.name == name:
                return result
        return None

    @property
    def metric_names(self) -> List[str]:
        return [result.name for result in self.metrics]

    def to_record(self) -> Dict[str, Any]:
        """JSON-ready mapping; not-applicable values are written as ``"n/a"``."""
        record: Dict[str, Any] = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "dataset": self.dataset,
            "method": self.method,
            "epsilon": self.epsilon,
            "config_digest": self.config_digest,
            "metrics": [
                {
                    "name": result.name,
                    "value": result.value if result.applicable else NOT_APPLICABLE,
                    "direction": result.direction.value,
                    "family": result.family.value,
                    "support": result.support,
                    "metadata": result.metadata,
                }
                for result in self.metrics
            ],
        }
        if self.started_at is not None:
            record["started_at"] = self.started_at
        if self.finished_at is not None:
            record["finished_at"] = self.finished_at
        return record

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "EvalReport":
        metrics = []
        for entry in record.get("metrics", []):
            value = entry.get("value")
            metrics.append(
                MetricResult(
                    name=entry["name"],
                    value=None if value == NOT_APPLICABLE or value is None else float(value),
                    direction=Direction(entry["direction"]),
                    family=MetricFamily(entry.get("family", MetricFamily.STRUCTURAL.value)),
                    support=int(entry.get("support", 0)),
                    metadata=dict(entry.get("metadata") or {}),
                )
            )
        return cls(
            dataset=record["dataset"],
            method=record["method"],
            epsilon=record.get("epsilon"),
            metrics=tuple(metrics),
            config_digest=record.get("config_digest", ""),
            started_at=record.get("started_at"),
            finished_at=record.get("finished_at"),
        )


class RescaledScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    metric: str
    method: str
    raw: Optional[float]
    score: float

    @field_validator("score")
    @classmethod
    def _check_range(cls, value: float) -> float:
        if value != 0 and not 20.0 <= value <= 100.0:
            raise ValueError(f"rescaled score {value} outside {{0}} and [20, 100]")
        return value
