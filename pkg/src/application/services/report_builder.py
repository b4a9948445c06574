"""Cross-method aggregation: radar rescaling and comparison tables."""

import logging
from typing import Any, Dict, List, Mapping, Optional, Sequence

from pydantic import BaseModel

from domain.entities.metric import Direction, MetricFamily, MetricResult
from domain.entities.report import (
    NOT_APPLICABLE,
    REPORT_SCHEMA_VERSION,
    EvalReport,
    RescaledScore,
)
from domain.errors import MetricAbsent, MixedDatasets

logger = logging.getLogger(__name__)

WORST_SCORE = 20.0
BEST_SCORE = 100.0
PASS_RATE_METRIC = "cfg_pass_rate"


def row_label(report: EvalReport) -> str:
    if report.epsilon is None:
        return report.method
    return f"{report.method}@eps={report.epsilon:g}"


def default_bound(result: MetricResult) -> float:
    return 1.0 if result.direction is Direction.HIGHER_BETTER else 0.0


def is_zeroed(report: EvalReport, result: Optional[MetricResult]) -> bool:
    """Score 0 for a missing or n/a metric, and for structural metrics when CFG-PR is 0."""
    if result is None or not result.applicable:
        return True
    if result.family is MetricFamily.STRUCTURAL:
        pass_rate = report.metric(PASS_RATE_METRIC)
        if pass_rate is not None and pass_rate.value == 0:
            return True
    return False


def rescale(
    reports: Sequence[EvalReport],
    metric_name: str,
    bounds: Optional[Mapping[str, float]] = None,
) -> List[RescaledScore]:
    """Map one metric across methods onto radar scores in {0} and [20, 100].

    The worst non-zeroed method scores 20 and the metric's bound scores 100.

    Args:
        reports: At least two reports
        metric_name: Metric to rescale
        bounds: Per-metric best achievable value; defaults to 1 for
            higher-better metrics and 0 for lower-better ones

    Returns:
        One score per report, in input order

    Raises:
        MetricAbsent: fewer than two reports, or no report has the metric
    """
    if len(reports) < 2:
        raise MetricAbsent(metric_name, "rescaling needs at least two reports")
    results = [report.metric(metric_name) for report in reports]
    present = [result for result in results if result is not None]
    if not present:
        raise MetricAbsent(metric_name, "no report contains this metric")

    direction = present[0].direction
    bound = (bounds or {}).get(metric_name, default_bound(present[0]))
    live = [
        result.value
        for report, result in zip(reports, results)
        if not is_zeroed(report, result)
    ]

    worst = bound
    if live:
        worst = min(live) if direction is Direction.HIGHER_BETTER else max(live)
    scores = []
    for report, result in zip(reports, results):
        raw = result.value if result is not None else None
        if is_zeroed(report, result):
            score = 0.0
        elif bound == worst:
            score = BEST_SCORE
        else:
            if direction is Direction.HIGHER_BETTER:
                fraction = (raw - worst) / (bound - worst)
            else:
                fraction = (worst - raw) / (worst - bound)
            score = WORST_SCORE + (BEST_SCORE - WORST_SCORE) * fraction
            score = min(BEST_SCORE, max(WORST_SCORE, score))
        scores.append(
            RescaledScore(metric=metric_name, method=row_label(report), raw=raw, score=score)
        )
    return scores


class Comparison(BaseModel):
    """Plot-ready tables for a set of reports on one dataset."""

    dataset: str
    methods: List[str]
    metrics: List[str]
    raw: List[Dict[str, Any]]
    rescaled: List[Dict[str, Any]]
    bundle: Dict[str, Any]


def _metric_order(reports: Sequence[EvalReport]) -> List[str]:
    names: List[str] = []
    for report in reports:
        for name in report.metric_names:
            if name not in names:
                names.append(name)
    return names


def compare(
    reports: Sequence[EvalReport], bounds: Optional[Mapping[str, float]] = None
) -> Comparison:
    """Build the raw table, the rescaled table and the JSON bundle.

    Raises:
        MixedDatasets: reports come from different datasets
        MetricAbsent: fewer than two reports
    """
    datasets = sorted({report.dataset for report in reports})
    if len(datasets) > 1:
        raise MixedDatasets(datasets)
    ordered = sorted(
        reports, key=lambda r: (r.method, r.epsilon if r.epsilon is not None else -1.0)
    )
    metrics = _metric_order(ordered)
    methods = [row_label(report) for report in ordered]

    raw_rows = []
    for report, label in zip(ordered, methods):
        row: Dict[str, Any] = {"method": label}
        for name in metrics:
            result = report.metric(name)
            row[name] = result.value if result is not None and result.applicable else NOT_APPLICABLE
        raw_rows.append(row)

    rescaled_rows: List[Dict[str, Any]] = [{"method": label} for label in methods]
    rescaled_bundle: Dict[str, Dict[str, float]] = {}
    for name in metrics:
        scores = rescale(ordered, name, bounds)
        rescaled_bundle[name] = {}
        for row, score in zip(rescaled_rows, scores):
            row[name] = score.score
            rescaled_bundle[name][score.method] = score.score

    logger.info(f"Compared {len(ordered)} reports over {len(metrics)} metrics")
    return Comparison(
        dataset=datasets[0] if datasets else "",
        methods=methods,
        metrics=metrics,
        raw=raw_rows,
        rescaled=rescaled_rows,
        bundle={
            "schema_version": REPORT_SCHEMA_VERSION,
            "dataset": datasets[0] if datasets else "",
            "reports": [report.to_record() for report in ordered],
            "rescaled": rescaled_bundle,
        },
    )
