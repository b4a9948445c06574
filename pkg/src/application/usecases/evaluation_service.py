"""Evaluation Service for hexagonal architecture."""

import hashlib
import json
import logging
from datetime import datetime, timezone
from typing import Awaitable, Callable, Dict, List, Optional, Sequence

from application.services.corpus_materializer import CorpusMaterializer
from application.services.embedding_service import EmbeddingService
from application.services.metric_calculator import (
    MetricCalculator,
    PairScores,
    am_name,
    attribute_match,
    cfg_pass_rate,
    knd_name,
    type_token_ratio,
)
from domain.entities.corpus import Corpus, MaterializedCorpus
from domain.entities.grammar import Grammar
from domain.entities.metric import (
    DependencyKind,
    Direction,
    MetricConfig,
    MetricFamily,
    MetricKind,
    MetricResult,
)
from domain.entities.report import EvalReport
from domain.errors import MetricNotApplicable, StructEvalError
from domain.ports.corpus_repository_port import CorpusRepositoryPort
from domain.ports.tokenizer_port import TokenizerPort

logger = logging.getLogger(__name__)


def config_digest(config: MetricConfig, grammar: Grammar) -> str:
    data = config.model_dump(mode="json")
    # Set-valued fields dump in hash order.
    data["key_types"] = sorted(data["key_types"])
    data["enabled"] = sorted(data["enabled"])
    payload = json.dumps(data, sort_keys=True) + grammar.model_dump_json()
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


class EvaluationService:
    """Runs the full metric suite for one (real, synthetic) pair."""

    def __init__(
        self,
        materializer: CorpusMaterializer,
        embedding_service: EmbeddingService,
        tokenizer: TokenizerPort,
        repository: Optional[CorpusRepositoryPort] = None,
    ):
        self.materializer = materializer
        self.embedding_service = embedding_service
        self.tokenizer = tokenizer
        self.repository = repository

    async def _guarded(
        self,
        name: str,
        direction: Direction,
        family: MetricFamily,
        compute: Callable[[], Awaitable[Sequence[MetricResult]]],
    ) -> List[MetricResult]:
        """Run one metric; any failure becomes an n/a result instead of aborting."""
        try:
            return list(await compute())
        except MetricNotApplicable as e:
            logger.warning(f"Metric {name} not applicable: {e}")
            return [
                MetricResult.not_applicable(name, direction, family, e.reason, {"detail": str(e)})
            ]
        except StructEvalError as e:
            logger.error(f"Metric {name} failed: {e}")
            return [
                MetricResult.not_applicable(
                    name, direction, family, type(e).__name__, {"detail": str(e)}
                )
            ]

    def _pair_scores(self, config: MetricConfig) -> Optional[Dict[str, PairScores]]:
        function = config.dependency_function
        if function.kind is not DependencyKind.SIDECAR or self.repository is None:
            return None
        return {
            "real": self.repository.load_pair_scores(function.real),
            "synthetic": self.repository.load_pair_scores(function.synth),
        }

    async def evaluate(
        self,
        real: Corpus,
        synth: Corpus,
        grammar: Grammar,
        config: MetricConfig,
        dataset: str = "dataset",
        method: str = "method",
        epsilon: Optional[float] = None,
        include_timestamps: bool = False,
    ) -> EvalReport:
        """Materialize both corpora once and compute every enabled metric.

        Args:
            real: Real corpus
            synth: Synthetic corpus
            grammar: Structural contract of the dataset
            config: Enabled metrics and their parameters
            dataset: Dataset name recorded in the report
            method: Generation method recorded in the report
            epsilon: Privacy budget of the method, if any
            include_timestamps: Record start and finish times

        Returns:
            EvalReport; metrics without support are reported as n/a
        """
        started = datetime.now(timezone.utc).isoformat() if include_timestamps else None
        logger.info(f"Evaluating {method} on {dataset}: {len(real)} real / {len(synth)} synthetic")

        specs = config.attribute_specs
        real_m = self.materializer.materialize(real, grammar, specs, config.key_types)
        synth_m = self.materializer.materialize(synth, grammar, specs, config.key_types)
        calculator = MetricCalculator(self.embedding_service, config)
        results: List[MetricResult] = []

        async def run(name, direction, family, compute) -> None:
            results.extend(await self._guarded(name, direction, family, compute))

        higher, lower = Direction.HIGHER_BETTER, Direction.LOWER_BETTER
        structural, other = MetricFamily.STRUCTURAL, MetricFamily.NON_STRUCTURAL

        if config.is_enabled(MetricKind.CFG_PASS_RATE):
            await run(
                "cfg_pass_rate", higher, structural, self._wrap(cfg_pass_rate, synth_m.outcomes)
            )
            await run(
                "cfg_pass_rate_real",
                higher,
                structural,
                self._wrap(cfg_pass_rate, real_m.outcomes, "cfg_pass_rate_real"),
            )

        if config.is_enabled(MetricKind.KND):
            pair_scores = self._pair_scores(config)
            for pattern in config.key_pair_patterns:

                async def knd(pattern=pattern):
                    return [
                        await calculator.key_node_dependency(real_m, synth_m, pattern, pair_scores)
                    ]

                await run(knd_name(pattern), lower, structural, knd)

        if config.is_enabled(MetricKind.AM):
            for spec in specs:
                await run(
                    am_name(spec),
                    lower,
                    structural,
                    self._wrap(attribute_match, real_m, synth_m, spec),
                )

        if config.is_enabled(MetricKind.KNN):
            real_texts = self._knn_texts(real_m, config)
            synth_texts = self._knn_texts(synth_m, config)

            async def knn():
                return await calculator.knn_precision_recall(real_texts, synth_texts)

            before = len(results)
            await run("knn_precision", higher, other, knn)
            if len(results) - before == 1:
                # Failure produced a single n/a entry; mirror it for recall.
                failed = results[-1]
                results.append(
                    MetricResult.not_applicable(
                        "knn_recall", higher, other, failed.metadata["reason"], failed.metadata
                    )
                )

        if config.is_enabled(MetricKind.TTR):
            await run(
                "ttr", higher, other, self._wrap(type_token_ratio, synth.texts, self.tokenizer)
            )
            await run(
                "ttr_real",
                higher,
                other,
                self._wrap(type_token_ratio, real.texts, self.tokenizer, "ttr_real"),
            )

        applicable = sum(1 for r in results if r.applicable)
        logger.info(f"Computed {applicable}/{len(results)} applicable metrics")
        return EvalReport(
            dataset=dataset,
            method=method,
            epsilon=epsilon,
            metrics=tuple(results),
            config_digest=config_digest(config, grammar),
            started_at=started,
            finished_at=datetime.now(timezone.utc).isoformat() if include_timestamps else None,
        )

    @staticmethod
    def _wrap(function, *args) -> Callable[[], Awaitable[Sequence[MetricResult]]]:
        async def compute() -> Sequence[MetricResult]:
            return [function(*args)]

        return compute

    @staticmethod
    def _knn_texts(materialized: MaterializedCorpus, config: MetricConfig) -> List[str]:
        if config.knn_parsed_only:
            return [sample.text for sample, _ in materialized.parsed_samples()]
        return materialized.corpus.texts
