"""Metric suite over materialized corpora.

Each method raises a :class:`MetricNotApplicable` subclass when its inputs
have no support; the evaluation pipeline turns those into n/a results.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from application.services.embedding_service import EmbeddingService, cosine_similarity
from application.services.stats_kernels import (
    coverage_fraction,
    knn_radii,
    total_variation,
    wasserstein2,
)
from application.services.tree_query import match_pairs
from domain.entities.corpus import AttributeKind, AttributeSpec, MaterializedCorpus
from domain.entities.distribution import EmpiricalDistribution
from domain.entities.metric import (
    DependencyKind,
    Direction,
    MetricConfig,
    MetricFamily,
    MetricResult,
)
from domain.entities.parse_tree import KeyPairPattern, NodePair, ParseOutcome
from domain.errors import (
    EmptyCorpus,
    KTooLarge,
    MissingAttribute,
    NoPairs,
    NoTokens,
)
from domain.ports.tokenizer_port import TokenizerPort

logger = logging.getLogger(__name__)

PairScores = Dict[Tuple[str, int, str], float]


def knd_name(pattern: KeyPairPattern) -> str:
    return f"knd:{pattern.label}"


def am_name(spec: AttributeSpec) -> str:
    return f"am:{spec.name}"


def cfg_pass_rate(outcomes: Sequence[ParseOutcome], name: str = "cfg_pass_rate") -> MetricResult:
    """Fraction of samples that parse."""
    if not outcomes:
        raise EmptyCorpus("cannot compute a pass rate over zero samples")
    parsed = sum(1 for outcome in outcomes if outcome.parsed)
    return MetricResult(
        name=name,
        value=parsed / len(outcomes),
        direction=Direction.HIGHER_BETTER,
        family=MetricFamily.STRUCTURAL,
        support=len(outcomes),
        metadata={"parsed": parsed, "total": len(outcomes)},
    )


def type_token_ratio(
    texts: Sequence[str], tokenizer: TokenizerPort, name: str = "ttr"
) -> MetricResult:
    """Distinct tokens over total tokens across the whole corpus."""
    tokens: List[str] = []
    for text in texts:
        tokens.extend(tokenizer.tokenize(text))
    if not tokens:
        raise NoTokens("corpus has no tokens")
    return MetricResult(
        name=name,
        value=len(set(tokens)) / len(tokens),
        direction=Direction.HIGHER_BETTER,
        family=MetricFamily.NON_STRUCTURAL,
        support=len(tokens),
        metadata={"types": len(set(tokens))},
    )


def attribute_match(
    real: MaterializedCorpus, synth: MaterializedCorpus, spec: AttributeSpec
) -> MetricResult:
    """W2 (numeric) or total variation (categorical) between attribute columns."""
    pools = []
    for role, materialized in (("real", real), ("synthetic", synth)):
        column = materialized.table.column(spec.name)
        if column is None or column.support == 0:
            raise MissingAttribute(spec.name, role)
        pools.append(column)
    real_col, synth_col = pools

    if spec.kind is AttributeKind.NUMERIC:
        value = wasserstein2(
            EmpiricalDistribution.numeric(real_col.values),
            EmpiricalDistribution.numeric(synth_col.values),
        )
        distance = "wasserstein2"
    else:
        value = total_variation(
            EmpiricalDistribution.categorical(real_col.values),
            EmpiricalDistribution.categorical(synth_col.values),
        )
        distance = "total_variation"

    return MetricResult(
        name=am_name(spec),
        value=value,
        direction=Direction.LOWER_BETTER,
        family=MetricFamily.STRUCTURAL,
        support=real_col.support + synth_col.support,
        metadata={
            "distance": distance,
            "level": spec.level.value,
            "real_support": real_col.support,
            "synth_support": synth_col.support,
            "real_missing": len(real_col.missing),
            "synth_missing": len(synth_col.missing),
        },
    )


class MetricCalculator:
    """Metrics that need embeddings or configuration beyond a single corpus."""

    def __init__(self, embedding_service: EmbeddingService, config: MetricConfig):
        self.embedding_service = embedding_service
        self.config = config

    @staticmethod
    def _pairs(
        materialized: MaterializedCorpus, pattern: KeyPairPattern
    ) -> List[Tuple[str, int, NodePair]]:
        pairs = []
        for sample, tree in materialized.parsed_samples():
            for index, pair in enumerate(match_pairs(tree, pattern)):
                pairs.append((sample.id, index, pair))
        return pairs

    async def _cosine_scores(
        self, pairs: List[Tuple[str, int, NodePair]]
    ) -> Tuple[List[float], int]:
        texts = []
        for _, _, pair in pairs:
            texts.append(pair.a.content)
            texts.append(pair.b.content)
        matrix = await self.embedding_service.embed_texts(texts)
        scores = []
        zero_vectors = 0
        for i in range(len(pairs)):
            u, v = matrix.vectors[2 * i], matrix.vectors[2 * i + 1]
            if not u.any() or not v.any():
                zero_vectors += 1
            scores.append(cosine_similarity(u, v))
        return scores, zero_vectors

    @staticmethod
    def _sidecar_scores(
        pairs: List[Tuple[str, int, NodePair]], scores: PairScores, pattern: KeyPairPattern
    ) -> Tuple[List[float], int]:
        found = []
        missing = 0
        for sample_id, index, _ in pairs:
            score = scores.get((sample_id, index, pattern.label))
            if score is None:
                score = scores.get((sample_id, index, ""))
            if score is None:
                missing += 1
                continue
            found.append(score)
        return found, missing

    async def key_node_dependency(
        self,
        real: MaterializedCorpus,
        synth: MaterializedCorpus,
        pattern: KeyPairPattern,
        pair_scores: Optional[Dict[str, PairScores]] = None,
    ) -> MetricResult:
        """W2 between the real and synthetic distributions of per-pair dependency scores.

        Args:
            real: Materialized real corpus
            synth: Materialized synthetic corpus
            pattern: Key-node pair pattern
            pair_scores: External scores per role (``real``/``synthetic``) when the
                dependency function is a sidecar

        Returns:
            MetricResult, lower is better

        Raises:
            NoPairs: a corpus has no matched pair (or no scored pair)
        """
        sidecar = self.config.dependency_function.kind is DependencyKind.SIDECAR
        distributions = []
        metadata: Dict[str, object] = {"pattern": pattern.label}
        for role, materialized in (("real", real), ("synthetic", synth)):
            pairs = self._pairs(materialized, pattern)
            if not pairs:
                raise NoPairs(role)
            if sidecar:
                scores, missing = self._sidecar_scores(
                    pairs, (pair_scores or {}).get(role, {}), pattern
                )
                metadata[f"{role}_unscored_pairs"] = missing
                if not scores:
                    raise NoPairs(role)
            else:
                scores, zero_vectors = await self._cosine_scores(pairs)
                metadata[f"{role}_zero_vector_pairs"] = zero_vectors
                if zero_vectors:
                    logger.warning(
                        f"{zero_vectors} {role} pairs for {pattern.label} had a zero embedding"
                    )
            metadata[f"{role}_pairs"] = len(scores)
            distributions.append(EmpiricalDistribution.numeric(scores))

        if sidecar:
            metadata["dependency_function"] = DependencyKind.SIDECAR.value
        else:
            metadata.update(self.embedding_service.metadata)
            metadata["dependency_function"] = DependencyKind.COSINE.value
            metadata["zero_vector_pairs"] = (
                metadata["real_zero_vector_pairs"] + metadata["synthetic_zero_vector_pairs"]
            )

        return MetricResult(
            name=knd_name(pattern),
            value=wasserstein2(distributions[0], distributions[1]),
            direction=Direction.LOWER_BETTER,
            family=MetricFamily.STRUCTURAL,
            support=distributions[0].size + distributions[1].size,
            metadata=metadata,
        )

    async def knn_precision_recall(
        self, real_texts: Sequence[str], synth_texts: Sequence[str]
    ) -> Tuple[MetricResult, MetricResult]:
        """Coverage of synthetic points by real k-NN balls and vice versa."""
        k = self.config.knn_k
        metric = self.config.distance_metric
        for texts in (real_texts, synth_texts):
            if len(texts) <= k:
                raise KTooLarge(k, len(texts))

        real_points = await self.embedding_service.embed_texts(real_texts)
        synth_points = await self.embedding_service.embed_texts(synth_texts)

        precision = coverage_fraction(
            synth_points, real_points, knn_radii(real_points, k, metric), metric
        )
        recall = coverage_fraction(
            real_points, synth_points, knn_radii(synth_points, k, metric), metric
        )
        metadata = {
            **self.embedding_service.metadata,
            "k": k,
            "metric": metric.value,
            "parsed_only": self.config.knn_parsed_only,
        }
        logger.debug(f"KNN precision={precision:.4f} recall={recall:.4f} (k={k})")
        return (
            MetricResult(
                name="knn_precision",
                value=precision,
                direction=Direction.HIGHER_BETTER,
                family=MetricFamily.NON_STRUCTURAL,
                support=len(synth_texts),
                metadata=metadata,
            ),
            MetricResult(
                name="knn_recall",
                value=recall,
                direction=Direction.HIGHER_BETTER,
                family=MetricFamily.NON_STRUCTURAL,
                support=len(real_texts),
                metadata=metadata,
            ),
        )
