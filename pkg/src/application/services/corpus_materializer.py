"""Parse a corpus once and build its attribute table."""

import logging
import math
import re
from concurrent.futures import ProcessPoolExecutor
from typing import AbstractSet, Dict, List, Optional, Sequence, Tuple

from application.services.tree_query import builtin_attribute, collect_nodes
from domain.entities.corpus import (
    AttributeColumn,
    AttributeKind,
    AttributeLevel,
    AttributeSpec,
    AttributeTable,
    AttributeValue,
    BuiltinSource,
    Corpus,
    MaterializedCorpus,
    Provenance,
    RegexCaptureSourceSpec,
    SidecarSourceSpec,
)
from domain.entities.grammar import Grammar
from domain.entities.parse_tree import ParseNode, ParseOutcome
from domain.parsers.earley import EarleyParser
from domain.ports.corpus_repository_port import CorpusRepositoryPort
from domain.ports.tokenizer_port import TokenizerPort

logger = logging.getLogger(__name__)

_worker_parser: Optional[EarleyParser] = None

# One sidecar file can feed several attributes through different keys.
_LabelKey = Tuple[str, str, AttributeKind]


def _init_worker(grammar: Grammar) -> None:
    global _worker_parser
    _worker_parser = EarleyParser(grammar)


def _parse_in_worker(text: str) -> ParseOutcome:
    return _worker_parser.parse(text)


def node_label_id(sample_id: str, node_index: int) -> str:
    """Sidecar id of the ``node_index``-th key node of a sample."""
    return f"{sample_id}#{node_index}"


class CorpusMaterializer:
    """Parses samples and computes configured attributes for parsed samples only."""

    def __init__(
        self,
        tokenizer: TokenizerPort,
        repository: Optional[CorpusRepositoryPort] = None,
        jobs: int = 1,
        parallel_threshold: int = 64,
    ):
        self.tokenizer = tokenizer
        self.repository = repository
        self.jobs = max(1, jobs)
        self.parallel_threshold = parallel_threshold

    def parse_all(self, corpus: Corpus, grammar: Grammar) -> Tuple[ParseOutcome, ...]:
        """Parse every sample exactly once, returning outcomes in sample order."""
        texts = corpus.texts
        if self.jobs > 1 and len(texts) > self.parallel_threshold:
            logger.info(f"Parsing {len(texts)} samples with {self.jobs} worker processes")
            chunksize = max(1, len(texts) // (self.jobs * 4))
            try:
                with ProcessPoolExecutor(
                    max_workers=self.jobs, initializer=_init_worker, initargs=(grammar,)
                ) as pool:
                    return tuple(pool.map(_parse_in_worker, texts, chunksize=chunksize))
            except RecursionError:
                # Very deep trees cannot be pickled back from the workers.
                logger.warning("Parse trees too deep to transfer; parsing in-process instead")
        parser = EarleyParser(grammar)
        return tuple(parser.parse(text) for text in texts)

    def materialize(
        self,
        corpus: Corpus,
        grammar: Grammar,
        specs: Sequence[AttributeSpec],
        key_types: AbstractSet[str] = frozenset(),
    ) -> MaterializedCorpus:
        """Parse ``corpus`` and extract every attribute in ``specs``.

        Failed samples keep their outcome but contribute no attribute rows.
        """
        outcomes = self.parse_all(corpus, grammar)
        parsed = sum(1 for outcome in outcomes if outcome.parsed)
        logger.info(
            f"Materialized {corpus.role.value} corpus: {parsed}/{len(outcomes)} samples parsed"
        )
        trees = [
            (sample.id, outcome.tree)
            for sample, outcome in zip(corpus.samples, outcomes)
            if outcome.parsed and outcome.tree is not None
        ]
        labels: Dict[_LabelKey, Dict[str, AttributeValue]] = {}
        table = AttributeTable()
        for spec in specs:
            table.columns[spec.name] = self._column(spec, trees, corpus, key_types, labels)
        return MaterializedCorpus(
            corpus=corpus,
            outcomes=outcomes,
            table=table,
            key_types=frozenset(key_types),
        )

    def _column(
        self,
        spec: AttributeSpec,
        trees: List[Tuple[str, ParseNode]],
        corpus: Corpus,
        key_types: AbstractSet[str],
        labels: Dict[_LabelKey, Dict[str, AttributeValue]],
    ) -> AttributeColumn:
        column = AttributeColumn(name=spec.name, level=spec.level, kind=spec.kind)
        source = spec.source

        if isinstance(source, BuiltinSource):
            for sample_id, tree in trees:
                if spec.level is AttributeLevel.SAMPLE:
                    value = builtin_attribute(tree, source.builtin, self.tokenizer, key_types)
                    self._append(column, Provenance(sample_id=sample_id), value)
                    continue
                for index, node in enumerate(collect_nodes(tree, key_types)):
                    value = builtin_attribute(node, source.builtin, self.tokenizer, key_types)
                    self._append(column, Provenance(sample_id=sample_id, node_index=index), value)
            return column

        if isinstance(source, SidecarSourceSpec):
            path = source.sidecar.path_for(corpus.role)
            mapping: Dict[str, AttributeValue] = {}
            if path is None:
                logger.warning(
                    f"Attribute '{spec.name}' has no sidecar file"
                    f" for the {corpus.role.value} corpus"
                )
            elif self.repository is not None:
                cache_key = (path, source.sidecar.key, spec.kind)
                if cache_key not in labels:
                    labels[cache_key] = self.repository.load_sidecar_labels(path, spec)
                mapping = labels[cache_key]
            for sample_id, tree in trees:
                if spec.level is AttributeLevel.SAMPLE:
                    self._append(column, Provenance(sample_id=sample_id), mapping.get(sample_id))
                    continue
                for index, _ in enumerate(collect_nodes(tree, key_types)):
                    value = mapping.get(node_label_id(sample_id, index))
                    self._append(column, Provenance(sample_id=sample_id, node_index=index), value)
            return column

        assert isinstance(source, RegexCaptureSourceSpec)
        capture = source.regex_capture
        pattern = re.compile(capture.pattern)
        node_type = capture.node_type.lower()
        for sample_id, tree in trees:
            nodes = collect_nodes(tree, {node_type})
            if spec.level is AttributeLevel.SAMPLE:
                nodes = nodes[:1]
                if not nodes:
                    column.missing.append(Provenance(sample_id=sample_id))
            for index, node in enumerate(nodes):
                match = pattern.search(node.text)
                value: Optional[str] = None
                if match is not None:
                    value = match.group(1) if match.groups() else match.group(0)
                provenance = Provenance(
                    sample_id=sample_id,
                    node_index=None if spec.level is AttributeLevel.SAMPLE else index,
                )
                self._append(column, provenance, self._coerce(spec, sample_id, value))
        return column

    @staticmethod
    def _coerce(
        spec: AttributeSpec, sample_id: str, value: Optional[str]
    ) -> Optional[AttributeValue]:
        if value is None or spec.kind is AttributeKind.CATEGORICAL:
            return value
        try:
            return float(value)
        except ValueError:
            logger.warning(
                f"Attribute '{spec.name}' of sample {sample_id}: capture '{value}' is not numeric"
            )
            return None

    @staticmethod
    def _append(
        column: AttributeColumn, provenance: Provenance, value: Optional[AttributeValue]
    ) -> None:
        if value is None:
            column.missing.append(provenance)
            return
        if column.kind is AttributeKind.NUMERIC:
            if isinstance(value, str) or not math.isfinite(value):
                column.missing.append(provenance)
                return
            value = float(value)
        else:
            value = str(value)
        column.values.append(value)
        column.provenance.append(provenance)
