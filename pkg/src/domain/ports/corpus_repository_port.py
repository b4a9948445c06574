"""Corpus Repository Port for hexagonal architecture."""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Tuple, Union

from domain.entities.corpus import AttributeSpec, AttributeValue, Corpus, CorpusRole

PathLike = Union[str, Path]


class CorpusRepositoryPort(ABC):
    """Abstract base class for corpus and label storage."""

    @abstractmethod
    def load_corpus(
        self, path: PathLike, format: str = "jsonl", role: CorpusRole = CorpusRole.REAL
    ) -> Corpus:
        """Read a corpus file.

        Args:
            path: Corpus file
            format: ``jsonl`` (records with ``text`` and optional ``id``) or ``lines``
            role: Role recorded on the returned corpus

        Returns:
            Corpus with samples in file order
        """
        pass

    @abstractmethod
    def write_corpus(self, corpus: Corpus, path: PathLike) -> None:
        pass

    @abstractmethod
    def load_sidecar_labels(
        self, path: PathLike, spec: AttributeSpec
    ) -> Dict[str, AttributeValue]:
        """Read ``{id, <key>}`` records, type-checked against ``spec.kind``."""
        pass

    @abstractmethod
    def export_tstr_split(
        self,
        corpus: Corpus,
        labels: Dict[str, AttributeValue],
        test_fraction: float,
        seed: int,
        out_dir: PathLike,
    ) -> Tuple[Path, Path]:
        """Write seeded train/test JSONL files of ``{id, text, label}``.

        Returns:
            Paths of the train and test files
        """
        pass

    @abstractmethod
    def load_pair_scores(self, path: PathLike) -> Dict[Tuple[str, int, str], float]:
        """Read external dependency scores ``{id, pair, score, pattern?}``.

        Returns:
            Map of (sample id, pair index, pattern label or ``""``) to score
        """
        pass
