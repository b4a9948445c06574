"""Embedding Cache Port for hexagonal architecture."""

from abc import ABC, abstractmethod
from typing import Dict, Iterable, List


class EmbeddingCachePort(ABC):
    """Persistent store of vectors keyed by content digest, for one provider and model."""

    @abstractmethod
    def lookup(self, digests: Iterable[str]) -> Dict[str, List[float]]:
        """Return the cached vectors for whichever digests are present."""
        pass

    @abstractmethod
    def store(self, entries: Dict[str, List[float]]) -> None:
        """Append new vectors. Callers serialize writes."""
        pass
