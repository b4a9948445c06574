"""Embedding Port for hexagonal architecture."""

from abc import ABC, abstractmethod
from typing import List


class EmbeddingPort(ABC):
    """Abstract base class for embedding providers."""

    @property
    @abstractmethod
    def provider(self) -> str:
        """Provider identifier recorded in cache keys and report metadata."""
        pass

    @property
    @abstractmethod
    def model(self) -> str:
        pass

    @property
    @abstractmethod
    def dimension(self) -> int:
        pass

    @abstractmethod
    async def embed_documents(self, texts: List[str]) -> List[List[float]]:
        """Embed a batch of texts.

        Args:
            texts: Texts to embed, in order

        Returns:
            One vector of length ``dimension`` per input text

        Raises:
            RemoteEmbeddingError: the provider failed after its retries
            DimensionMismatch: a returned vector has the wrong length
        """
        pass
