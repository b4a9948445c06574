"""Embedding Service: provider calls behind a content-addressed cache."""

import asyncio
import hashlib
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from domain.entities.distribution import EmbeddingMatrix
from domain.errors import DimensionMismatch, EmbeddingError
from domain.ports.embedding_cache_port import EmbeddingCachePort
from domain.ports.embedding_port import EmbeddingPort

logger = logging.getLogger(__name__)


def content_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def cosine_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine similarity in [-1, 1]; 0 when either vector is zero."""
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(a.size, b.size)
    norms = float(np.dot(a, a)) * float(np.dot(b, b))
    if norms == 0.0:
        return 0.0
    similarity = float(np.dot(a, b)) / math.sqrt(norms)
    return min(1.0, max(-1.0, similarity))


class EmbeddingService:
    """Embeds texts through an EmbeddingPort, consulting the cache first."""

    def __init__(
        self,
        embedder: EmbeddingPort,
        cache: Optional[EmbeddingCachePort] = None,
        batch_size: int = 64,
    ):
        self.embedder = embedder
        self.cache = cache
        self.batch_size = max(1, batch_size)
        self._write_lock = asyncio.Lock()

    @property
    def metadata(self) -> Dict[str, object]:
        return {
            "provider": self.embedder.provider,
            "model": self.embedder.model,
            "dimension": self.embedder.dimension,
        }

    async def embed_texts(self, texts: Sequence[str]) -> EmbeddingMatrix:
        """Embed ``texts`` in order; rows are keyed by content digest.

        Args:
            texts: Non-empty list of texts

        Returns:
            EmbeddingMatrix with one row per input text

        Raises:
            DimensionMismatch: provider returned a vector of the wrong size
        """
        if not texts:
            raise ValueError("embed_texts needs at least one text")
        digests = [content_digest(text) for text in texts]

        # First occurrence of each distinct text.
        unique: Dict[str, str] = {}
        for digest, text in zip(digests, texts):
            unique.setdefault(digest, text)

        vectors: Dict[str, List[float]] = {}
        if self.cache is not None:
            vectors.update(self.cache.lookup(unique.keys()))
        pending = [digest for digest in unique if digest not in vectors]
        logger.debug(
            f"Embedding {len(texts)} texts: {len(unique)} distinct, "
            f"{len(unique) - len(pending)} cached"
        )

        if pending:
            batches = [
                pending[i : i + self.batch_size]
                for i in range(0, len(pending), self.batch_size)
            ]
            results = await asyncio.gather(
                *(self.embedder.embed_documents([unique[d] for d in batch]) for batch in batches)
            )
            fresh: Dict[str, List[float]] = {}
            for batch, rows in zip(batches, results):
                if len(rows) != len(batch):
                    raise EmbeddingError(
                        f"provider returned {len(rows)} vectors for {len(batch)} texts"
                    )
                for digest, row in zip(batch, rows):
                    if len(row) != self.embedder.dimension:
                        raise DimensionMismatch(self.embedder.dimension, len(row))
                    fresh[digest] = [float(x) for x in row]
            vectors.update(fresh)
            if self.cache is not None:
                async with self._write_lock:
                    self.cache.store(fresh)

        return EmbeddingMatrix.from_rows(
            digests, [vectors[digest] for digest in digests], self.embedder.dimension
        )
