"""Feature-hashing Embedding Adapter for hexagonal architecture."""

import hashlib
from typing import List

import numpy as np

from domain.ports.embedding_port import EmbeddingPort
from domain.ports.tokenizer_port import TokenizerPort


class HashEmbeddingAdapter(EmbeddingPort):
    """Deterministic offline embedder: signed token hashing, then L2 normalization.

    Each token hashes to a bucket in ``[0, dimension)`` and a sign; bucket counts
    are exact small integers, so the vector depends only on the token multiset.
    """

    def __init__(self, dimension: int, tokenizer: TokenizerPort):
        self._dimension = dimension
        self.tokenizer = tokenizer

    @property
    def provider(self) -> str:
        return "hash"

    @property
    def model(self) -> str:
        return "feature-hash"

    @property
    def dimension(self) -> int:
        return self._dimension

    def _bucket(self, token: str) -> tuple:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        value = int.from_bytes(digest, "big")
        sign = 1.0 if value >> 63 == 0 else -1.0
        return value % self._dimension, sign

    def embed_one(self, text: str) -> List[float]:
        vector = np.zeros(self._dimension, dtype=np.float64)
        for token in self.tokenizer.tokenize(text):
            index, sign = self._bucket(token)
            vector[index] += sign
        norm = np.linalg.norm(vector)
        if norm > 0:
            vector /= norm
        return vector.tolist()

    async def embed_documents(self, texts: List[str]) -> List[List[float]]:
        return [self.embed_one(text) for text in texts]
