"""Remote Embedding Adapter for hexagonal architecture."""

import logging
from typing import List, Optional

from langchain.embeddings import init_embeddings

from domain.errors import DimensionMismatch, RemoteEmbeddingError
from domain.ports.embedding_port import EmbeddingPort

logger = logging.getLogger(__name__)


class RemoteEmbeddingAdapter(EmbeddingPort):
    """Embeddings from an OpenAI-compatible HTTP service.

    Requests are ``POST {"model", "input": [texts]}`` answered with
    ``{"data": [{"embedding": [...]}, ...]}``; retries with backoff are handled
    by the client up to ``max_retries``.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        dimension: int,
        token: Optional[str] = None,
        max_retries: int = 3,
        batch_size: int = 64,
    ):
        self.endpoint = endpoint
        self._model = model
        self._dimension = dimension
        self.embeddings = init_embeddings(
            f"openai:{model}",
            base_url=endpoint,
            # OpenAI-compatible local servers accept any key.
            api_key=token or "EMPTY",
            max_retries=max_retries,
            chunk_size=batch_size,
            check_embedding_ctx_length=False,
        )

    @property
    def provider(self) -> str:
        return "remote"

    @property
    def model(self) -> str:
        return self._model

    @property
    def dimension(self) -> int:
        return self._dimension

    async def embed_documents(self, texts: List[str]) -> List[List[float]]:
        try:
            vectors = await self.embeddings.aembed_documents(texts)
        except Exception as e:
            status = getattr(e, "status_code", None)
            logger.error(f"Embedding request to {self.endpoint} failed (status={status}): {e}")
            raise RemoteEmbeddingError(status, str(e)) from e
        for vector in vectors:
            if len(vector) != self._dimension:
                raise DimensionMismatch(self._dimension, len(vector))
        return vectors
