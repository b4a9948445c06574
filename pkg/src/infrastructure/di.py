"""Dependency Injection for hexagonal architecture with singleton pattern."""

import logging
from typing import Dict, Optional, Tuple

from application.services.corpus_materializer import CorpusMaterializer
from application.services.dp_generator import DpGenerator
from application.services.embedding_service import EmbeddingService
from application.usecases.evaluation_service import EvaluationService
from domain.entities.distribution import EmbeddingConfig, EmbeddingProvider
from domain.entities.grammar import Grammar
from domain.ports.corpus_repository_port import CorpusRepositoryPort
from domain.ports.embedding_cache_port import EmbeddingCachePort
from domain.ports.embedding_port import EmbeddingPort
from domain.ports.tokenizer_port import TokenizerPort
from infrastructure.adapters.embeddings.embedding_cache import JsonlEmbeddingCache
from infrastructure.adapters.embeddings.hash_embedder import HashEmbeddingAdapter
from infrastructure.adapters.embeddings.remote_embedder import RemoteEmbeddingAdapter
from infrastructure.adapters.storage.corpus_repository import FileCorpusRepository
from infrastructure.adapters.tokenizers.whitespace_tokenizer import WhitespaceTokenizer
from infrastructure.config import settings

logger = logging.getLogger(__name__)


def _batch_size(config: EmbeddingConfig) -> int:
    # A batch size set in the config wins over STRUCTEVAL_EMBED_BATCH_SIZE.
    if "batch_size" in config.model_fields_set:
        return config.batch_size
    return settings.embed_batch_size


class DependencyContainer:
    """Singleton dependency container for managing all service instances."""

    _instance = None
    _initialized = False

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if not self._initialized:
            self._tokenizer = None
            self._repository = None
            self._embedders: Dict[Tuple, EmbeddingPort] = {}
            self._jobs: Optional[int] = None
            self._initialized = True

    def configure(self, jobs: Optional[int] = None) -> None:
        """Override runtime settings before services are built."""
        if jobs is not None:
            self._jobs = jobs

    @property
    def jobs(self) -> int:
        return self._jobs if self._jobs is not None else settings.jobs

    def get_tokenizer(self) -> TokenizerPort:
        if self._tokenizer is None:
            self._tokenizer = WhitespaceTokenizer()
        return self._tokenizer

    def get_repository(self) -> CorpusRepositoryPort:
        if self._repository is None:
            self._repository = FileCorpusRepository()
        return self._repository

    def get_embedder(self, config: EmbeddingConfig) -> EmbeddingPort:
        """Get the embedder for ``config``; one instance per provider, model and dimension."""
        key = (config.provider, config.endpoint, config.model, config.dimension)
        if key not in self._embedders:
            if config.provider is EmbeddingProvider.REMOTE:
                logger.debug(f"Remote embedder initialized: {config.endpoint} {config.model}")
                self._embedders[key] = RemoteEmbeddingAdapter(
                    endpoint=config.endpoint,
                    model=config.model,
                    dimension=config.dimension,
                    token=settings.embed_token,
                    max_retries=settings.embed_max_retries,
                    batch_size=_batch_size(config),
                )
            else:
                self._embedders[key] = HashEmbeddingAdapter(
                    dimension=config.dimension, tokenizer=self.get_tokenizer()
                )
        return self._embedders[key]

    def get_embedding_cache(self, config: EmbeddingConfig) -> EmbeddingCachePort:
        embedder = self.get_embedder(config)
        return JsonlEmbeddingCache(
            cache_dir=config.cache_dir or settings.cache_dir,
            provider=embedder.provider,
            model=embedder.model,
            dimension=embedder.dimension,
        )

    def get_embedding_service(self, config: EmbeddingConfig) -> EmbeddingService:
        return EmbeddingService(
            embedder=self.get_embedder(config),
            cache=self.get_embedding_cache(config),
            batch_size=_batch_size(config),
        )

    def get_materializer(self) -> CorpusMaterializer:
        return CorpusMaterializer(
            tokenizer=self.get_tokenizer(),
            repository=self.get_repository(),
            jobs=self.jobs,
            parallel_threshold=settings.parallel_threshold,
        )

    def get_evaluation_service(self, config: EmbeddingConfig) -> EvaluationService:
        return EvaluationService(
            materializer=self.get_materializer(),
            embedding_service=self.get_embedding_service(config),
            tokenizer=self.get_tokenizer(),
            repository=self.get_repository(),
        )

    def get_generator(self, grammar: Grammar) -> DpGenerator:
        return DpGenerator(grammar=grammar, tokenizer=self.get_tokenizer())


# Global singleton instance
_container = DependencyContainer()


# Public API functions
def configure(jobs: Optional[int] = None) -> None:
    _container.configure(jobs=jobs)


def get_repository() -> CorpusRepositoryPort:
    return _container.get_repository()


def get_materializer() -> CorpusMaterializer:
    return _container.get_materializer()


def get_evaluation_service(config: EmbeddingConfig) -> EvaluationService:
    """Get an evaluation service wired to the embedder described by ``config``."""
    return _container.get_evaluation_service(config)


def get_generator(grammar: Grammar) -> DpGenerator:
    return _container.get_generator(grammar)
