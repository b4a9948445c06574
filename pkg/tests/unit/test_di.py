from domain.entities.distribution import EmbeddingConfig
from infrastructure.config import settings
from infrastructure.di import DependencyContainer


def test_embedding_batch_size_defaults_to_settings(monkeypatch, tmp_path) -> None:
    monkeypatch.setattr(settings, "embed_batch_size", 5)
    monkeypatch.setattr(settings, "cache_dir", str(tmp_path))
    container = DependencyContainer()

    service = container.get_embedding_service(EmbeddingConfig(dimension=16))
    assert service.batch_size == 5

    explicit = container.get_embedding_service(EmbeddingConfig(dimension=16, batch_size=3))
    assert explicit.batch_size == 3


def test_container_is_a_singleton() -> None:
    assert DependencyContainer() is DependencyContainer()
    assert DependencyContainer().get_repository() is DependencyContainer().get_repository()
