"""Shared fixtures: the ShareGPT fixture set, tokenizers and fake embedders."""

from pathlib import Path
from typing import Dict, List

import pytest

from domain.entities.corpus import Corpus, CorpusRole, Sample
from domain.entities.grammar import Grammar
from domain.parsers.grammar_loader import load_grammar_file
from domain.ports.embedding_port import EmbeddingPort
from infrastructure.adapters.tokenizers.whitespace_tokenizer import WhitespaceTokenizer

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures" / "sharegpt"


class NumberEmbedder(EmbeddingPort):
    """Embeds a numeric text ``"x"`` as ``[x, 0]`` so distances are hand-checkable."""

    def __init__(self):
        self.calls: List[List[str]] = []

    @property
    def provider(self) -> str:
        return "test"

    @property
    def model(self) -> str:
        return "number"

    @property
    def dimension(self) -> int:
        return 2

    async def embed_documents(self, texts: List[str]) -> List[List[float]]:
        self.calls.append(list(texts))
        return [[float(text), 0.0] for text in texts]


class TableEmbedder(EmbeddingPort):
    """Looks texts up in a fixed table; unknown texts embed to the zero vector."""

    def __init__(self, table: Dict[str, List[float]], dimension: int = 2):
        self.table = table
        self._dimension = dimension

    @property
    def provider(self) -> str:
        return "test"

    @property
    def model(self) -> str:
        return "table"

    @property
    def dimension(self) -> int:
        return self._dimension

    async def embed_documents(self, texts: List[str]) -> List[List[float]]:
        return [list(self.table.get(text, [0.0] * self._dimension)) for text in texts]


def make_corpus(texts: List[str], role: CorpusRole = CorpusRole.REAL, prefix: str = "") -> Corpus:
    return Corpus(
        samples=tuple(Sample(id=f"{prefix}{i}", text=text) for i, text in enumerate(texts)),
        role=role,
    )


def conversation(*rounds: str) -> str:
    """Build a ShareGPT sample from alternating query/response texts."""
    parts = []
    for index, text in enumerate(rounds):
        parts.append(("HUMAN: " if index % 2 == 0 else "GPT: ") + text)
    return "".join(parts)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def sharegpt_grammar() -> Grammar:
    return load_grammar_file(FIXTURES / "sharegpt.cfg")


@pytest.fixture
def tokenizer() -> WhitespaceTokenizer:
    return WhitespaceTokenizer()


@pytest.fixture
def number_embedder() -> NumberEmbedder:
    return NumberEmbedder()
