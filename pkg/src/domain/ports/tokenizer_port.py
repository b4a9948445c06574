"""Tokenizer Port for hexagonal architecture."""

from abc import ABC, abstractmethod
from typing import List


class TokenizerPort(ABC):
    """Splits text into tokens for length attributes, TTR and the generator."""

    @abstractmethod
    def tokenize(self, text: str) -> List[str]:
        pass

    def count(self, text: str) -> int:
        return len(self.tokenize(text))
