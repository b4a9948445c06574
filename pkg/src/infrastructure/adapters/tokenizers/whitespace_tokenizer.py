"""Whitespace Tokenizer Adapter for hexagonal architecture."""

from typing import List

from domain.ports.tokenizer_port import TokenizerPort


class WhitespaceTokenizer(TokenizerPort):
    """Tokens are maximal runs of non-whitespace characters."""

    def tokenize(self, text: str) -> List[str]:
        return text.split()
