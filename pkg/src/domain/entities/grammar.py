"""Grammar entities: terminals, rules and the desugared grammar."""

import re
from enum import Enum
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


class TerminalKind(str, Enum):
    LITERAL = "literal"
    REGEX = "regex"


class SymbolKind(str, Enum):
    NONTERMINAL = "nonterminal"
    TERMINAL = "terminal"


@lru_cache(maxsize=None)
def compile_pattern(source: str, flags: int = 0) -> "re.Pattern[str]":
    """Compile a regex terminal once per process."""
    return re.compile(source, flags)


class Terminal(BaseModel):
    """A literal string or regex matched directly against the input characters."""

    model_config = ConfigDict(frozen=True)

    name: str
    kind: TerminalKind
    pattern: str
    flags: int = 0
    # Anonymous literals are written inline in rule bodies and carry no node type.
    anonymous: bool = False

    def match_at(self, text: str, pos: int) -> Optional[int]:
        """Return the end offset of the single match at ``pos``, or None.

        Literals match by prefix comparison. Regexes are anchored at ``pos`` and
        take the one match produced by leftmost semantics; lookahead still sees the
        rest of the input.
        """
        if self.kind is TerminalKind.LITERAL:
            if text.startswith(self.pattern, pos):
                return pos + len(self.pattern)
            return None
        match = compile_pattern(self.pattern, self.flags).match(text, pos)
        if match is None:
            return None
        return match.end()


class SymbolRef(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    kind: SymbolKind

    @property
    def is_terminal(self) -> bool:
        return self.kind is SymbolKind.TERMINAL


Alternative = Tuple[SymbolRef, ...]


class Rule(BaseModel):
    """A nonterminal with its ordered alternatives; an empty tuple is epsilon."""

    model_config = ConfigDict(frozen=True)

    head: str
    alternatives: Tuple[Alternative, ...]
    auxiliary: bool = False


class GrammarSummary(BaseModel):
    rules: int
    auxiliary_rules: int
    literal_terminals: int
    regex_terminals: int


class Grammar(BaseModel):
    """Validated, desugared context-free grammar. Immutable after load."""

    model_config = ConfigDict(frozen=True)

    rules: Tuple[Rule, ...]
    start_symbol: str
    terminal_table: Tuple[Terminal, ...] = Field(default_factory=tuple)

    @cached_property
    def rules_by_head(self) -> Dict[str, Rule]:
        return {rule.head: rule for rule in self.rules}

    @cached_property
    def terminals_by_name(self) -> Dict[str, Terminal]:
        return {terminal.name: terminal for terminal in self.terminal_table}

    @cached_property
    def auxiliary_heads(self) -> FrozenSet[str]:
        return frozenset(rule.head for rule in self.rules if rule.auxiliary)

    @cached_property
    def node_types(self) -> FrozenSet[str]:
        """Names that can appear as typed nodes: user rules and named terminals."""
        heads = {rule.head for rule in self.rules if not rule.auxiliary}
        named = {t.name for t in self.terminal_table if not t.anonymous}
        return frozenset(heads | named)

    @cached_property
    def nullable(self) -> FrozenSet[str]:
        """Nonterminals that derive the empty string by grammar structure alone."""
        nullable: set = set()
        changed = True
        while changed:
            changed = False
            for rule in self.rules:
                if rule.head in nullable:
                    continue
                for alternative in rule.alternatives:
                    if all(
                        not sym.is_terminal and sym.name in nullable
                        for sym in alternative
                    ):
                        nullable.add(rule.head)
                        changed = True
                        break
        return frozenset(nullable)

    @property
    def has_only_literal_terminals(self) -> bool:
        return all(t.kind is TerminalKind.LITERAL for t in self.terminal_table)

    def rule(self, head: str) -> Rule:
        return self.rules_by_head[head]

    def terminal(self, name: str) -> Terminal:
        return self.terminals_by_name[name]

    def regex_terminals(self) -> List[Terminal]:
        return [t for t in self.terminal_table if t.kind is TerminalKind.REGEX]

    def summary(self) -> GrammarSummary:
        return GrammarSummary(
            rules=len(self.rules),
            auxiliary_rules=len(self.auxiliary_heads),
            literal_terminals=sum(
                1 for t in self.terminal_table if t.kind is TerminalKind.LITERAL
            ),
            regex_terminals=len(self.regex_terminals()),
        )
