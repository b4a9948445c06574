"""Scannerless Earley parser with literal and regex terminals.

Recognition runs over characters. Each (terminal, position) has at most one
match: literals by prefix comparison, regexes by an anchored ``match`` with
ordinary leftmost semantics. After recognition a single tree is extracted,
preferring earlier alternatives and shorter spans for earlier symbols.
"""

import heapq
import logging
from collections import defaultdict
from typing import Any, DefaultDict, Dict, Generator, List, Optional, Set, Tuple, Union

from domain.entities.grammar import Grammar, SymbolRef, TerminalKind
from domain.entities.parse_tree import ParseNode, ParseOutcome, StarExpansion

logger = logging.getLogger(__name__)

Item = Tuple[int, int, int]  # (production, dot, origin)
_Build = Generator[Any, Any, Any]


class _Production:
    __slots__ = ("head", "alternative", "symbols", "auxiliary")

    def __init__(
        self, head: str, alternative: int, symbols: Tuple[SymbolRef, ...], auxiliary: bool
    ):
        self.head = head
        self.alternative = alternative
        self.symbols = symbols
        self.auxiliary = auxiliary


class SplicedChildren:
    """Children of an auxiliary node, to be inlined into the parent."""

    __slots__ = ("children", "repetitions")

    def __init__(self, children: List[ParseNode], repetitions: List[StarExpansion]):
        self.children = children
        self.repetitions = repetitions


class _Continue:
    """Marker for the trailing self-reference of a star alternative."""

    __slots__ = ("start",)

    def __init__(self, start: int):
        self.start = start


def make_leaf(grammar: Grammar, name: str, start: int, end: int, text: str) -> ParseNode:
    terminal = grammar.terminal(name)
    return ParseNode(
        node_type=name,
        span=(start, end),
        text=text[start:end],
        terminal=True,
        literal=terminal.kind is TerminalKind.LITERAL,
        anonymous=terminal.anonymous,
    )


def make_node(
    head: str,
    alternative: int,
    start: int,
    end: int,
    text: str,
    parts: List[Union[ParseNode, SplicedChildren]],
) -> ParseNode:
    """Assemble a rule node, inlining any auxiliary children."""
    children: List[ParseNode] = []
    repetitions: List[StarExpansion] = []
    for part in parts:
        if isinstance(part, SplicedChildren):
            children.extend(part.children)
            repetitions.extend(part.repetitions)
        else:
            children.append(part)
    return ParseNode(
        node_type=head,
        span=(start, end),
        text=text[start:end],
        children=tuple(children),
        alternative=alternative,
        repetitions=tuple(repetitions),
    )


class EarleyParser:
    """Parser bound to one grammar; parse() is pure and reentrant."""

    def __init__(self, grammar: Grammar):
        self.grammar = grammar
        self.productions: List[_Production] = []
        self.by_head: Dict[str, List[int]] = {}
        for rule in grammar.rules:
            indices = []
            for alt_index, symbols in enumerate(rule.alternatives):
                indices.append(len(self.productions))
                self.productions.append(
                    _Production(rule.head, alt_index, symbols, rule.auxiliary)
                )
            self.by_head[rule.head] = indices

    def parse(self, text: str) -> ParseOutcome:
        run = _EarleyRun(self, text)
        if not run.recognize():
            return ParseOutcome.failure(run.furthest)
        tree = run.extract_tree()
        if tree is None:
            # Recognized but no acyclic derivation could be assembled.
            logger.warning("Earley chart accepted input but tree extraction failed")
            return ParseOutcome.failure(run.furthest)
        return ParseOutcome.success(tree)


class _EarleyRun:
    """Chart state for a single input."""

    def __init__(self, parser: EarleyParser, text: str):
        self.parser = parser
        self.grammar = parser.grammar
        self.productions = parser.productions
        self.text = text
        self.n = len(text)
        self.chart: Dict[int, List[Item]] = {}
        self.seen: Dict[int, Set[Item]] = {}
        self.pending: List[int] = []
        self.done: Set[Tuple[str, int, int]] = set()
        self.ends: DefaultDict[Tuple[str, int], Set[int]] = defaultdict(set)
        self.match_cache: Dict[Tuple[str, int], Optional[int]] = {}
        self.feasible_cache: Dict[Tuple[int, int, int, int], bool] = {}
        self.furthest = 0

    # Recognition

    def _add(self, pos: int, item: Item) -> None:
        seen = self.seen.get(pos)
        if seen is None:
            seen = self.seen[pos] = set()
            self.chart[pos] = []
            heapq.heappush(self.pending, pos)
        if item not in seen:
            seen.add(item)
            self.chart[pos].append(item)
            if pos > self.furthest:
                self.furthest = pos

    def match(self, name: str, pos: int) -> Optional[int]:
        key = (name, pos)
        if key not in self.match_cache:
            self.match_cache[key] = self.grammar.terminal(name).match_at(self.text, pos)
        return self.match_cache[key]

    def recognize(self) -> bool:
        start = self.grammar.start_symbol
        for index in self.parser.by_head[start]:
            self._add(0, (index, 0, 0))

        waiting: DefaultDict[int, DefaultDict[str, List[Item]]] = defaultdict(
            lambda: defaultdict(list)
        )
        empty_done: DefaultDict[int, Set[str]] = defaultdict(set)

        while self.pending:
            k = heapq.heappop(self.pending)
            items = self.chart[k]
            i = 0
            while i < len(items):
                item = items[i]
                i += 1
                prod_index, dot, origin = item
                production = self.productions[prod_index]
                symbols = production.symbols

                if dot == len(symbols):
                    head = production.head
                    self.done.add((head, origin, k))
                    self.ends[(head, origin)].add(k)
                    if origin == k:
                        empty_done[k].add(head)
                    for w_prod, w_dot, w_origin in list(waiting[origin].get(head, ())):
                        self._add(k, (w_prod, w_dot + 1, w_origin))
                    continue

                symbol = symbols[dot]
                if symbol.is_terminal:
                    end = self.match(symbol.name, k)
                    if end is not None:
                        self._add(end, (prod_index, dot + 1, origin))
                    continue

                waiting[k][symbol.name].append(item)
                if symbol.name in empty_done[k]:
                    self._add(k, (prod_index, dot + 1, origin))
                for predicted in self.parser.by_head[symbol.name]:
                    self._add(k, (predicted, 0, k))

        return (start, 0, self.n) in self.done

    # Tree extraction

    def _feasible(self, prod_index: int, dot: int, k: int, j: int) -> bool:
        """Can symbols[dot:] of a production span text[k:j] per the chart?"""
        key = (prod_index, dot, k, j)
        cached = self.feasible_cache.get(key)
        if cached is not None:
            return cached
        symbols = self.productions[prod_index].symbols
        result = False
        if dot == len(symbols):
            result = k == j
        else:
            symbol = symbols[dot]
            if symbol.is_terminal:
                end = self.match(symbol.name, k)
                result = (
                    end is not None and end <= j and self._feasible(prod_index, dot + 1, end, j)
                )
            elif dot == len(symbols) - 1:
                result = (symbol.name, k, j) in self.done
            else:
                for end in sorted(self.ends.get((symbol.name, k), ())):
                    if end <= j and self._feasible(prod_index, dot + 1, end, j):
                        result = True
                        break
        self.feasible_cache[key] = result
        return result

    def extract_tree(self) -> Optional[ParseNode]:
        node = _trampoline(self._build_rule(self.grammar.start_symbol, 0, self.n, frozenset()))
        if isinstance(node, ParseNode):
            return node
        return None

    # The builders below are generators: a nested build is requested with
    # ``yield`` and its result is sent back in by ``_trampoline``, so tree
    # depth never grows the interpreter stack.

    def _build_rule(self, head: str, i: int, j: int, active: frozenset) -> _Build:
        if head in self.grammar.auxiliary_heads:
            return (yield self._build_star(head, i, j, active))
        # Only ancestors over the same span can close a cycle.
        active = frozenset(key for key in active if key[1] == i and key[2] == j)
        active = active | {(head, i, j)}
        for prod_index in self.parser.by_head[head]:
            if not self._feasible(prod_index, 0, i, j):
                continue
            parts = yield self._build_sequence(prod_index, 0, i, j, active, None)
            if parts is not None:
                alternative = self.productions[prod_index].alternative
                return make_node(head, alternative, i, j, self.text, parts)
        return None

    def _build_star(self, head: str, i: int, j: int, active: frozenset) -> _Build:
        """Unroll a right-recursive star rule over text[i:j] one repetition at a time."""
        children: List[ParseNode] = []
        repetitions: List[StarExpansion] = []
        choices: List[int] = []
        k = i
        while k < j:
            advanced = False
            for prod_index in self.parser.by_head[head]:
                production = self.productions[prod_index]
                if not production.symbols or not self._feasible(prod_index, 0, k, j):
                    continue
                parts = yield self._build_sequence(prod_index, 0, k, j, active, head)
                if parts is None:
                    continue
                marker = parts[-1]
                if not isinstance(marker, _Continue) or marker.start <= k:
                    continue
                for part in parts[:-1]:
                    if isinstance(part, SplicedChildren):
                        children.extend(part.children)
                        repetitions.extend(part.repetitions)
                    else:
                        children.append(part)
                # Alternative 0 is epsilon; branches are numbered from there.
                choices.append(production.alternative - 1)
                k = marker.start
                advanced = True
                break
            if not advanced:
                return None
        expansion = StarExpansion(rule=head, choices=tuple(choices))
        return SplicedChildren(children, [expansion] + repetitions)

    def _build_sequence(
        self,
        prod_index: int,
        dot: int,
        k: int,
        j: int,
        active: frozenset,
        star_head: Optional[str],
    ) -> _Build:
        symbols = self.productions[prod_index].symbols
        if dot == len(symbols):
            return [] if k == j else None
        symbol = symbols[dot]

        if symbol.is_terminal:
            end = self.match(symbol.name, k)
            if end is None or end > j:
                return None
            rest = yield self._build_sequence(prod_index, dot + 1, end, j, active, star_head)
            if rest is None:
                return None
            return [make_leaf(self.grammar, symbol.name, k, end, self.text)] + rest

        if star_head is not None and symbol.name == star_head and dot == len(symbols) - 1:
            if (symbol.name, k, j) in self.done:
                return [_Continue(k)]
            return None

        for end in sorted(self.ends.get((symbol.name, k), ())):
            if end > j or (symbol.name, k, end) in active:
                continue
            if not self._feasible(prod_index, dot + 1, end, j):
                continue
            child = yield self._build_rule(symbol.name, k, end, active)
            if child is None:
                continue
            rest = yield self._build_sequence(prod_index, dot + 1, end, j, active, star_head)
            if rest is not None:
                return [child] + rest
        return None


def _trampoline(build: _Build) -> Any:
    """Drive nested builder generators with an explicit stack."""
    stack = [build]
    value: Any = None
    while stack:
        try:
            request = stack[-1].send(value)
        except StopIteration as stop:
            stack.pop()
            value = stop.value
            continue
        stack.append(request)
        value = None
    return value


def parse(grammar: Grammar, text: str) -> ParseOutcome:
    """Parse one sample. Pure: the same inputs always give the same tree."""
    return EarleyParser(grammar).parse(text)
