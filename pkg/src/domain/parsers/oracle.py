"""Exhaustive derivation oracle for literal-only grammars.

Used by the test suite to validate the Earley parser. Every derivation of
each (symbol, span) is enumerated top-down over exact spans; a derivation
that revisits the same (symbol, span) on one root path is cut, since it can
always be shortened.
"""

from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from domain.entities.grammar import Grammar, SymbolRef
from domain.entities.parse_tree import ParseNode, ParseOutcome, StarExpansion
from domain.errors import DepthExceeded
from domain.parsers.earley import SplicedChildren, make_leaf, make_node

MAX_ORACLE_INPUT = 16

Key = Tuple[str, int, int]
Derived = Optional[Union[ParseNode, SplicedChildren]]

# Stands for a depth cut; never on a path, so such failures are never reused.
_DEPTH_CUT: Key = ("", -1, -1)
_NO_CUTS: FrozenSet[Key] = frozenset()


class _OracleRun:
    def __init__(self, grammar: Grammar, text: str, max_depth: int):
        self.grammar = grammar
        self.text = text
        self.max_depth = max_depth
        self.truncated = False
        self.successes: Dict[Key, Union[ParseNode, SplicedChildren]] = {}
        # A failure holds while every path key it was cut at is still on the path.
        self.failures: Dict[Key, FrozenSet[Key]] = {}

    def derive(
        self, name: str, i: int, j: int, depth: int, path: FrozenSet[Key]
    ) -> Tuple[Derived, FrozenSet[Key]]:
        """Return (first derivation or None, path keys at which the search was cut)."""
        key = (name, i, j)
        if key in self.successes:
            return self.successes[key], _NO_CUTS
        cuts = self.failures.get(key)
        if cuts is not None and cuts <= path:
            return None, cuts
        if key in path:
            return None, frozenset({key})
        if depth > self.max_depth:
            self.truncated = True
            return None, frozenset({_DEPTH_CUT})
        rule = self.grammar.rule(name)
        path = path | {key}
        cut: FrozenSet[Key] = _NO_CUTS
        for alt_index, symbols in enumerate(rule.alternatives):
            parts, alt_cut = self.sequence(symbols, 0, i, j, depth, path)
            if parts is not None:
                if rule.auxiliary:
                    found = self._splice(name, alt_index, parts)
                else:
                    found = make_node(name, alt_index, i, j, self.text, parts)
                self.successes[key] = found
                return found, _NO_CUTS
            cut = cut | alt_cut
        # Cycles back to this key are cut on every future visit as well.
        cut = cut - {key}
        self.failures[key] = cut
        return None, cut

    def _splice(self, head: str, alt_index: int, parts: list) -> SplicedChildren:
        """Flatten the right-recursive star chain into one spliced expansion."""
        children: List[ParseNode] = []
        repetitions: List[StarExpansion] = []
        choices: List[int] = []
        if alt_index > 0:
            choices.append(alt_index - 1)
            *body, tail = parts
            for part in body:
                if isinstance(part, SplicedChildren):
                    children.extend(part.children)
                    repetitions.extend(part.repetitions)
                else:
                    children.append(part)
            # Tail is this same star rule: merge its choices into ours.
            children.extend(tail.children)
            own, *nested = tail.repetitions
            choices.extend(own.choices)
            repetitions.extend(nested)
        expansion = StarExpansion(rule=head, choices=tuple(choices))
        return SplicedChildren(children, [expansion] + repetitions)

    def sequence(
        self,
        symbols: Tuple[SymbolRef, ...],
        dot: int,
        k: int,
        j: int,
        depth: int,
        path: FrozenSet[Key],
    ) -> Tuple[Optional[list], FrozenSet[Key]]:
        if dot == len(symbols):
            return ([] if k == j else None), _NO_CUTS
        symbol = symbols[dot]
        if symbol.is_terminal:
            literal = self.grammar.terminal(symbol.name).pattern
            end = k + len(literal)
            if end > j or self.text[k:end] != literal:
                return None, _NO_CUTS
            rest, cut = self.sequence(symbols, dot + 1, end, j, depth, path)
            if rest is None:
                return None, cut
            return [make_leaf(self.grammar, symbol.name, k, end, self.text)] + rest, cut
        cut: FrozenSet[Key] = _NO_CUTS
        last = dot == len(symbols) - 1
        for end in ([j] if last else range(k, j + 1)):
            child, child_cut = self.derive(symbol.name, k, end, depth + 1, path)
            cut = cut | child_cut
            if child is None:
                continue
            rest, rest_cut = self.sequence(symbols, dot + 1, end, j, depth, path)
            cut = cut | rest_cut
            if rest is not None:
                return [child] + rest, cut
        return None, cut


def oracle_parse(grammar: Grammar, text: str, max_depth: int) -> ParseOutcome:
    """Decide membership by exhaustive enumeration of derivations.

    Args:
        grammar: Grammar with literal terminals only
        text: Input of at most 16 characters
        max_depth: Derivation tree depth at which enumeration gives up

    Returns:
        ParseOutcome with the first derivation found, if any

    Raises:
        DepthExceeded: enumeration hit max_depth without finding a derivation
    """
    if not grammar.has_only_literal_terminals:
        raise ValueError("oracle_parse supports literal terminals only")
    if len(text) > MAX_ORACLE_INPUT:
        raise ValueError(f"oracle_parse input longer than {MAX_ORACLE_INPUT}")

    run = _OracleRun(grammar, text, max_depth)
    tree, _ = run.derive(grammar.start_symbol, 0, len(text), 0, frozenset())
    if isinstance(tree, ParseNode):
        return ParseOutcome.success(tree)
    if run.truncated:
        raise DepthExceeded(max_depth)
    # Oracle has no chart; report the input length as the furthest offset.
    return ParseOutcome.failure(len(text))
