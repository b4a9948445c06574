"""Grammar-file loader.

The ``.cfg`` notation is parsed with a small lark meta-grammar and then
validated and desugared into a :class:`Grammar`:

- one rule per line, ``name: body``, alternatives separated by ``|``
- ``"literal"`` and ``/regex/flags`` terminals, ``%empty`` for epsilon
- ``( ... )*`` repetition, rewritten to right-recursive auxiliary rules
- ``//`` line comments
"""

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from domain.entities.grammar import (
    Grammar,
    Rule,
    SymbolKind,
    SymbolRef,
    Terminal,
    TerminalKind,
)
from domain.errors import BadRegex, GrammarSyntaxError, MissingFile, UnknownSymbol

logger = logging.getLogger(__name__)

CFG_META_GRAMMAR = r"""
start: (_NL | rule _NL)* rule?

rule: NAME ":" alternatives

alternatives: sequence ("|" sequence)*

sequence: item*

item: STRING                    -> literal
    | REGEXP                    -> regex
    | NAME                      -> ref
    | "(" alternatives ")" "*"  -> star
    | EMPTY                     -> empty

EMPTY: "%empty"
NAME: /[A-Za-z_][A-Za-z0-9_]*/
STRING: /"(?:[^"\\\n]|\\.)*"/
REGEXP: /\/(?:[^\/\\\n]|\\.)+\/[imsx]*/
COMMENT: /\/\/[^\n]*/
_NL: /(\r?\n[\t \f]*)+/
WS: /[\t \f]+/

%ignore WS
%ignore COMMENT
"""

REGEX_FLAGS = {"i": re.IGNORECASE, "m": re.MULTILINE, "s": re.DOTALL, "x": re.VERBOSE}


# Raw syntax produced by the transformer, before validation.


@dataclass
class _Literal:
    text: str
    line: int
    col: int


@dataclass
class _Regex:
    source: str
    flags: int


@dataclass
class _Ref:
    name: str
    line: int
    col: int


@dataclass
class _Star:
    alternatives: List[List["_Item"]]


@dataclass
class _Empty:
    line: int
    col: int


_Item = Union[_Literal, _Regex, _Ref, _Star, _Empty]


@dataclass
class _RawRule:
    name: str
    alternatives: List[List[_Item]]
    line: int
    col: int


@dataclass
class _BuildState:
    terminals: Dict[str, Terminal] = field(default_factory=dict)
    aux_rules: List[Rule] = field(default_factory=list)
    star_count: int = 0


class _CfgTransformer(Transformer):
    """Turns the lark tree of a ``.cfg`` file into raw rule records."""

    def start(self, items: List[_RawRule]) -> List[_RawRule]:
        return [item for item in items if isinstance(item, _RawRule)]

    def rule(self, items: list) -> _RawRule:
        name_token: Token = items[0]
        return _RawRule(
            name=str(name_token).lower(),
            alternatives=items[1],
            line=name_token.line,
            col=name_token.column,
        )

    def alternatives(self, items: list) -> List[List[_Item]]:
        return list(items)

    def sequence(self, items: list) -> List[_Item]:
        return list(items)

    @v_args(inline=True)
    def literal(self, token: Token) -> _Literal:
        text = json.loads(str(token))
        if not text:
            raise GrammarSyntaxError(token.line, token.column, "empty literal")
        return _Literal(text=text, line=token.line, col=token.column)

    @v_args(inline=True)
    def regex(self, token: Token) -> _Regex:
        raw = str(token)
        closing = raw.rindex("/")
        source = raw[1:closing].replace("\\/", "/")
        flags = 0
        for flag in raw[closing + 1 :]:
            flags |= REGEX_FLAGS[flag]
        return _Regex(source=source, flags=flags)

    @v_args(inline=True)
    def ref(self, token: Token) -> _Ref:
        return _Ref(name=str(token).lower(), line=token.line, col=token.column)

    @v_args(inline=True)
    def star(self, alternatives: List[List[_Item]]) -> _Star:
        return _Star(alternatives=alternatives)

    @v_args(inline=True)
    def empty(self, token: Token) -> _Empty:
        return _Empty(line=token.line, col=token.column)


_PARSER: Optional[Lark] = None


def _meta_parser() -> Lark:
    global _PARSER
    if _PARSER is None:
        _PARSER = Lark(CFG_META_GRAMMAR, parser="lalr", maybe_placeholders=False)
    return _PARSER


def _parse_raw(source: str) -> List[_RawRule]:
    try:
        tree = _meta_parser().parse(source)
    except UnexpectedInput as e:
        line = e.line if e.line > 0 else source.count("\n") + 1
        col = e.column if e.column > 0 else 1
        raise GrammarSyntaxError(line, col, type(e).__name__) from e
    try:
        return _CfgTransformer().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, GrammarSyntaxError):
            raise e.orig_exc from None
        raise


def _is_regex_only(rule: _RawRule) -> bool:
    return (
        len(rule.alternatives) == 1
        and len(rule.alternatives[0]) == 1
        and isinstance(rule.alternatives[0][0], _Regex)
    )


def _regex_terminal(name: str, item: _Regex, anonymous: bool) -> Terminal:
    try:
        re.compile(item.source, item.flags)
    except re.error as e:
        raise BadRegex(name, str(e)) from e
    return Terminal(
        name=name,
        kind=TerminalKind.REGEX,
        pattern=item.source,
        flags=item.flags,
        anonymous=anonymous,
    )


class _Desugarer:
    """Rewrites raw alternatives into symbol sequences, creating auxiliary rules."""

    def __init__(self, rule_names: set, terminal_names: set, state: _BuildState):
        self.rule_names = rule_names
        self.terminal_names = terminal_names
        self.state = state

    def alternative(self, items: List[_Item], rule: _RawRule) -> Tuple[SymbolRef, ...]:
        if not items:
            raise GrammarSyntaxError(
                rule.line, rule.col, f"empty alternative in rule '{rule.name}'"
            )
        empties = [item for item in items if isinstance(item, _Empty)]
        if empties:
            if len(items) > 1:
                raise GrammarSyntaxError(
                    empties[0].line, empties[0].col, "%empty must stand alone"
                )
            return ()
        return tuple(self.symbol(item, rule) for item in items)

    def symbol(self, item: _Item, rule: _RawRule) -> SymbolRef:
        if isinstance(item, _Literal):
            name = json.dumps(item.text, ensure_ascii=False)
            self.state.terminals.setdefault(
                name,
                Terminal(
                    name=name,
                    kind=TerminalKind.LITERAL,
                    pattern=item.text,
                    anonymous=True,
                ),
            )
            return SymbolRef(name=name, kind=SymbolKind.TERMINAL)
        if isinstance(item, _Regex):
            name = f"/{item.source}/{item.flags}"
            if name not in self.state.terminals:
                self.state.terminals[name] = _regex_terminal(name, item, anonymous=True)
            return SymbolRef(name=name, kind=SymbolKind.TERMINAL)
        if isinstance(item, _Ref):
            if item.name in self.rule_names:
                return SymbolRef(name=item.name, kind=SymbolKind.NONTERMINAL)
            if item.name in self.terminal_names:
                return SymbolRef(name=item.name, kind=SymbolKind.TERMINAL)
            raise UnknownSymbol(item.name)
        if isinstance(item, _Star):
            return self.star(item, rule)
        raise GrammarSyntaxError(rule.line, rule.col, "%empty must stand alone")

    def star(self, item: _Star, rule: _RawRule) -> SymbolRef:
        head = self._fresh_aux_name()
        self_ref = SymbolRef(name=head, kind=SymbolKind.NONTERMINAL)
        # Epsilon first: shorter expansions are preferred on ties.
        alternatives: List[Tuple[SymbolRef, ...]] = [()]
        for items in item.alternatives:
            body = self.alternative(items, rule)
            alternatives.append(body + (self_ref,))
        self.state.aux_rules.append(
            Rule(head=head, alternatives=tuple(alternatives), auxiliary=True)
        )
        return self_ref

    def _fresh_aux_name(self) -> str:
        while True:
            name = f"__star_{self.state.star_count}"
            self.state.star_count += 1
            if name not in self.rule_names and name not in self.terminal_names:
                self.rule_names.add(name)
                return name


def load_grammar(source: str) -> Grammar:
    """Parse grammar-file text into a validated, desugared Grammar.

    Args:
        source: Grammar file contents in the ``.cfg`` notation

    Returns:
        Grammar whose start symbol is the head of the first declared rule

    Raises:
        GrammarSyntaxError: malformed rule, with line and column
        UnknownSymbol: reference to an undefined rule or terminal
        BadRegex: regex terminal that does not compile
    """
    if not source.strip():
        raise GrammarSyntaxError(1, 1, "empty grammar")

    raw_rules = _parse_raw(source)
    if not raw_rules:
        raise GrammarSyntaxError(1, 1, "no rules")

    start_symbol = raw_rules[0].name
    state = _BuildState()

    # Merge repeated heads, keeping first-declaration order.
    merged: Dict[str, _RawRule] = {}
    for raw in raw_rules:
        if raw.name in merged:
            merged[raw.name].alternatives.extend(raw.alternatives)
        else:
            merged[raw.name] = _RawRule(raw.name, list(raw.alternatives), raw.line, raw.col)

    terminal_names = set()
    for name, raw in merged.items():
        if name != start_symbol and _is_regex_only(raw):
            state.terminals[name] = _regex_terminal(
                name, raw.alternatives[0][0], anonymous=False
            )
            terminal_names.add(name)

    user_rules = [raw for name, raw in merged.items() if name not in terminal_names]
    desugarer = _Desugarer({raw.name for raw in user_rules}, terminal_names, state)

    rules: List[Rule] = []
    for raw in user_rules:
        alternatives = tuple(desugarer.alternative(items, raw) for items in raw.alternatives)
        rules.append(Rule(head=raw.name, alternatives=alternatives))

    grammar = Grammar(
        rules=tuple(rules + state.aux_rules),
        start_symbol=start_symbol,
        terminal_table=tuple(state.terminals.values()),
    )
    summary = grammar.summary()
    logger.debug(
        f"Loaded grammar start={start_symbol} rules={summary.rules} "
        f"regex_terminals={summary.regex_terminals}"
    )
    return grammar


def load_grammar_file(path: Union[str, Path]) -> Grammar:
    """Read a UTF-8 ``.cfg`` file and load it."""
    grammar_path = Path(path)
    if not grammar_path.is_file():
        raise MissingFile(str(grammar_path))
    return load_grammar(grammar_path.read_text(encoding="utf-8"))
