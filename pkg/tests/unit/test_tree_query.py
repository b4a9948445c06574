import random

import pytest

from application.services.tree_query import (
    builtin_attribute,
    collect_nodes,
    match_pairs,
    relation_holds,
)
from domain.entities.parse_tree import KeyPairPattern, Relation
from domain.errors import UnknownAttribute
from domain.parsers.earley import parse
from domain.parsers.grammar_loader import load_grammar

from tests.conftest import conversation

REVIEW_GRAMMAR = """
thread: review (review)* decision
review: "[" reviewer "] " body
reviewer: /R[0-9]+/
body: /[^\\[]*?(?=\\[|DECISION|$)/
decision: "DECISION " verdict
verdict: /accept|reject/
"""


@pytest.fixture
def two_rounds(sharegpt_grammar):
    return parse(sharegpt_grammar, conversation("hi ", "hello ", "bye ", "see you")).tree


def test_collect_nodes_in_document_order(sharegpt_grammar) -> None:
    tree = parse(sharegpt_grammar, "HUMAN: hi GPT: hello").tree
    nodes = collect_nodes(tree, {"query", "response"})
    assert [n.node_type for n in nodes] == ["query", "response"]
    assert [n.content for n in nodes] == ["hi ", "hello"]


def test_collect_three_queries(sharegpt_grammar) -> None:
    tree = parse(sharegpt_grammar, conversation("a ", "b ", "c ", "d ", "e ", "f")).tree
    queries = collect_nodes(tree, {"query"})
    assert [q.content for q in queries] == ["a ", "c ", "e "]
    assert queries == sorted(queries, key=lambda n: n.start)


def test_collect_without_types_skips_format_tokens(two_rounds) -> None:
    nodes = collect_nodes(two_rounds, frozenset())
    assert all(not node.anonymous for node in nodes)
    assert {"sharegpt", "conversation", "query", "query_text"} <= {n.node_type for n in nodes}


def test_unknown_type_yields_nothing(two_rounds) -> None:
    assert collect_nodes(two_rounds, {"paragraph"}) == []


def test_next_sibling_pairs_each_round(two_rounds) -> None:
    pattern = KeyPairPattern(a="query", b="response", relation=Relation.NEXT_SIBLING)
    pairs = match_pairs(two_rounds, pattern)
    assert len(pairs) == 2
    assert [(p.a.content, p.b.content) for p in pairs] == [("hi ", "hello "), ("bye ", "see you")]
    assert all(relation_holds(two_rounds, pair) for pair in pairs)


def test_same_parent_does_not_cross_rounds(two_rounds) -> None:
    pattern = KeyPairPattern(a="query", b="response", relation=Relation.SAME_PARENT)
    assert len(match_pairs(two_rounds, pattern)) == 2


def test_document_adjacent_links_response_to_next_query(two_rounds) -> None:
    pattern = KeyPairPattern(a="response", b="query", relation=Relation.DOCUMENT_ADJACENT)
    (pair,) = match_pairs(two_rounds, pattern)
    assert pair.a.content == "hello "
    assert pair.b.content == "bye "
    assert relation_holds(two_rounds, pair)


def test_pattern_types_are_case_insensitive(two_rounds) -> None:
    pattern = KeyPairPattern(a="Query", b="RESPONSE")
    assert pattern.label == "query->response:next-sibling"
    assert len(match_pairs(two_rounds, pattern)) == 2


def test_same_type_pairs_with_distinct_by() -> None:
    grammar = load_grammar(REVIEW_GRAMMAR)
    text = "[R1] good paper [R2] weak baselines [R1] see above DECISION accept"
    tree = parse(grammar, text).tree
    assert tree is not None

    pattern = KeyPairPattern(a="review", b="review", relation=Relation.SAME_PARENT)
    assert len(match_pairs(tree, pattern)) == 3

    distinct = KeyPairPattern(
        a="review", b="review", relation=Relation.SAME_PARENT, distinct_by=r"\[(R[0-9]+)\]"
    )
    pairs = match_pairs(tree, distinct)
    assert [(p.a.text[:4], p.b.text[:4]) for p in pairs] == [("[R1]", "[R2]"), ("[R2]", "[R1]")]


def test_builtin_attributes(two_rounds, tokenizer) -> None:
    key_types = {"query", "response"}
    assert builtin_attribute(two_rounds, "num_nodes", tokenizer, key_types) == 4.0
    assert builtin_attribute(two_rounds, "token_length", tokenizer) == 9.0
    (query, _) = collect_nodes(two_rounds, {"query"})
    assert builtin_attribute(query, "token_length", tokenizer) == 2.0
    assert builtin_attribute(query, "node_type", tokenizer) == "query"
    assert builtin_attribute("one two three", "token_length", tokenizer) == 3.0
    assert builtin_attribute(two_rounds, "num_all_nodes", tokenizer) > 4.0


def test_unknown_builtin(two_rounds, tokenizer) -> None:
    with pytest.raises(UnknownAttribute):
        builtin_attribute(two_rounds, "sentiment", tokenizer)
    with pytest.raises(UnknownAttribute):
        builtin_attribute("raw text", "num_nodes", tokenizer)


def _whitespace(rng: random.Random) -> str:
    return "".join(rng.choice(" \t\n") for _ in range(rng.randint(0, 3)))


def test_token_length_ignores_surrounding_whitespace(tokenizer) -> None:
    rng = random.Random(3)
    words = ["how", "are", "you?", "x", "don't", "42"]
    for _ in range(200):
        text = " ".join(rng.choice(words) for _ in range(rng.randint(0, 6)))
        padded = _whitespace(rng) + text + _whitespace(rng)
        assert builtin_attribute(padded, "token_length", tokenizer) == builtin_attribute(
            text, "token_length", tokenizer
        )
