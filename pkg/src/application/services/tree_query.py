"""Key-node queries over parse trees and built-in attributes."""

import re
from typing import AbstractSet, Dict, List, Optional, Tuple, Union

from domain.entities.parse_tree import KeyPairPattern, NodePair, ParseNode, Relation
from domain.errors import UnknownAttribute
from domain.ports.tokenizer_port import TokenizerPort


def _is_typed(node: ParseNode) -> bool:
    # Inline literals and regexes are format tokens, not nodes of the data model.
    return not node.anonymous


def collect_nodes(tree: ParseNode, types: AbstractSet[str]) -> List[ParseNode]:
    """Typed nodes of ``tree`` in pre-order whose type is in ``types``.

    An empty ``types`` selects every typed node.
    """
    if not types:
        return [node for node in tree.walk() if _is_typed(node)]
    return [node for node in tree.walk() if node.node_type in types]


def _typed_children(node: ParseNode) -> List[ParseNode]:
    return [child for child in node.children if _is_typed(child)]


def _capture(pattern: str, text: str) -> Optional[str]:
    match = re.search(pattern, text)
    if match is None:
        return None
    return match.group(1) if match.groups() else match.group(0)


def _distinct(pattern: KeyPairPattern, a: ParseNode, b: ParseNode) -> bool:
    if pattern.distinct_by is None:
        return True
    key_a = _capture(pattern.distinct_by, a.text)
    key_b = _capture(pattern.distinct_by, b.text)
    return key_a is not None and key_b is not None and key_a != key_b


def match_pairs(tree: ParseNode, pattern: KeyPairPattern) -> List[NodePair]:
    """All node pairs of ``tree`` related by ``pattern``, in document order of ``a``."""
    order: Dict[int, int] = {}
    nodes: List[ParseNode] = []
    for index, node in enumerate(tree.walk()):
        order[id(node)] = index
        nodes.append(node)

    found: List[Tuple[int, int, ParseNode, ParseNode]] = []
    type_a, type_b = pattern.type_a, pattern.type_b

    if pattern.relation is Relation.NEXT_SIBLING:
        for parent in nodes:
            children = _typed_children(parent)
            for left, right in zip(children, children[1:]):
                if left.node_type == type_a and right.node_type == type_b:
                    found.append((order[id(left)], order[id(right)], left, right))

    elif pattern.relation is Relation.SAME_PARENT:
        for parent in nodes:
            children = _typed_children(parent)
            for i, left in enumerate(children):
                if left.node_type != type_a:
                    continue
                for right in children[i + 1 :]:
                    if right.node_type == type_b:
                        found.append((order[id(left)], order[id(right)], left, right))

    else:
        keyed = [n for n in nodes if _is_typed(n) and n.node_type in (type_a, type_b)]
        for i, left in enumerate(keyed):
            if left.node_type != type_a:
                continue
            for right in keyed[i + 1 :]:
                if right.start < left.end:
                    # Descendants of ``left`` are not after it in the document.
                    continue
                if right.node_type == type_b:
                    found.append((order[id(left)], order[id(right)], left, right))
                    break
                if right.node_type == type_a:
                    break

    found.sort(key=lambda item: (item[0], item[1]))
    return [
        NodePair(a=left, b=right, pattern=pattern)
        for _, _, left, right in found
        if _distinct(pattern, left, right)
    ]


def relation_holds(tree: ParseNode, pair: NodePair) -> bool:
    """Re-check a pair's relation directly against the tree."""
    pattern = pair.pattern
    if pair.a.node_type != pattern.type_a or pair.b.node_type != pattern.type_b:
        return False
    parents = {}
    for node in tree.walk():
        for child in node.children:
            parents[id(child)] = node

    if pattern.relation in (Relation.NEXT_SIBLING, Relation.SAME_PARENT):
        parent = parents.get(id(pair.a))
        if parent is None or parents.get(id(pair.b)) is not parent:
            return False
        children = _typed_children(parent)
        ia = next(i for i, c in enumerate(children) if c is pair.a)
        ib = next(i for i, c in enumerate(children) if c is pair.b)
        if pattern.relation is Relation.NEXT_SIBLING:
            return ib == ia + 1
        return ib > ia

    walk = [node for node in tree.walk() if _is_typed(node)]
    ia = next((i for i, n in enumerate(walk) if n is pair.a), None)
    ib = next((i for i, n in enumerate(walk) if n is pair.b), None)
    if ia is None or ib is None or ib <= ia or pair.b.start < pair.a.end:
        return False
    for node in walk[ia + 1 : ib]:
        if node.start < pair.a.end:
            continue
        if node.node_type in (pattern.type_a, pattern.type_b):
            return False
    return True


def builtin_attribute(
    target: Union[ParseNode, str],
    name: str,
    tokenizer: TokenizerPort,
    key_types: AbstractSet[str] = frozenset(),
) -> Union[float, str]:
    """Compute a built-in attribute of a node, a whole sample tree, or raw text.

    Args:
        target: Parse node (the root for sample-level attributes) or raw text
        name: ``token_length``, ``num_nodes``, ``num_all_nodes`` or ``node_type``
        tokenizer: Tokenizer used for ``token_length``
        key_types: Key-node types counted by ``num_nodes``; empty counts all nodes

    Returns:
        Numeric value, or the node type as a categorical value

    Raises:
        UnknownAttribute: ``name`` is not a built-in, or needs a tree and got text
    """
    if name == "token_length":
        text = target if isinstance(target, str) else target.text
        return float(tokenizer.count(text))
    if not isinstance(target, ParseNode):
        raise UnknownAttribute(name)
    if name == "num_nodes":
        return float(len(collect_nodes(target, key_types)))
    if name == "num_all_nodes":
        return float(len(collect_nodes(target, frozenset())))
    if name == "node_type":
        return target.node_type
    raise UnknownAttribute(name)
