"""Parse tree entities and key-node pair patterns."""

from enum import Enum
from typing import Iterator, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator


class StarExpansion(BaseModel):
    """One `( ... )*` expansion spliced into a node: the branch taken per repetition."""

    model_config = ConfigDict(frozen=True)

    rule: str
    choices: Tuple[int, ...] = ()

    @property
    def count(self) -> int:
        return len(self.choices)


class ParseNode(BaseModel):
    """A typed node of a derivation; leaves are terminal matches."""

    model_config = ConfigDict(frozen=True)

    node_type: str
    span: Tuple[int, int]
    text: str
    children: Tuple["ParseNode", ...] = ()
    terminal: bool = False
    literal: bool = False
    anonymous: bool = False
    alternative: Optional[int] = None
    repetitions: Tuple[StarExpansion, ...] = ()

    @property
    def start(self) -> int:
        return self.span[0]

    @property
    def end(self) -> int:
        return self.span[1]

    @property
    def content(self) -> str:
        """Text with anonymous literal leaves (format tokens) removed."""
        return "".join(
            leaf.text for leaf in self.leaves() if not (leaf.anonymous and leaf.literal)
        )

    def walk(self) -> Iterator["ParseNode"]:
        """Pre-order traversal including leaves."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> List["ParseNode"]:
        return [node for node in self.walk() if node.terminal]


ParseNode.model_rebuild()


class ParseStatus(str, Enum):
    PARSED = "parsed"
    FAILED = "failed"


class ParseOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    status: ParseStatus
    tree: Optional[ParseNode] = None
    failure_position: Optional[int] = None

    @property
    def parsed(self) -> bool:
        return self.status is ParseStatus.PARSED

    @classmethod
    def success(cls, tree: ParseNode) -> "ParseOutcome":
        return cls(status=ParseStatus.PARSED, tree=tree)

    @classmethod
    def failure(cls, position: int) -> "ParseOutcome":
        return cls(status=ParseStatus.FAILED, failure_position=position)


class Relation(str, Enum):
    NEXT_SIBLING = "next-sibling"
    SAME_PARENT = "same-parent"
    DOCUMENT_ADJACENT = "document-adjacent"


class KeyPairPattern(BaseModel):
    """Pair of key node types and the tree relation that links them."""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    type_a: str = Field(alias="a")
    type_b: str = Field(alias="b")
    relation: Relation = Relation.NEXT_SIBLING
    # First capture group must differ between the two node texts.
    distinct_by: Optional[str] = None

    @field_validator("type_a", "type_b")
    @classmethod
    def _normalize_type(cls, value: str) -> str:
        return value.lower()

    @property
    def label(self) -> str:
        return f"{self.type_a}->{self.type_b}:{self.relation.value}"


class NodePair(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: ParseNode
    b: ParseNode
    pattern: KeyPairPattern
