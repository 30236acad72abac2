"""
Domain Layer - AST Node Base

All syntax trees (terms, formulas, games, statements, proof terms) are frozen
dataclasses deriving from Node. Structural equality ignores source spans, so
two trees parsed from differently formatted text compare equal.

Generic traversal is driven by dataclass fields: a child is any field value
that is a Node, or a Node nested inside a tuple.
"""

from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Any, Callable, Iterator, Optional, TypeVar

from src.domain.entities.source import SourceSpan


class GhostStatus(str, Enum):
    """Whether something belongs to the proof, the game, or both"""
    PLAIN = "plain"
    FORWARD = "forward"  # proof only, erased from the game
    INVERSE = "inverse"  # game only, unusable by ordinary proof steps


@dataclass(frozen=True)
class Node:
    """Base class of every syntax tree node"""

    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False, kw_only=True)


N = TypeVar("N", bound=Node)


def _iter_value(value: Any) -> Iterator[Node]:
    if isinstance(value, Node):
        yield value
    elif isinstance(value, tuple):
        for item in value:
            yield from _iter_value(item)


def child_nodes(node: Node) -> Iterator[Node]:
    """Direct children of a node, in field order"""
    for f in fields(node):
        if f.name == "span":
            continue
        yield from _iter_value(getattr(node, f.name))


def _map_value(value: Any, fn: Callable[[Node], Node]) -> Any:
    if isinstance(value, Node):
        return fn(value)
    if isinstance(value, tuple):
        return tuple(_map_value(item, fn) for item in value)
    return value


def map_children(node: N, fn: Callable[[Node], Node]) -> N:
    """Rebuild a node with fn applied to each direct child"""
    changes = {}
    for f in fields(node):
        if f.name == "span":
            continue
        old = getattr(node, f.name)
        new = _map_value(old, fn)
        if new is not old and new != old:
            changes[f.name] = new
    if not changes:
        return node
    return replace(node, **changes)


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal of a whole tree"""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(list(child_nodes(current))))
