"""
Domain Layer - Definition Registry

`let` statements name term, formula and game definitions. Definitions are
lexically scoped: a definition made inside a branch, loop body or ghost is
visible only there. Bodies are stored already expanded over the definitions
visible at the `let`, so expanding a use is a single substitution step.
"""

from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Tuple, Union

from src.domain.entities.formula import Formula
from src.domain.entities.game import Game
from src.domain.entities.statement import DefinitionKind
from src.domain.entities.term import Term
from src.domain.exceptions import DefinitionError


@dataclass(frozen=True)
class Definition:
    """Value Object: one `let` definition"""

    name: str
    params: Tuple[str, ...]
    body: Union[Term, Formula, Game]
    kind: DefinitionKind

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        if len(set(self.params)) != len(self.params):
            raise DefinitionError(f"duplicate parameter in definition of {self.name}")

    @property
    def arity(self) -> int:
        return len(self.params)


class DefinitionRegistry:
    """
    Scoped map from names to definitions.

    `child()` opens a nested scope; lookups fall back to enclosing scopes.
    """

    def __init__(self, parent: Optional["DefinitionRegistry"] = None):
        self._parent = parent
        self._definitions: Dict[str, Definition] = {}

    def child(self) -> "DefinitionRegistry":
        return DefinitionRegistry(self)

    def define(self, definition: Definition) -> None:
        if definition.name in self._definitions:
            raise DefinitionError(f"{definition.name} is already defined in this scope")
        self._definitions[definition.name] = definition

    def lookup(self, name: str) -> Optional[Definition]:
        scope: Optional[DefinitionRegistry] = self
        while scope is not None:
            found = scope._definitions.get(name)
            if found is not None:
                return found
            scope = scope._parent
        return None

    def require(self, name: str, kind: DefinitionKind, arity: int) -> Definition:
        definition = self.lookup(name)
        if definition is None or definition.kind != kind:
            raise DefinitionError(
                f"unknown symbol {name}",
                hint=f"define it with `let {name}(...) {kind.value} ...;` before use",
            )
        if definition.arity != arity:
            raise DefinitionError(
                f"{name} expects {definition.arity} argument(s), got {arity}"
            )
        return definition

    def __iter__(self) -> Iterator[Definition]:
        seen = set()
        scope: Optional[DefinitionRegistry] = self
        while scope is not None:
            for name, definition in scope._definitions.items():
                if name not in seen:
                    seen.add(name)
                    yield definition
            scope = scope._parent

    def __contains__(self, name: str) -> bool:
        return self.lookup(name) is not None
