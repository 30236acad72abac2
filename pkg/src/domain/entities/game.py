"""
Domain Layer - Hybrid Games

Game syntax produced by reification and written in `proves` targets and
`let g ::= ...` definitions. Dual swaps the players; everything else is
played by Demon unless dualized.
"""

from dataclasses import dataclass
from typing import Iterable, Optional, Tuple

from src.domain.entities.formula import TRUE, Formula
from src.domain.entities.node import GhostStatus, Node
from src.domain.entities.term import Term, Var


@dataclass(frozen=True)
class Game(Node):
    """Base class of hybrid games"""


@dataclass(frozen=True)
class OdeEquation(Node):
    """`x' = rhs`, optionally named and optionally a ghost equation"""

    var: Var
    rhs: Term
    name: Optional[str] = None
    ghost: GhostStatus = GhostStatus.PLAIN


@dataclass(frozen=True)
class Assign(Game):
    var: Var
    value: Term


@dataclass(frozen=True)
class RandomAssign(Game):
    var: Var


@dataclass(frozen=True)
class Ode(Game):
    equations: Tuple[OdeEquation, ...]
    domain: Formula = TRUE

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        if not self.equations:
            raise ValueError("An ODE needs at least one equation")
        names = [eq.var for eq in self.equations]
        if len(set(names)) != len(names):
            raise ValueError("ODE variables must be pairwise distinct")


@dataclass(frozen=True)
class Test(Game):
    condition: Formula


@dataclass(frozen=True)
class Sequence(Game):
    items: Tuple[Game, ...]


@dataclass(frozen=True)
class Choice(Game):
    branches: Tuple[Game, ...]


@dataclass(frozen=True)
class Loop(Game):
    body: Game


@dataclass(frozen=True)
class Dual(Game):
    body: Game


@dataclass(frozen=True)
class GameRef(Game):
    """Reference to a `let g ::= ...` definition"""

    name: str
    args: Tuple[Term, ...] = ()


SKIP = Test(TRUE)


def sequence(games: Iterable[Game]) -> Game:
    """Sequential composition with nested sequences flattened"""
    items = []
    for game in games:
        if isinstance(game, Sequence):
            items.extend(game.items)
        else:
            items.append(game)
    if not items:
        return SKIP
    if len(items) == 1:
        return items[0]
    return Sequence(tuple(items))


def choice(games: Iterable[Game]) -> Game:
    """Demonic choice with nested choices flattened"""
    branches = []
    for game in games:
        if isinstance(game, Choice):
            branches.extend(game.branches)
        else:
            branches.append(game)
    if len(branches) == 1:
        return branches[0]
    return Choice(tuple(branches))


def dual(game: Game) -> Game:
    """Dualize, cancelling a double dual"""
    if isinstance(game, Dual):
        return game.body
    return Dual(game)
