"""
Domain Layer - Variable Analysis and Substitution

Structural operations shared by every later stage:

- free_variables: variables with a free occurrence, respecting quantifiers
  and the variables a game binds in its postcondition
- substitute: simultaneous, capture-checked substitution of terms for
  variables
- expand_definitions: replace applications of `let` definitions by their
  bodies
- map_variables: rename every free variable occurrence

Located expressions `e@label` are opaque here: their inner expression refers
to another program point, so only their arguments are analysed.
"""

from typing import Callable, FrozenSet, List, Mapping, Optional, Set, Tuple, TypeVar, Union

from src.domain.entities.definitions import DefinitionRegistry
from src.domain.entities.formula import (
    Box,
    Compare,
    Diamond,
    Exists,
    Forall,
    Formula,
    LocatedFormula,
    PredApply,
)
from src.domain.entities.game import (
    Assign,
    Choice,
    Dual,
    Game,
    GameRef,
    Loop,
    Ode,
    OdeEquation,
    RandomAssign,
    Sequence,
    Test,
)
from src.domain.entities.node import Node, child_nodes, map_children, walk
from src.domain.entities.statement import DefinitionKind
from src.domain.entities.term import Apply, LocatedTerm, Term, Var
from src.domain.exceptions import DefinitionError, SubstitutionCaptureError

E = TypeVar("E", bound=Node)
Expr = Union[Term, Formula, Game]


# ============================================================================
# Free and bound variables
# ============================================================================

def bound_variables(game: Game) -> FrozenSet[Var]:
    """Variables a game may write"""
    result: Set[Var] = set()
    for node in walk(game):
        if isinstance(node, (Assign, RandomAssign)):
            result.add(node.var)
        elif isinstance(node, OdeEquation):
            result.add(node.var)
    return frozenset(result)


def must_bound_variables(game: Game) -> FrozenSet[Var]:
    """Variables a game writes on every run"""
    if isinstance(game, (Assign, RandomAssign)):
        return frozenset({game.var})
    if isinstance(game, Ode):
        return frozenset(eq.var for eq in game.equations)
    if isinstance(game, Sequence):
        result: Set[Var] = set()
        for item in game.items:
            result |= must_bound_variables(item)
        return frozenset(result)
    if isinstance(game, Choice):
        sets = [must_bound_variables(b) for b in game.branches]
        return frozenset.intersection(*sets) if sets else frozenset()
    if isinstance(game, Dual):
        return must_bound_variables(game.body)
    return frozenset()


def _game_free_variables(game: Game) -> Set[Var]:
    if isinstance(game, Assign):
        return free_variables(game.value)
    if isinstance(game, RandomAssign):
        return set()
    if isinstance(game, Test):
        return free_variables(game.condition)
    if isinstance(game, Ode):
        result = {eq.var for eq in game.equations}
        for eq in game.equations:
            result |= free_variables(eq.rhs)
        return result | free_variables(game.domain)
    if isinstance(game, Sequence):
        result = set()
        written: Set[Var] = set()
        for item in game.items:
            result |= _game_free_variables(item) - written
            written |= must_bound_variables(item)
        return result
    if isinstance(game, Choice):
        result = set()
        for branch in game.branches:
            result |= _game_free_variables(branch)
        return result
    if isinstance(game, (Loop, Dual)):
        return _game_free_variables(game.body)
    if isinstance(game, GameRef):
        result = set()
        for arg in game.args:
            result |= free_variables(arg)
        return result
    raise TypeError(f"Unknown game node {type(game).__name__}")


def free_variables(expr: Node) -> Set[Var]:
    """
    Variables with a free occurrence in a term, formula or game.

    Quantified variables are bound in the quantifier body; in [α]φ and <α>φ
    the variables α writes on every run are bound in φ.
    """
    if isinstance(expr, Var):
        return {expr}
    if isinstance(expr, Game):
        return _game_free_variables(expr)
    if isinstance(expr, (Forall, Exists)):
        return free_variables(expr.body) - {expr.var}
    if isinstance(expr, (Box, Diamond)):
        return _game_free_variables(expr.game) | (
            free_variables(expr.post) - must_bound_variables(expr.game)
        )
    if isinstance(expr, (LocatedTerm, LocatedFormula)):
        result: Set[Var] = set()
        for arg in expr.args:
            result |= free_variables(arg)
        return result
    result = set()
    for child in child_nodes(expr):
        result |= free_variables(child)
    return result


def base_names(expr: Node) -> Set[str]:
    return {v.name for v in free_variables(expr)}


# ============================================================================
# Renaming and substitution
# ============================================================================

def map_variables(expr: E, fn: Callable[[Var], Term]) -> E:
    """
    Replace every free variable occurrence v by fn(v). Quantified variables
    are left alone inside their scope.
    """

    def go(node: Node, bound: FrozenSet[Var]) -> Node:
        if isinstance(node, Var):
            return node if node in bound else fn(node)
        if isinstance(node, (Forall, Exists)):
            return type(node)(node.var, go(node.body, bound | {node.var}), span=node.span)
        return map_children(node, lambda child: go(child, bound))

    return go(expr, frozenset())  # type: ignore[return-value]


def _check_capture(bound: Var, bindings: Mapping[Var, Term], body: Node) -> None:
    live = free_variables(body)
    for key, value in bindings.items():
        if key in live and bound in free_variables(value):
            raise SubstitutionCaptureError(
                f"substituting {key} would capture the bound variable {bound}"
            )


def substitute(expr: E, bindings: Mapping[Var, Term]) -> E:
    """Simultaneous substitution; capturing a bound variable is an error"""
    if not bindings:
        return expr
    return _substitute(expr, dict(bindings))  # type: ignore[return-value]


def _substitute(node: Node, bindings: dict) -> Node:
    if not bindings:
        return node
    if isinstance(node, Var):
        return bindings.get(node, node)
    if isinstance(node, (Forall, Exists)):
        inner = {k: v for k, v in bindings.items() if k != node.var}
        _check_capture(node.var, inner, node.body)
        return type(node)(node.var, _substitute(node.body, inner), span=node.span)
    if isinstance(node, (Box, Diamond)):
        game, remaining = _substitute_game(node.game, bindings)
        return type(node)(game, _substitute(node.post, remaining), span=node.span)
    if isinstance(node, Game):
        return _substitute_game(node, bindings)[0]
    return map_children(node, lambda child: _substitute(child, bindings))


def _without(bindings: dict, written: FrozenSet[Var]) -> dict:
    remaining = {k: v for k, v in bindings.items() if k not in written}
    for value in remaining.values():
        captured = free_variables(value) & written
        if captured:
            names = ", ".join(sorted(str(v) for v in captured))
            raise SubstitutionCaptureError(
                f"substitution would be captured by the game assigning {names}"
            )
    return remaining


def _substitute_game(game: Game, bindings: dict) -> Tuple[Game, dict]:
    """Substitute into a game, returning the bindings still live after it"""
    if isinstance(game, Assign):
        value = _substitute(game.value, bindings)
        return Assign(game.var, value, span=game.span), _without(bindings, frozenset({game.var}))
    if isinstance(game, RandomAssign):
        return game, _without(bindings, frozenset({game.var}))
    if isinstance(game, Test):
        return Test(_substitute(game.condition, bindings), span=game.span), bindings
    if isinstance(game, Sequence):
        items: List[Game] = []
        live = bindings
        for item in game.items:
            new_item, live = _substitute_game(item, live)
            items.append(new_item)
        return Sequence(tuple(items), span=game.span), live
    if isinstance(game, GameRef):
        args = tuple(_substitute(a, bindings) for a in game.args)
        return GameRef(game.name, args, span=game.span), bindings
    # ODEs, loops and choices read variables they may also write
    inner = _without(bindings, bound_variables(game))
    if isinstance(game, Ode):
        equations = tuple(
            OdeEquation(eq.var, _substitute(eq.rhs, inner), eq.name, eq.ghost, span=eq.span)
            for eq in game.equations
        )
        return Ode(equations, _substitute(game.domain, inner), span=game.span), inner
    if isinstance(game, Choice):
        branches = tuple(_substitute_game(b, bindings)[0] for b in game.branches)
        return Choice(branches, span=game.span), inner
    if isinstance(game, Loop):
        return Loop(_substitute_game(game.body, inner)[0], span=game.span), inner
    if isinstance(game, Dual):
        body, live = _substitute_game(game.body, bindings)
        return Dual(body, span=game.span), live
    raise TypeError(f"Unknown game node {type(game).__name__}")


# ============================================================================
# Definition expansion
# ============================================================================

def expand_definitions(
    expr: E,
    definitions: DefinitionRegistry,
    expanding: Tuple[str, ...] = ()
) -> E:
    """
    Replace defined symbols by their bodies with parameters substituted.
    Other free variables of a body stay as they are: they take their value
    where the definition is used.
    """

    def instantiate(name: str, args: Tuple[Term, ...], kind: DefinitionKind, node: Node) -> Node:
        if name in expanding:
            raise DefinitionError(f"recursive definition of {name}", node.span)
        try:
            definition = definitions.require(name, kind, len(args))
        except DefinitionError as exc:
            raise exc.with_span(node.span)
        new_args = tuple(expand_definitions(a, definitions, expanding) for a in args)
        bindings = {Var(p): a for p, a in zip(definition.params, new_args)}
        body = expand_definitions(definition.body, definitions, expanding + (name,))
        return substitute(body, bindings)

    def go(node: Node) -> Node:
        if isinstance(node, Apply):
            return instantiate(node.name, node.args, DefinitionKind.TERM, node)
        if isinstance(node, PredApply):
            return instantiate(node.name, node.args, DefinitionKind.FORMULA, node)
        if isinstance(node, GameRef):
            return instantiate(node.name, node.args, DefinitionKind.GAME, node)
        return map_children(node, go)

    return go(expr)  # type: ignore[return-value]


# ============================================================================
# Small queries
# ============================================================================

def contains(expr: Node, kind: type) -> bool:
    return any(isinstance(node, kind) for node in walk(expr))


def atoms(formula: Formula) -> List[Compare]:
    return [node for node in walk(formula) if isinstance(node, Compare)]


def find_node(expr: Node, kind: type) -> Optional[Node]:
    for node in walk(expr):
        if isinstance(node, kind):
            return node
    return None
