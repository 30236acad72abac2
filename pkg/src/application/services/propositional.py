"""
Application Layer - Propositional Reasoning

Intuitionistic propositional provability with the contraction-free sequent
calculus G4ip, and the hereditary Harrop polarity check that gates the
classical arithmetic procedure. Anything that is not a connective (a
comparison, a quantified formula) is an opaque atom compared structurally.
"""

from functools import lru_cache
from typing import FrozenSet, Iterable, Tuple

from src.domain.entities import (
    And,
    Exists,
    FalseF,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    TrueF,
)
from src.domain.entities.formula import FALSE

_CONNECTIVES = (And, Or, Implies, Iff, Not, TrueF, FalseF)


def _is_atom(formula: Formula) -> bool:
    return not isinstance(formula, _CONNECTIVES)


def _core(formula: Formula) -> Formula:
    """Rewrite negation and equivalence into implications"""
    if isinstance(formula, Not):
        return Implies(_core(formula.operand), FALSE)
    if isinstance(formula, Iff):
        left, right = _core(formula.left), _core(formula.right)
        return And(Implies(left, right), Implies(right, left))
    if isinstance(formula, (And, Or, Implies)):
        return type(formula)(_core(formula.left), _core(formula.right))
    return formula


Sequent = FrozenSet[Formula]


@lru_cache(maxsize=65536)
def _prove(context: Sequent, goal: Formula, depth: int) -> bool:
    if depth <= 0:
        return False
    if isinstance(goal, TrueF) or goal in context or FALSE in context:
        return True

    # invertible left rules
    for hyp in context:
        rest = context - {hyp}
        if isinstance(hyp, TrueF):
            return _prove(rest, goal, depth)
        if isinstance(hyp, And):
            return _prove(rest | {hyp.left, hyp.right}, goal, depth)
        if isinstance(hyp, Or):
            return (
                _prove(rest | {hyp.left}, goal, depth - 1)
                and _prove(rest | {hyp.right}, goal, depth - 1)
            )
        if isinstance(hyp, Implies):
            premise = hyp.left
            if isinstance(premise, TrueF):
                return _prove(rest | {hyp.right}, goal, depth)
            if isinstance(premise, FalseF):
                return _prove(rest, goal, depth)
            if _is_atom(premise) and premise in context:
                return _prove(rest | {hyp.right}, goal, depth)
            if isinstance(premise, And):
                curried = Implies(premise.left, Implies(premise.right, hyp.right))
                return _prove(rest | {curried}, goal, depth)
            if isinstance(premise, Or):
                split = {Implies(premise.left, hyp.right), Implies(premise.right, hyp.right)}
                return _prove(rest | split, goal, depth)

    # invertible right rules
    if isinstance(goal, And):
        return _prove(context, goal.left, depth) and _prove(context, goal.right, depth)
    if isinstance(goal, Implies):
        return _prove(context | {goal.left}, goal.right, depth)

    # search
    if isinstance(goal, Or):
        if _prove(context, goal.left, depth - 1) or _prove(context, goal.right, depth - 1):
            return True
    for hyp in context:
        if isinstance(hyp, Implies) and isinstance(hyp.left, Implies):
            inner = hyp.left
            rest = context - {hyp}
            if (
                _prove(rest | {Implies(inner.right, hyp.right), inner.left}, inner.right, depth - 1)
                and _prove(rest | {hyp.right}, goal, depth - 1)
            ):
                return True
    return False


def prove_intuitionistic(hypotheses: Iterable[Formula], goal: Formula, depth: int = 48) -> bool:
    """Whether the hypotheses entail the goal by intuitionistic propositional logic"""
    context = frozenset(_core(h) for h in hypotheses)
    return _prove(context, _core(goal), depth)


def is_hereditary_harrop(formula: Formula, positive: bool = True) -> bool:
    """
    No disjunction or existential in conclusion position. Positions flip on
    the left of an implication and under negation; both sides of an
    equivalence occur in both polarities.
    """
    if isinstance(formula, (Or, Exists)):
        if positive:
            return False
        if isinstance(formula, Or):
            return is_hereditary_harrop(formula.left, positive) and is_hereditary_harrop(formula.right, positive)
        return is_hereditary_harrop(formula.body, positive)
    if isinstance(formula, And):
        return is_hereditary_harrop(formula.left, positive) and is_hereditary_harrop(formula.right, positive)
    if isinstance(formula, Implies):
        return (
            is_hereditary_harrop(formula.left, not positive)
            and is_hereditary_harrop(formula.right, positive)
        )
    if isinstance(formula, Not):
        return is_hereditary_harrop(formula.operand, not positive)
    if isinstance(formula, Iff):
        sides: Tuple[Formula, Formula] = (formula.left, formula.right)
        return all(is_hereditary_harrop(side, p) for side in sides for p in (True, False))
    if isinstance(formula, Forall):
        return is_hereditary_harrop(formula.body, positive)
    return True


def sequent_is_harrop(hypotheses: Iterable[Formula], conclusion: Formula) -> bool:
    return is_hereditary_harrop(conclusion) and all(
        is_hereditary_harrop(h, positive=False) for h in hypotheses
    )

