"""
Domain Layer - Formulas

First-order real-arithmetic formulas plus the box and diamond modalities over
games. Modal formulas occur only in `proves` targets and in reification
output; checked arithmetic goals are always modality-free.
"""

from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import TYPE_CHECKING, Iterable, Tuple

from src.domain.entities.node import Node
from src.domain.entities.term import Term, Var

if TYPE_CHECKING:
    from src.domain.entities.game import Game


class CompareOp(str, Enum):
    """Comparison operators, valued by their surface syntax"""
    LT = "<"
    LE = "<="
    EQ = "="
    NE = "!="
    GE = ">="
    GT = ">"

    def negated(self) -> "CompareOp":
        return _NEGATION[self]

    def mirrored(self) -> "CompareOp":
        """Operator with the sides swapped: a < b iff b > a"""
        return _MIRROR[self]


_NEGATION = {
    CompareOp.LT: CompareOp.GE,
    CompareOp.LE: CompareOp.GT,
    CompareOp.EQ: CompareOp.NE,
    CompareOp.NE: CompareOp.EQ,
    CompareOp.GE: CompareOp.LT,
    CompareOp.GT: CompareOp.LE,
}

_MIRROR = {
    CompareOp.LT: CompareOp.GT,
    CompareOp.LE: CompareOp.GE,
    CompareOp.EQ: CompareOp.EQ,
    CompareOp.NE: CompareOp.NE,
    CompareOp.GE: CompareOp.LE,
    CompareOp.GT: CompareOp.LT,
}


@dataclass(frozen=True)
class Formula(Node):
    """Base class of formulas"""


@dataclass(frozen=True)
class Compare(Formula):
    op: CompareOp
    left: Term
    right: Term


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Box(Formula):
    """[game]post: Angel wins game with outcome post"""

    game: "Game"
    post: Formula


@dataclass(frozen=True)
class Diamond(Formula):
    game: "Game"
    post: Formula


@dataclass(frozen=True)
class PredApply(Formula):
    """Application of a formula definition `p(args)`"""

    name: str
    args: Tuple[Term, ...] = ()


@dataclass(frozen=True)
class LocatedFormula(Formula):
    """`φ@label(args)`"""

    expr: Formula
    label: str
    args: Tuple[Term, ...] = ()


@dataclass(frozen=True)
class PendingFormula(Formula):
    """Elaboration placeholder for a located formula awaiting resolution"""

    key: int


TRUE = TrueF()
FALSE = FalseF()


def conjoin(formulas: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is true"""
    items = list(formulas)
    if not items:
        return TRUE
    return reduce(And, items)


def disjoin(formulas: Iterable[Formula]) -> Formula:
    """Left-nested disjunction; the empty disjunction is false"""
    items = list(formulas)
    if not items:
        return FALSE
    return reduce(Or, items)


def conjuncts(formula: Formula) -> Tuple[Formula, ...]:
    if isinstance(formula, And):
        return conjuncts(formula.left) + conjuncts(formula.right)
    if isinstance(formula, TrueF):
        return ()
    return (formula,)


def disjuncts(formula: Formula) -> Tuple[Formula, ...]:
    if isinstance(formula, Or):
        return disjuncts(formula.left) + disjuncts(formula.right)
    return (formula,)
