"""
Domain Layer - Terms

Real-valued arithmetic expressions with exact rational literals. Variables
carry an optional SSA index: absent in parsed source, present on every
variable after elaboration (index 0 is a variable's initial value).

Key principles:
- Literals are fractions.Fraction, never floats
- min/max are primitive constructors, lowered to case splits by arithmetic
- Function applications refer to `let` definitions and are expanded away
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

from src.domain.entities.node import Node


@dataclass(frozen=True)
class Term(Node):
    """Base class of arithmetic expressions"""


@dataclass(frozen=True)
class Var(Term):
    """A program variable, optionally an SSA variant `name_index`"""

    name: str
    index: Optional[int] = None

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        if not self.name:
            raise ValueError("Variable name cannot be empty")
        if self.index is not None and self.index < 0:
            raise ValueError(f"SSA index of {self.name} must be non-negative")

    def at(self, index: int) -> "Var":
        return Var(self.name, index, span=self.span)

    @property
    def base(self) -> "Var":
        return Var(self.name, span=self.span)

    def __str__(self) -> str:
        return self.name if self.index is None else f"{self.name}_{self.index}"


@dataclass(frozen=True)
class Num(Term):
    """Exact rational literal"""

    value: Fraction

    def __post_init__(self) -> None:
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    @property
    def is_integer(self) -> bool:
        return self.value.denominator == 1


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Sub(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Mul(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Div(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Pow(Term):
    """
    Power. Exponents are natural-number literals once definitions are
    expanded; rational exponents are accepted in source and must simplify
    away before an obligation reaches arithmetic.
    """

    base: Term
    exponent: Term


@dataclass(frozen=True)
class Neg(Term):
    operand: Term


@dataclass(frozen=True)
class Min(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Max(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Apply(Term):
    """Application of a term definition `f(args)`"""

    name: str
    args: Tuple[Term, ...] = ()


@dataclass(frozen=True)
class LocatedTerm(Term):
    """`e@label(args)`: the value of e at a labelled program point"""

    expr: Term
    label: str
    args: Tuple[Term, ...] = ()


@dataclass(frozen=True)
class PendingTerm(Term):
    """Elaboration placeholder for a located term awaiting resolution"""

    key: int


BinaryTerm = Union[Add, Sub, Mul, Div, Min, Max]


def num(value: Union[int, Fraction, str]) -> Num:
    return Num(Fraction(value))


ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))
