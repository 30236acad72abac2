"""
Domain Layer - Sparse Multivariate Polynomials

Value object for polynomials with exact rational coefficients over SSA
variables. A monomial is a tuple of (variable, exponent) pairs sorted by
variable; the polynomial maps monomials to non-zero coefficients.

Used for Lie derivatives of differential invariants, the linearity check of
differential ghosts, and the solution identities of polynomial ODEs.
"""

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple

from src.domain.entities.term import Add, Div, Mul, Neg, Num, Pow, Sub, Term, Var
from src.domain.exceptions import UnsupportedTermError

Monomial = Tuple[Tuple[Var, int], ...]

UNIT: Monomial = ()


def _var_key(v: Var) -> Tuple[str, int]:
    return (v.name, -1 if v.index is None else v.index)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    powers: Dict[Var, int] = dict(a)
    for v, e in b:
        powers[v] = powers.get(v, 0) + e
    return tuple(sorted(powers.items(), key=lambda item: _var_key(item[0])))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


class Polynomial:
    """
    Value Object: immutable sparse polynomial.

    Two polynomials are equal iff they have the same monomials with the same
    coefficients; the zero polynomial has no monomials.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Monomial, Fraction]] = None):
        cleaned = {}
        for mono, coeff in (terms or {}).items():
            coeff = Fraction(coeff)
            if coeff != 0:
                cleaned[mono] = coeff
        self._terms: Dict[Monomial, Fraction] = cleaned

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def constant(cls, value) -> "Polynomial":
        return cls({UNIT: Fraction(value)})

    @classmethod
    def variable(cls, v: Var) -> "Polynomial":
        return cls({((v, 1),): Fraction(1)})

    @classmethod
    def from_term(cls, term: Term) -> "Polynomial":
        """
        Normalize a term. Division is accepted only by non-zero constants;
        anything else is outside the polynomial fragment.
        """
        if isinstance(term, Num):
            return cls.constant(term.value)
        if isinstance(term, Var):
            return cls.variable(term)
        if isinstance(term, Add):
            return cls.from_term(term.left) + cls.from_term(term.right)
        if isinstance(term, Sub):
            return cls.from_term(term.left) - cls.from_term(term.right)
        if isinstance(term, Mul):
            return cls.from_term(term.left) * cls.from_term(term.right)
        if isinstance(term, Neg):
            return -cls.from_term(term.operand)
        if isinstance(term, Div):
            denominator = cls.from_term(term.right)
            if not denominator.is_constant or denominator.constant_value == 0:
                raise UnsupportedTermError("division by a non-constant is not polynomial", term.span)
            return cls.from_term(term.left).scale(1 / denominator.constant_value)
        if isinstance(term, Pow):
            exponent = term.exponent
            if isinstance(exponent, Num) and exponent.is_integer and exponent.value >= 0:
                return cls.from_term(term.base) ** int(exponent.value)
            raise UnsupportedTermError("only natural-number exponents are polynomial", term.span)
        raise UnsupportedTermError(
            f"{type(term).__name__} is not a polynomial term", term.span
        )

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return all(mono == UNIT for mono in self._terms)

    @property
    def constant_value(self) -> Fraction:
        return self._terms.get(UNIT, Fraction(0))

    def variables(self) -> frozenset:
        return frozenset(v for mono in self._terms for v, _ in mono)

    def total_degree(self) -> int:
        return max((_mono_degree(m) for m in self._terms), default=0)

    def degree_in(self, v: Var) -> int:
        return max((dict(m).get(v, 0) for m in self._terms), default=0)

    def coefficient_in(self, v: Var, power: int) -> "Polynomial":
        """The polynomial multiplying v**power"""
        result: Dict[Monomial, Fraction] = {}
        for mono, coeff in self._terms.items():
            powers = dict(mono)
            if powers.get(v, 0) == power:
                powers.pop(v, None)
                rest = tuple(sorted(powers.items(), key=lambda item: _var_key(item[0])))
                result[rest] = result.get(rest, Fraction(0)) + coeff
        return Polynomial(result)

    def evaluate(self, assignment: Mapping[Var, Fraction]) -> Fraction:
        total = Fraction(0)
        for mono, coeff in self._terms.items():
            value = coeff
            for v, e in mono:
                value *= Fraction(assignment[v]) ** e
            total += value
        return total

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        result = dict(self._terms)
        for mono, coeff in other._terms.items():
            result[mono] = result.get(mono, Fraction(0)) + coeff
        return Polynomial(result)

    def __neg__(self) -> "Polynomial":
        return self.scale(-1)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        result: Dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = _mono_mul(m1, m2)
                result[mono] = result.get(mono, Fraction(0)) + c1 * c2
        return Polynomial(result)

    def __pow__(self, exponent: int) -> "Polynomial":
        if exponent < 0:
            raise ValueError("Polynomial exponents must be natural numbers")
        result = Polynomial.constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    def scale(self, factor) -> "Polynomial":
        factor = Fraction(factor)
        return Polynomial({m: c * factor for m, c in self._terms.items()})

    def substitute(self, bindings: Mapping[Var, "Polynomial"]) -> "Polynomial":
        result = Polynomial()
        for mono, coeff in self._terms.items():
            product = Polynomial.constant(coeff)
            for v, e in mono:
                factor = bindings.get(v, Polynomial.variable(v))
                product = product * (factor ** e)
            result = result + product
        return result

    def derivative(self, v: Var) -> "Polynomial":
        result: Dict[Monomial, Fraction] = {}
        for mono, coeff in self._terms.items():
            powers = dict(mono)
            e = powers.get(v, 0)
            if e == 0:
                continue
            if e == 1:
                del powers[v]
            else:
                powers[v] = e - 1
            rest = tuple(sorted(powers.items(), key=lambda item: _var_key(item[0])))
            result[rest] = result.get(rest, Fraction(0)) + coeff * e
        return Polynomial(result)

    def lie_derivative(self, field: Mapping[Var, "Polynomial"]) -> "Polynomial":
        """Sum of (dp/dx) * f_x over the vector field; other variables are constants"""
        result = Polynomial()
        for v in sorted(self.variables(), key=_var_key):
            rhs = field.get(v)
            if rhs is not None:
                result = result + self.derivative(v) * rhs
        return result

    # ------------------------------------------------------------------
    # Conversion
    # ------------------------------------------------------------------

    def to_term(self) -> Term:
        """Canonical term: monomials by descending degree, then by variable"""
        if self.is_zero:
            return Num(Fraction(0))
        ordered = sorted(
            self._terms.items(),
            key=lambda item: (-_mono_degree(item[0]), [_var_key(v) + (e,) for v, e in item[0]]),
        )
        result: Optional[Term] = None
        for mono, coeff in ordered:
            magnitude = _monomial_term(mono, abs(coeff))
            if result is None:
                result = magnitude if coeff > 0 else Neg(magnitude)
            elif coeff > 0:
                result = Add(result, magnitude)
            else:
                result = Sub(result, magnitude)
        assert result is not None
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.constant(other)
        return isinstance(other, Polynomial) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        return f"Polynomial({self._terms!r})"


def _monomial_term(mono: Monomial, coeff: Fraction) -> Term:
    factors = []
    for v, e in mono:
        factors.append(v if e == 1 else Pow(v, Num(Fraction(e))))
    if not factors:
        return Num(coeff)
    product: Term = factors[0]
    for factor in factors[1:]:
        product = Mul(product, factor)
    if coeff != 1:
        product = Mul(Num(coeff), product)
    return product


def sum_polynomials(polys: Iterable[Polynomial]) -> Polynomial:
    total = Polynomial()
    for p in polys:
        total = total + p
    return total


class RationalForm:
    """A quotient of polynomials; the denominator is 1 for polynomial terms"""

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: Polynomial, denominator: Optional[Polynomial] = None):
        self.numerator = numerator
        self.denominator = denominator if denominator is not None else Polynomial.constant(1)
        if self.denominator.is_zero:
            raise ValueError("Denominator of a rational form cannot be zero")

    @property
    def is_polynomial(self) -> bool:
        return self.denominator == 1

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, RationalForm)
            and self.numerator == other.numerator
            and self.denominator == other.denominator
        )

    def __hash__(self) -> int:
        return hash((self.numerator, self.denominator))

    def __repr__(self) -> str:
        return f"RationalForm({self.numerator!r}, {self.denominator!r})"
