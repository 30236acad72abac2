"""
Application Layer - Symbolic Bridge

Conversion between checker terms and sympy expressions. SSA variants become
sympy symbols named `x_i`; a SymbolTable remembers the mapping in both
directions so results can be turned back into terms.
"""

from fractions import Fraction
from typing import Dict, List, Optional

import sympy

from src.domain.entities import (
    Add,
    Apply,
    Div,
    LocatedTerm,
    Max,
    Min,
    Mul,
    Neg,
    Num,
    PendingTerm,
    Pow,
    Sub,
    Term,
    Var,
)
from src.domain.exceptions import UnsupportedTermError


class SymbolTable:
    """Bidirectional Var <-> sympy.Symbol mapping"""

    def __init__(self) -> None:
        self._symbols: Dict[Var, sympy.Symbol] = {}
        self._vars: Dict[sympy.Symbol, Var] = {}

    def symbol(self, var: Var) -> sympy.Symbol:
        key = Var(var.name, var.index)
        found = self._symbols.get(key)
        if found is None:
            found = sympy.Symbol(str(key), real=True)
            self._symbols[key] = found
            self._vars[found] = key
        return found

    def var(self, symbol: sympy.Symbol) -> Var:
        found = self._vars.get(symbol)
        if found is None:
            raise UnsupportedTermError(f"unknown symbol {symbol} in a symbolic result")
        return found

    def __contains__(self, symbol: sympy.Symbol) -> bool:
        return symbol in self._vars


def rational(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def fraction_of(value: sympy.Expr) -> Fraction:
    number = sympy.Rational(value)
    return Fraction(int(number.p), int(number.q))


def to_sympy(term: Term, table: SymbolTable) -> sympy.Expr:
    if isinstance(term, Num):
        return rational(term.value)
    if isinstance(term, Var):
        return table.symbol(term)
    if isinstance(term, Add):
        return to_sympy(term.left, table) + to_sympy(term.right, table)
    if isinstance(term, Sub):
        return to_sympy(term.left, table) - to_sympy(term.right, table)
    if isinstance(term, Mul):
        return to_sympy(term.left, table) * to_sympy(term.right, table)
    if isinstance(term, Div):
        return to_sympy(term.left, table) / to_sympy(term.right, table)
    if isinstance(term, Neg):
        return -to_sympy(term.operand, table)
    if isinstance(term, Pow):
        return to_sympy(term.base, table) ** to_sympy(term.exponent, table)
    if isinstance(term, Min):
        return sympy.Min(to_sympy(term.left, table), to_sympy(term.right, table))
    if isinstance(term, Max):
        return sympy.Max(to_sympy(term.left, table), to_sympy(term.right, table))
    if isinstance(term, (Apply, LocatedTerm, PendingTerm)):
        raise UnsupportedTermError(f"unexpanded term {type(term).__name__}", term.span)
    raise UnsupportedTermError(f"unsupported term {type(term).__name__}", term.span)


def from_sympy(expr: sympy.Expr, table: SymbolTable) -> Term:
    """Read a sympy expression back as a term, keeping subtraction and division readable"""
    if expr.is_Rational:
        return Num(fraction_of(expr))
    if expr.is_Symbol:
        return table.var(expr)
    if isinstance(expr, sympy.Add):
        positive: List[sympy.Expr] = []
        negative: List[sympy.Expr] = []
        for arg in expr.as_ordered_terms():
            (negative if arg.could_extract_minus_sign() else positive).append(arg)
        result: Optional[Term] = None
        for arg in positive:
            piece = from_sympy(arg, table)
            result = piece if result is None else Add(result, piece)
        for arg in negative:
            piece = from_sympy(-arg, table)
            result = Neg(piece) if result is None else Sub(result, piece)
        assert result is not None
        return result
    if isinstance(expr, sympy.Mul):
        numerator, denominator = sympy.fraction(expr)
        if denominator != 1:
            return Div(from_sympy(numerator, table), from_sympy(denominator, table))
        coefficient, rest = expr.as_coeff_Mul()
        if coefficient == -1:
            return Neg(from_sympy(rest, table))
        factors = [from_sympy(f, table) for f in expr.as_ordered_factors()]
        product = factors[0]
        for factor in factors[1:]:
            product = Mul(product, factor)
        return product
    if isinstance(expr, sympy.Pow):
        base, exponent = expr.as_base_exp()
        if exponent.is_Rational and exponent < 0:
            return Div(Num(Fraction(1)), from_sympy(base ** (-exponent), table))
        if exponent == 1:
            return from_sympy(base, table)
        return Pow(from_sympy(base, table), from_sympy(exponent, table))
    if isinstance(expr, (sympy.Min, sympy.Max)):
        kind = Min if isinstance(expr, sympy.Min) else Max
        args = [from_sympy(a, table) for a in expr.args]
        folded = args[0]
        for arg in args[1:]:
            folded = kind(folded, arg)
        return folded
    raise UnsupportedTermError(f"cannot represent {expr} as a term")


def simplify_term(term: Term) -> Term:
    """Normalize a term through sympy and read it back"""
    table = SymbolTable()
    return from_sympy(sympy.expand(to_sympy(term, table)), table)
