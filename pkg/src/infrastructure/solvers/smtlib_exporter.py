"""
Infrastructure Layer - SMT-LIB Export

Renders an arithmetic obligation as an SMT-LIB 2 script over the reals:
declarations for every variable, the hypotheses and the negated conclusion
as assertions, then `(check-sat)`. An `unsat` answer means the obligation is
valid.

min/max become `ite`, integer powers become repeated products. Rational
exponents have no SMT-LIB counterpart and are rejected.
"""

from fractions import Fraction
from typing import Iterable, List, Set

from src.domain.entities import (
    Add,
    And,
    Compare,
    CompareOp,
    Div,
    Exists,
    FalseF,
    Forall,
    Formula,
    Iff,
    Implies,
    Max,
    Min,
    Mul,
    Neg,
    Not,
    Num,
    Or,
    Pow,
    Sub,
    Term,
    TrueF,
    Var,
)
from src.domain.entities.analysis import contains, free_variables
from src.domain.exceptions import UnsupportedTermError

_OPERATORS = {
    CompareOp.LT: "<",
    CompareOp.LE: "<=",
    CompareOp.EQ: "=",
    CompareOp.GE: ">=",
    CompareOp.GT: ">",
}


def symbol(var: Var) -> str:
    return str(var)


def number(value: Fraction) -> str:
    magnitude = abs(value)
    text = (
        f"{magnitude.numerator}.0" if magnitude.denominator == 1
        else f"(/ {magnitude.numerator}.0 {magnitude.denominator}.0)"
    )
    return f"(- {text})" if value < 0 else text


def term(t: Term) -> str:
    if isinstance(t, Num):
        return number(t.value)
    if isinstance(t, Var):
        return symbol(t)
    if isinstance(t, Add):
        return f"(+ {term(t.left)} {term(t.right)})"
    if isinstance(t, Sub):
        return f"(- {term(t.left)} {term(t.right)})"
    if isinstance(t, Mul):
        return f"(* {term(t.left)} {term(t.right)})"
    if isinstance(t, Div):
        return f"(/ {term(t.left)} {term(t.right)})"
    if isinstance(t, Neg):
        return f"(- {term(t.operand)})"
    if isinstance(t, Min):
        left, right = term(t.left), term(t.right)
        return f"(ite (<= {left} {right}) {left} {right})"
    if isinstance(t, Max):
        left, right = term(t.left), term(t.right)
        return f"(ite (>= {left} {right}) {left} {right})"
    if isinstance(t, Pow):
        exponent = t.exponent
        if not (isinstance(exponent, Num) and exponent.is_integer and exponent.value >= 0):
            raise UnsupportedTermError("only natural-number exponents can be exported", t.span)
        power = int(exponent.value)
        if power == 0:
            return "1.0"
        base = term(t.base)
        return base if power == 1 else f"(* {' '.join([base] * power)})"
    raise UnsupportedTermError(f"cannot export {type(t).__name__}", t.span)


def formula(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Compare):
        if f.op == CompareOp.NE:
            return f"(not (= {term(f.left)} {term(f.right)}))"
        return f"({_OPERATORS[f.op]} {term(f.left)} {term(f.right)})"
    if isinstance(f, And):
        return f"(and {formula(f.left)} {formula(f.right)})"
    if isinstance(f, Or):
        return f"(or {formula(f.left)} {formula(f.right)})"
    if isinstance(f, Implies):
        return f"(=> {formula(f.left)} {formula(f.right)})"
    if isinstance(f, Iff):
        return f"(= {formula(f.left)} {formula(f.right)})"
    if isinstance(f, Not):
        return f"(not {formula(f.operand)})"
    if isinstance(f, (Forall, Exists)):
        binder = "forall" if isinstance(f, Forall) else "exists"
        return f"({binder} (({symbol(f.var)} Real)) {formula(f.body)})"
    raise UnsupportedTermError(f"cannot export {type(f).__name__}", f.span)


def _quantified(formulas: Iterable[Formula]) -> bool:
    return any(contains(f, Forall) or contains(f, Exists) for f in formulas)


def render(
    hypotheses: Iterable[Formula],
    conclusion: Formula,
    title: str = "",
) -> str:
    """SMT-LIB script whose unsatisfiability is the validity of the obligation"""
    hyps = list(hypotheses)
    variables: Set[Var] = set(free_variables(conclusion))
    for hyp in hyps:
        variables |= free_variables(hyp)

    lines: List[str] = []
    if title:
        lines.append(f"; {title}")
    logic = "NRA" if _quantified(hyps + [conclusion]) else "QF_NRA"
    lines.append(f"(set-logic {logic})")
    for var in sorted(variables, key=str):
        lines.append(f"(declare-fun {symbol(var)} () Real)")
    for hyp in hyps:
        lines.append(f"(assert {formula(hyp)})")
    lines.append(f"(assert (not {formula(conclusion)}))")
    lines.append("(check-sat)")
    lines.append("(exit)")
    return "\n".join(lines) + "\n"
