"""
Application Layer - Arithmetic Service

Validity checking for assertion goals. The classical procedure refutes
`hypotheses & !conclusion`:

1. SSA definitions are substituted into every formula
2. the problem goes to negation normal form and then to DNF; universal
   hypotheses are dropped and existential ones skolemized
3. min/max and denominators are case split, radicals become opaque symbols
4. equalities solved for a variable with a constant coefficient are
   substituted away
5. remaining monomials are treated as linear unknowns and each case is
   decided by Fourier-Motzkin elimination
6. nonlinear cases that survive get pairwise products of their constraints
   and are decided again by exact simplex

A case that survives everything yields a counterexample only when exact
evaluation of the original goal confirms it; otherwise the verdict is
unknown and the caller may export the obligation.

Key principles:
- rcf and auto only run classically on hereditary Harrop goals
- prop is intuitionistic propositional logic, nothing else
- Every step only weakens the hypotheses, so valid is always sound
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import sympy
from sympy.solvers.simplex import InfeasibleLPError, UnboundedLPError, lpmax

from src.application.services.fourier_motzkin import (
    EliminationBudgetExceeded,
    LinearConstraint,
    Relation,
    feasible,
)
from src.application.services.propositional import (
    is_hereditary_harrop,
    prove_intuitionistic,
    sequent_is_harrop,
)
from src.application.services.symbolic import SymbolTable, fraction_of, from_sympy, to_sympy
from src.domain.entities import (
    Add,
    And,
    Compare,
    CompareOp,
    Context,
    Div,
    Exists,
    FalseF,
    Forall,
    Formula,
    Goal,
    Iff,
    Implies,
    Max,
    MethodKind,
    Min,
    Mul,
    NamedFormula,
    Neg,
    Node,
    Not,
    Num,
    Or,
    Polynomial,
    Pow,
    Procedure,
    RationalForm,
    Sub,
    Term,
    TrueF,
    Var,
    Verdict,
    VerdictCertificate,
)
from src.domain.entities.analysis import find_node, free_variables, substitute
from src.domain.entities.formula import FALSE, TRUE
from src.domain.entities.node import GhostStatus, map_children
from src.domain.exceptions import ProofError, UnsupportedTermError
from src.infrastructure.config import CheckerSettings, get_settings

logger = logging.getLogger(__name__)

_PROCEDURE_RANK = {
    Procedure.LINEAR: 0,
    Procedure.SUBSTITUTION_LINEAR: 1,
    Procedure.PRODUCTS: 2,
}


class _CaseLimit(Exception):
    pass


# ============================================================================
# Definitions
# ============================================================================

def definition_map(definitions: Iterable[Tuple[Var, Term]]) -> Dict[Var, Term]:
    """Definitions in program order, each value rewritten over earlier ones"""
    resolved: Dict[Var, Term] = {}
    for var, value in definitions:
        resolved[var] = substitute(value, resolved) if resolved else value
    return resolved


def expand(node: Node, definitions: Mapping[Var, Term]) -> Node:
    """Substitute definitions until no defined variant is left"""
    if not definitions:
        return node
    keys = set(definitions)
    for _ in range(len(keys) + 1):
        if not (free_variables(node) & keys):
            break
        node = substitute(node, definitions)
    return node


# ============================================================================
# Normal forms
# ============================================================================

def _nnf(formula: Formula, negated: bool = False) -> Formula:
    if isinstance(formula, TrueF):
        return FALSE if negated else TRUE
    if isinstance(formula, FalseF):
        return TRUE if negated else FALSE
    if isinstance(formula, Compare):
        op = formula.op.negated() if negated else formula.op
        if op == CompareOp.NE:
            return Or(
                Compare(CompareOp.LT, formula.left, formula.right),
                Compare(CompareOp.GT, formula.left, formula.right),
            )
        return Compare(op, formula.left, formula.right)
    if isinstance(formula, Not):
        return _nnf(formula.operand, not negated)
    if isinstance(formula, And):
        kind = Or if negated else And
        return kind(_nnf(formula.left, negated), _nnf(formula.right, negated))
    if isinstance(formula, Or):
        kind = And if negated else Or
        return kind(_nnf(formula.left, negated), _nnf(formula.right, negated))
    if isinstance(formula, Implies):
        if negated:
            return And(_nnf(formula.left), _nnf(formula.right, True))
        return Or(_nnf(formula.left, True), _nnf(formula.right))
    if isinstance(formula, Iff):
        left, right = formula.left, formula.right
        if negated:
            return Or(And(_nnf(left), _nnf(right, True)), And(_nnf(left, True), _nnf(right)))
        return Or(And(_nnf(left), _nnf(right)), And(_nnf(left, True), _nnf(right, True)))
    if isinstance(formula, Forall):
        # a universal hypothesis is dropped, a refuted universal is skolemized
        return _nnf(formula.body, True) if negated else TRUE
    if isinstance(formula, Exists):
        return TRUE if negated else _nnf(formula.body)
    raise UnsupportedTermError(f"{type(formula).__name__} cannot occur in an arithmetic goal", formula.span)


def _dnf(formula: Formula, limit: int) -> List[Tuple[Compare, ...]]:
    if isinstance(formula, TrueF):
        return [()]
    if isinstance(formula, FalseF):
        return []
    if isinstance(formula, Compare):
        return [(formula,)]
    if isinstance(formula, Or):
        clauses = _dnf(formula.left, limit) + _dnf(formula.right, limit)
        if len(clauses) > limit:
            raise _CaseLimit()
        return clauses
    if isinstance(formula, And):
        left = _dnf(formula.left, limit)
        right = _dnf(formula.right, limit)
        if len(left) * len(right) > limit:
            raise _CaseLimit()
        return [l + r for l in left for r in right]
    raise UnsupportedTermError(f"{type(formula).__name__} is not in negation normal form", formula.span)


def _replace(node: Node, target: Node, replacement: Node) -> Node:
    if node == target:
        return replacement
    return map_children(node, lambda child: _replace(child, target, replacement))


def _split_min_max(atom: Compare) -> List[Tuple[Compare, ...]]:
    """Case split every min/max of an atom into guarded alternatives"""
    found = find_node(atom, Min) or find_node(atom, Max)
    if found is None:
        return [(atom,)]
    assert isinstance(found, (Min, Max))
    a, b = found.left, found.right
    first_wins = CompareOp.LE if isinstance(found, Min) else CompareOp.GE
    cases: List[Tuple[Compare, ...]] = []
    for guard, chosen in (
        (Compare(first_wins, a, b), a),
        (Compare(first_wins.negated(), a, b), b),
    ):
        replaced = _replace(atom, found, chosen)
        assert isinstance(replaced, Compare)
        for rest in _split_min_max(replaced):
            cases.append((guard,) + rest)
    return cases


# ============================================================================
# Polynomial atoms
# ============================================================================

@dataclass(frozen=True)
class _Atom:
    """expr REL 0 with expr a polynomial over the symbols"""

    expr: sympy.Expr
    relation: Relation


def _difference(atom: Compare, table: SymbolTable) -> Tuple[sympy.Expr, Relation]:
    left, right = to_sympy(atom.left, table), to_sympy(atom.right, table)
    if atom.op == CompareOp.LT:
        return right - left, Relation.GT
    if atom.op == CompareOp.LE:
        return right - left, Relation.GE
    if atom.op == CompareOp.GT:
        return left - right, Relation.GT
    if atom.op == CompareOp.GE:
        return left - right, Relation.GE
    if atom.op == CompareOp.EQ:
        return left - right, Relation.EQ
    raise UnsupportedTermError("disequalities are split before linearization", atom.span)


class _Opaque:
    """Fresh symbols standing for radicals and other non-polynomial powers"""

    def __init__(self) -> None:
        self.symbols: Dict[sympy.Expr, sympy.Symbol] = {}
        self.facts: List[_Atom] = []

    def hide(self, expr: sympy.Expr) -> sympy.Expr:
        powers = [
            p for p in expr.atoms(sympy.Pow)
            if not p.exp.is_Integer
        ]
        if not powers:
            return expr
        mapping = {}
        for power in powers:
            symbol = self.symbols.get(power)
            if symbol is None:
                symbol = sympy.Symbol(f"_opaque{len(self.symbols)}", real=True)
                self.symbols[power] = symbol
                exponent = power.exp
                if exponent.is_Rational and exponent.q % 2 == 0:
                    self.facts.append(_Atom(symbol, Relation.GE))
            mapping[power] = symbol
        return expr.xreplace(mapping)


def _polynomial_cases(atom: Compare, table: SymbolTable, opaque: _Opaque) -> List[List[_Atom]]:
    """Alternatives for one atom after clearing its denominator"""
    expr, relation = _difference(atom, table)
    expr = sympy.together(opaque.hide(expr))
    numerator, denominator = sympy.fraction(expr)
    numerator = sympy.expand(numerator)
    denominator = sympy.expand(denominator)
    if denominator.is_number:
        if denominator < 0:
            numerator = -numerator
        return [[_Atom(numerator, relation)]]
    return [
        [_Atom(denominator, Relation.GT), _Atom(numerator, relation)],
        [_Atom(-denominator, Relation.GT), _Atom(-numerator, relation)],
    ]


def _eliminate_equalities(atoms: List[_Atom]) -> Tuple[List[_Atom], List[Tuple[sympy.Symbol, sympy.Expr]]]:
    """Solve equalities for a variable with a constant coefficient and substitute"""
    eliminated: List[Tuple[sympy.Symbol, sympy.Expr]] = []
    current = list(atoms)
    while True:
        chosen = None
        for atom in current:
            if atom.relation != Relation.EQ:
                continue
            for symbol in sorted(atom.expr.free_symbols, key=str):
                poly = sympy.Poly(atom.expr, symbol)
                if poly.degree() == 1 and poly.LC().is_number:
                    chosen = (atom, symbol, sympy.expand(-poly.TC() / poly.LC()))
                    break
            if chosen:
                break
        if chosen is None:
            return current, eliminated
        atom, symbol, solution = chosen
        eliminated.append((symbol, solution))
        current = [
            _Atom(sympy.expand(a.expr.xreplace({symbol: solution})), a.relation)
            for a in current if a is not atom
        ]


Key = sympy.Expr


def _linearize(atoms: Sequence[_Atom]) -> Tuple[List[LinearConstraint[Key]], Set[Key]]:
    """Linear constraints over monomials, plus the monomials of degree above one"""
    constraints: List[LinearConstraint[Key]] = []
    nonlinear: Set[Key] = set()
    for atom in atoms:
        gens = sorted(atom.expr.free_symbols, key=str)
        if not gens:
            constraints.append(LinearConstraint.build({}, fraction_of(atom.expr), atom.relation))
            continue
        poly = sympy.Poly(atom.expr, *gens)
        coefficients: Dict[Key, Fraction] = {}
        constant = Fraction(0)
        for exponents, coefficient in poly.terms():
            value = fraction_of(coefficient)
            if sum(exponents) == 0:
                constant += value
                continue
            monomial = sympy.Mul(*[g ** e for g, e in zip(gens, exponents) if e])
            coefficients[monomial] = coefficients.get(monomial, Fraction(0)) + value
            if sum(exponents) > 1:
                nonlinear.add(monomial)
        constraints.append(LinearConstraint.build(coefficients, constant, atom.relation))
    return constraints, nonlinear


def _even_monomial(monomial: Key) -> bool:
    powers = monomial.as_powers_dict()
    return all(int(e) % 2 == 0 for e in powers.values())


def _square_facts(monomials: Iterable[Key]) -> List[LinearConstraint[Key]]:
    return [
        LinearConstraint.build({m: Fraction(1)}, Fraction(0), Relation.GE)
        for m in sorted(monomials, key=str) if _even_monomial(m)
    ]


def _product_relation(a: Relation, b: Relation) -> Relation:
    if Relation.EQ in (a, b):
        return Relation.EQ
    if a == Relation.GT and b == Relation.GT:
        return Relation.GT
    return Relation.GE


def _products(atoms: Sequence[_Atom], limit: int) -> List[_Atom]:
    result: List[_Atom] = []
    for first, second in combinations_with_replacement(range(len(atoms)), 2):
        if len(result) >= limit:
            break
        a, b = atoms[first], atoms[second]
        if a.expr.is_number or b.expr.is_number:
            continue
        result.append(_Atom(sympy.expand(a.expr * b.expr), _product_relation(a.relation, b.relation)))
    # atoms scaled by the square of a variable keep their sign
    symbols = sorted(set().union(*(a.expr.free_symbols for a in atoms)), key=str) if atoms else []
    for atom in atoms:
        if atom.expr.is_number:
            continue
        relation = Relation.EQ if atom.relation == Relation.EQ else Relation.GE
        for symbol in symbols:
            if len(result) >= limit:
                return result
            result.append(_Atom(sympy.expand(atom.expr * symbol ** 2), relation))
    return result


def _lp_model(constraints: Sequence[LinearConstraint[Key]]) -> Optional[Dict[Key, Fraction]]:
    """Exact simplex: a model with every strict constraint met, or None"""
    variables: Dict[Key, sympy.Symbol] = {}
    epsilon = sympy.Dummy("epsilon")
    relations = [epsilon <= 1]
    for constraint in constraints:
        if constraint.is_trivial:
            if not constraint.holds_trivially():
                return None
            continue
        linear = sympy.Rational(constraint.constant.numerator, constraint.constant.denominator)
        for key, coefficient in constraint.coefficients:
            symbol = variables.setdefault(key, sympy.Dummy("m"))
            linear += sympy.Rational(coefficient.numerator, coefficient.denominator) * symbol
        if constraint.relation == Relation.EQ:
            relations.append(sympy.Eq(linear, 0))
        elif constraint.relation == Relation.GE:
            relations.append(linear >= 0)
        else:
            relations.append(linear >= epsilon)
    relations = [r for r in relations if r is not sympy.true]
    if any(r is sympy.false for r in relations):
        return None
    try:
        optimum, values = lpmax(epsilon, relations)
    except InfeasibleLPError:
        return None
    except UnboundedLPError:
        return {}
    if optimum <= 0:
        return None
    return {key: fraction_of(values.get(symbol, sympy.Integer(0))) for key, symbol in variables.items()}


# ============================================================================
# Exact evaluation
# ============================================================================

def evaluate_term(term: Term, model: Mapping[Var, Fraction]) -> Optional[Fraction]:
    """Exact value, or None where undefined (division by zero, radicals)"""
    if isinstance(term, Num):
        return term.value
    if isinstance(term, Var):
        return model.get(Var(term.name, term.index), Fraction(0))
    if isinstance(term, Neg):
        inner = evaluate_term(term.operand, model)
        return None if inner is None else -inner
    if isinstance(term, (Add, Sub, Mul, Div, Min, Max)):
        left = evaluate_term(term.left, model)
        right = evaluate_term(term.right, model)
        if left is None or right is None:
            return None
        if isinstance(term, Add):
            return left + right
        if isinstance(term, Sub):
            return left - right
        if isinstance(term, Mul):
            return left * right
        if isinstance(term, Div):
            return None if right == 0 else left / right
        return min(left, right) if isinstance(term, Min) else max(left, right)
    if isinstance(term, Pow):
        base = evaluate_term(term.base, model)
        exponent = evaluate_term(term.exponent, model)
        if base is None or exponent is None or exponent.denominator != 1:
            return None
        if base == 0 and exponent < 0:
            return None
        return base ** int(exponent)
    return None


def _compare(op: CompareOp, left: Fraction, right: Fraction) -> bool:
    return {
        CompareOp.LT: left < right,
        CompareOp.LE: left <= right,
        CompareOp.EQ: left == right,
        CompareOp.NE: left != right,
        CompareOp.GE: left >= right,
        CompareOp.GT: left > right,
    }[op]


def evaluate_formula(formula: Formula, model: Mapping[Var, Fraction]) -> Optional[bool]:
    """Three-valued truth under the model; None when it cannot be decided exactly"""
    if isinstance(formula, TrueF):
        return True
    if isinstance(formula, FalseF):
        return False
    if isinstance(formula, Compare):
        left = evaluate_term(formula.left, model)
        right = evaluate_term(formula.right, model)
        if left is None or right is None:
            return None
        return _compare(formula.op, left, right)
    if isinstance(formula, Not):
        inner = evaluate_formula(formula.operand, model)
        return None if inner is None else not inner
    if isinstance(formula, (And, Or, Implies, Iff)):
        left_value = evaluate_formula(formula.left, model)
        right_value = evaluate_formula(formula.right, model)
        if isinstance(formula, And):
            if left_value is False or right_value is False:
                return False
            return None if None in (left_value, right_value) else True
        if isinstance(formula, Or):
            if left_value is True or right_value is True:
                return True
            return None if None in (left_value, right_value) else False
        if isinstance(formula, Implies):
            if left_value is False or right_value is True:
                return True
            return None if None in (left_value, right_value) else False
        return None if None in (left_value, right_value) else left_value == right_value
    return None


# ============================================================================
# Service
# ============================================================================

@dataclass
class _CaseOutcome:
    refuted: bool
    procedure: Procedure = Procedure.LINEAR
    model: Dict[Var, Fraction] = field(default_factory=dict)
    confirmable: bool = False  # the model came from an exact linear problem


class ArithmeticService:
    """
    Service for arithmetic obligations.

    Stateless apart from its settings; one instance is shared by the proof
    checker, the ODE engine and the refinement checker.
    """

    def __init__(self, settings: Optional[CheckerSettings] = None):
        self.settings = settings or get_settings()

    # ------------------------------------------------------------------
    # Polynomial operations
    # ------------------------------------------------------------------

    def normalize(self, term: Term) -> RationalForm:
        """Numerator and denominator polynomials of a term"""
        table = SymbolTable()
        expr = to_sympy(term, table)
        for power in expr.atoms(sympy.Pow):
            if not power.exp.is_Integer:
                raise UnsupportedTermError(f"non-integer exponent in {term}", term.span)
        numerator, denominator = sympy.fraction(sympy.together(expr))
        return RationalForm(
            Polynomial.from_term(from_sympy(sympy.expand(numerator), table)),
            Polynomial.from_term(from_sympy(sympy.expand(denominator), table)),
        )

    def polynomial(self, term: Term) -> Polynomial:
        form = self.normalize(term)
        if not form.denominator.is_constant:
            raise UnsupportedTermError(f"{term} is not a polynomial", term.span)
        return form.numerator.scale(1 / form.denominator.constant_value)

    def differentiate(self, p: Polynomial, field: Mapping[Var, Term]) -> Polynomial:
        """Lie derivative of p along the vector field"""
        return p.lie_derivative({var: self.polynomial(rhs) for var, rhs in field.items()})

    def check_harrop(self, formula: Formula) -> bool:
        return is_hereditary_harrop(formula)

    # ------------------------------------------------------------------
    # Assumption selection
    # ------------------------------------------------------------------

    def select_default_assumptions(self, ctx: Context, conclusion: Formula) -> List[NamedFormula]:
        """Visible facts sharing a free variable with the conclusion"""
        definitions = definition_map(ctx.definitions())
        target = free_variables(conclusion) | free_variables(expand(conclusion, definitions))
        inside = ctx.inside_inverse_ghost
        selected: List[NamedFormula] = []
        seen: Set[Formula] = set()
        for entry in ctx.facts():
            if entry.status == GhostStatus.INVERSE and not inside:
                continue
            if entry.formula in seen:
                continue
            mentioned = free_variables(entry.formula)
            if not (mentioned & target):
                mentioned = free_variables(expand(entry.formula, definitions))
            if mentioned & target:
                seen.add(entry.formula)
                selected.append(NamedFormula(entry.name or f"_{entry.kind.value}", entry.formula))
        return selected

    def select_assumptions(
        self,
        ctx: Context,
        conclusion: Formula,
        explicit: Optional[Sequence[NamedFormula]] = None,
        with_defaults: bool = False,
    ) -> List[NamedFormula]:
        """`using` facts replace the defaults; an ellipsis adds them back"""
        if explicit is None:
            return self.select_default_assumptions(ctx, conclusion)
        selected = list(explicit)
        if with_defaults:
            present = {h.formula for h in selected}
            selected.extend(
                h for h in self.select_default_assumptions(ctx, conclusion) if h.formula not in present
            )
        return selected

    # ------------------------------------------------------------------
    # Validity
    # ------------------------------------------------------------------

    def check_validity(self, goal: Goal) -> VerdictCertificate:
        hypotheses = [h.formula for h in goal.hypotheses]
        if goal.method != MethodKind.RCF and prove_intuitionistic(hypotheses, goal.conclusion):
            return VerdictCertificate.valid(Procedure.PROP)
        if goal.method == MethodKind.PROP:
            definitions = definition_map(goal.definitions)
            expanded = [expand(h, definitions) for h in hypotheses]
            if definitions and prove_intuitionistic(expanded, expand(goal.conclusion, definitions)):
                return VerdictCertificate.valid(Procedure.PROP)
            return VerdictCertificate.unknown(Procedure.PROP, "not provable by propositional reasoning")

        if not sequent_is_harrop(hypotheses, goal.conclusion):
            raise ProofError(
                "goal is not hereditary Harrop, so classical arithmetic does not apply",
                goal.span,
                hint="manual proof steps are used first, until any remaining goal is hereditary Harrop",
            )
        return self.decide(hypotheses, goal.conclusion, goal.definitions)

    def decide(
        self,
        hypotheses: Sequence[Formula],
        conclusion: Formula,
        definitions: Iterable[Tuple[Var, Term]] = (),
    ) -> VerdictCertificate:
        """Classical validity of hypotheses -> conclusion over the reals"""
        defined = definition_map(definitions)
        hyps = [expand(h, defined) for h in hypotheses]
        concl = expand(conclusion, defined)
        substituted = concl != conclusion or any(a != b for a, b in zip(hyps, hypotheses))
        relevant = self._relevant(hyps, concl)

        problem: Formula = Not(concl)
        for hyp in reversed(relevant):
            problem = And(hyp, problem)
        try:
            clauses = _dnf(_nnf(problem), self.settings.dnf_limit)
        except _CaseLimit:
            return VerdictCertificate.unknown(
                Procedure.LINEAR, f"more than {self.settings.dnf_limit} case splits"
            )

        table = SymbolTable()
        procedure = Procedure.SUBSTITUTION_LINEAR if substituted else Procedure.LINEAR
        budget = self.settings.dnf_limit
        for clause in clauses:
            try:
                cases = self._clause_cases(clause, table, budget)
            except _CaseLimit:
                return VerdictCertificate.unknown(
                    procedure, f"more than {self.settings.dnf_limit} case splits"
                )
            for atoms, opaque in cases:
                outcome = self._refute(atoms + opaque.facts, bool(opaque.symbols), table)
                if outcome.refuted:
                    if _PROCEDURE_RANK[outcome.procedure] > _PROCEDURE_RANK[procedure]:
                        procedure = outcome.procedure
                    continue
                return self._survivor(outcome, relevant, hyps, concl, procedure)
        logger.debug("valid by %s after %d clauses", procedure.value, len(clauses))
        return VerdictCertificate.valid(procedure)

    # ------------------------------------------------------------------
    # Internals
    # ------------------------------------------------------------------

    @staticmethod
    def _relevant(hypotheses: Sequence[Formula], conclusion: Formula) -> List[Formula]:
        """Hypotheses connected to the conclusion through shared variables"""
        reached = set(free_variables(conclusion))
        if not reached:
            return list(hypotheses)
        pending = list(hypotheses)
        kept: List[Formula] = []
        changed = True
        while changed:
            changed = False
            for hyp in list(pending):
                mentioned = free_variables(hyp)
                if not mentioned or mentioned & reached:
                    kept.append(hyp)
                    pending.remove(hyp)
                    reached |= mentioned
                    changed = True
        return [h for h in hypotheses if h in kept]

    def _clause_cases(
        self, clause: Sequence[Compare], table: SymbolTable, budget: int
    ) -> List[Tuple[List[_Atom], _Opaque]]:
        opaque = _Opaque()
        cases: List[List[_Atom]] = [[]]
        for atom in clause:
            alternatives: List[List[_Atom]] = []
            for split in _split_min_max(atom):
                branch: List[List[_Atom]] = [[]]
                for piece in split:
                    options = _polynomial_cases(piece, table, opaque)
                    branch = [b + o for b in branch for o in options]
                alternatives.extend(branch)
            cases = [c + a for c in cases for a in alternatives]
            if len(cases) > budget:
                raise _CaseLimit()
        return [(case, opaque) for case in cases]

    def _refute(self, atoms: List[_Atom], has_opaque: bool, table: SymbolTable) -> _CaseOutcome:
        reduced, eliminated = _eliminate_equalities(atoms)
        base = Procedure.SUBSTITUTION_LINEAR if eliminated else Procedure.LINEAR
        constraints, nonlinear = _linearize(reduced)
        constraints += _square_facts(nonlinear)

        try:
            model = feasible(constraints)
        except EliminationBudgetExceeded:
            model = _lp_model(constraints)
        if model is None:
            return _CaseOutcome(True, base)

        exact = not nonlinear and not has_opaque
        if not exact:
            products = _products(reduced, self.settings.product_limit)
            if products:
                extended, monomials = _linearize(list(reduced) + products)
                extended += _square_facts(monomials)
                if _lp_model(extended) is None:
                    return _CaseOutcome(True, Procedure.PRODUCTS)

        return _CaseOutcome(False, base, self._variable_model(model, eliminated, table), exact)

    @staticmethod
    def _variable_model(
        model: Mapping[Key, Fraction],
        eliminated: Sequence[Tuple[sympy.Symbol, sympy.Expr]],
        table: SymbolTable,
    ) -> Dict[Var, Fraction]:
        values: Dict[sympy.Symbol, sympy.Expr] = {
            key: sympy.Rational(value.numerator, value.denominator)
            for key, value in model.items() if key.is_Symbol
        }
        for symbol, solution in reversed(eliminated):
            rest = {s: values.get(s, sympy.Integer(0)) for s in solution.free_symbols}
            values[symbol] = solution.xreplace(rest)
        return {
            table.var(symbol): fraction_of(value)
            for symbol, value in values.items()
            if symbol in table and value.is_Rational
        }

    def _survivor(
        self,
        outcome: _CaseOutcome,
        relevant: Sequence[Formula],
        hyps: Sequence[Formula],
        concl: Formula,
        procedure: Procedure,
    ) -> VerdictCertificate:
        model = outcome.model
        if all(evaluate_formula(h, model) is True for h in hyps) \
                and evaluate_formula(concl, model) is False:
            variables: Set[Var] = set(free_variables(concl))
            for h in hyps:
                variables |= free_variables(h)
            assignment = tuple(
                (v, model.get(Var(v.name, v.index), Fraction(0)))
                for v in sorted(variables, key=str)
            )
            logger.debug("counterexample %s", assignment)
            return VerdictCertificate(Verdict.COUNTEREXAMPLE, outcome.procedure, assignment)
        if outcome.confirmable and len(relevant) < len(hyps):
            detail = "not valid from the hypotheses that share variables with the goal"
        else:
            detail = "nonlinear arithmetic beyond the internal procedure"
        return VerdictCertificate.unknown(procedure, detail)
