"""
Tests for the arithmetic backend: Fourier-Motzkin, the classical decision
procedure and its propositional front end
"""

import itertools
import random
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import pytest

from src.application.services.arithmetic_service import (
    definition_map,
    evaluate_formula,
    evaluate_term,
    expand,
)
from src.application.services.fourier_motzkin import LinearConstraint, Relation, feasible
from src.domain.entities import (
    Add,
    Compare,
    CompareOp,
    Goal,
    MethodKind,
    Mul,
    NamedFormula,
    Num,
    Polynomial,
    Procedure,
    Var,
    Verdict,
)
from src.domain.entities.analysis import free_variables
from src.domain.exceptions import ProofError, UnsupportedTermError
from src.infrastructure.parsing import parse_formula, parse_term
from tests.conftest import OFFLINE_CORPUS, corpus_files


def _goal(hypotheses: Sequence[str], conclusion: str, method: MethodKind = MethodKind.AUTO) -> Goal:
    return Goal(
        tuple(NamedFormula(f"h{i}", parse_formula(h)) for i, h in enumerate(hypotheses)),
        parse_formula(conclusion),
        method,
    )


# ============================================================================
# Fourier-Motzkin
# ============================================================================

def test_strictness_is_tracked():
    x = "x"
    assert feasible([
        LinearConstraint.build({x: Fraction(1)}, Fraction(0), Relation.GT),
        LinearConstraint.build({x: Fraction(-1)}, Fraction(0), Relation.GE),
    ]) is None
    model = feasible([
        LinearConstraint.build({x: Fraction(1)}, Fraction(0), Relation.GE),
        LinearConstraint.build({x: Fraction(-1)}, Fraction(0), Relation.GE),
    ])
    assert model == {x: Fraction(0)}


def test_equalities_are_substituted():
    constraints = [
        LinearConstraint.build({"x": Fraction(1), "y": Fraction(-1)}, Fraction(0), Relation.EQ),
        LinearConstraint.build({"y": Fraction(1)}, Fraction(-3), Relation.GT),
        LinearConstraint.build({"x": Fraction(-1)}, Fraction(5), Relation.GE),
    ]
    model = feasible(constraints)

    assert model is not None
    assert all(c.satisfied_by(model) for c in constraints)


def _solve3(rows: List[List[Fraction]], rhs: List[Fraction]) -> Optional[List[Fraction]]:
    """Gaussian elimination on a 3x3 system; None when singular"""
    m = [row[:] + [b] for row, b in zip(rows, rhs)]
    for col in range(3):
        pivot = next((r for r in range(col, 3) if m[r][col] != 0), None)
        if pivot is None:
            return None
        m[col], m[pivot] = m[pivot], m[col]
        for r in range(3):
            if r != col and m[r][col] != 0:
                factor = m[r][col] / m[col][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return [m[i][3] / m[i][i] for i in range(3)]


def _has_vertex(constraints: Sequence[LinearConstraint[str]], names: Sequence[str]) -> bool:
    for triple in itertools.combinations(constraints, 3):
        rows = [[c.coefficient(n) for n in names] for c in triple]
        point = _solve3(rows, [-c.constant for c in triple])
        if point is None:
            continue
        model = dict(zip(names, point))
        if all(c.satisfied_by(model) for c in constraints):
            return True
    return False


@pytest.mark.parametrize("seed", range(4))
def test_feasibility_agrees_with_vertex_enumeration(seed):
    rng = random.Random(seed)
    names = ("x", "y", "z")
    bound = Fraction(10 ** 4)
    box = [
        LinearConstraint.build({n: Fraction(sign)}, bound, Relation.GE)
        for n in names for sign in (1, -1)
    ]
    for _ in range(50):
        system = []
        for _ in range(rng.randint(1, 6)):
            coefficients = {n: Fraction(rng.randint(-3, 3)) for n in names}
            relation = Relation.EQ if rng.random() < 0.2 else Relation.GE
            system.append(LinearConstraint.build(coefficients, Fraction(rng.randint(-5, 5)), relation))
        constraints = system + box
        model = feasible(constraints)

        assert (model is not None) == _has_vertex(constraints, names)
        if model is not None:
            assert all(c.satisfied_by(model) for c in constraints)


# ============================================================================
# Classical validity
# ============================================================================

def test_linear_goal_is_valid(arithmetic):
    certificate = arithmetic.decide(
        [parse_formula("x > 0"), parse_formula("y > x")], parse_formula("y > 0")
    )
    assert certificate.outcome == Verdict.VALID
    assert certificate.procedure == Procedure.LINEAR


def test_invalid_goal_has_confirmed_counterexample(arithmetic):
    hypothesis, conclusion = parse_formula("x > 0"), parse_formula("x > 1")
    certificate = arithmetic.decide([hypothesis], conclusion)

    assert certificate.outcome == Verdict.COUNTEREXAMPLE
    model = dict(certificate.counterexample)
    assert evaluate_formula(hypothesis, model) is True
    assert evaluate_formula(conclusion, model) is False
    assert "counterexample" in certificate.describe()


def test_definitions_are_substituted(arithmetic):
    certificate = arithmetic.decide(
        [parse_formula("y >= 0")], parse_formula("x > 0"), [(Var("x"), parse_term("y + 1"))]
    )
    assert certificate.is_valid
    assert certificate.procedure == Procedure.SUBSTITUTION_LINEAR


def test_even_powers_are_nonnegative(arithmetic):
    assert arithmetic.decide([], parse_formula("x^2 + y^2 >= 0")).is_valid


def test_products_refute_nonlinear_cases(arithmetic):
    certificate = arithmetic.decide(
        [parse_formula("x > 1"), parse_formula("y > 1")], parse_formula("x*y > 1")
    )
    assert certificate.is_valid
    assert certificate.procedure == Procedure.PRODUCTS


def test_denominators_are_case_split(arithmetic):
    assert arithmetic.decide(
        [parse_formula("x > 0"), parse_formula("y > 0")], parse_formula("x/y > 0")
    ).is_valid


def test_min_max_are_case_split(arithmetic):
    assert arithmetic.decide([], parse_formula("max(x, y) >= min(x, y)")).is_valid


def test_disjunctive_hypothesis(arithmetic):
    certificate = arithmetic.check_validity(_goal(["x = 0 | x = 1"], "x >= 0"))
    assert certificate.is_valid


def test_propositional_goals_skip_arithmetic(arithmetic):
    certificate = arithmetic.check_validity(_goal(["x > 0 -> y > 0", "x > 0"], "y > 0"))
    assert certificate.is_valid
    assert certificate.procedure == Procedure.PROP


def test_prop_method_does_no_arithmetic(arithmetic):
    certificate = arithmetic.check_validity(_goal(["x > 1"], "x > 0", MethodKind.PROP))
    assert certificate.outcome == Verdict.UNKNOWN


def test_rcf_rejects_non_harrop_goals(arithmetic):
    with pytest.raises(ProofError, match="hereditary Harrop"):
        arithmetic.check_validity(_goal(["x = 0"], "x = 0 | x = 1", MethodKind.RCF))


def _linear(coefficients: Dict[str, int], constant: int) -> Add:
    term = Num(Fraction(constant))
    for name, c in coefficients.items():
        term = Add(term, Mul(Num(Fraction(c)), Var(name)))
    return term


@pytest.mark.parametrize("seed", range(3))
def test_verdicts_agree_with_evaluation(arithmetic, seed):
    rng = random.Random(seed)
    ops = [CompareOp.GT, CompareOp.GE, CompareOp.EQ, CompareOp.LE]
    grid = [Fraction(n, 2) for n in range(-8, 9)]

    def atom() -> Compare:
        coefficients = {"x": rng.randint(-2, 2), "y": rng.randint(-2, 2)}
        return Compare(rng.choice(ops), _linear(coefficients, rng.randint(-3, 3)), Num(Fraction(0)))

    for _ in range(15):
        hypotheses = [atom() for _ in range(rng.randint(1, 3))]
        conclusion = atom()
        certificate = arithmetic.decide(hypotheses, conclusion)
        if certificate.outcome == Verdict.VALID:
            for x, y in itertools.product(grid, grid):
                model = {Var("x"): x, Var("y"): y}
                if all(evaluate_formula(h, model) for h in hypotheses):
                    assert evaluate_formula(conclusion, model) is True
        elif certificate.outcome == Verdict.COUNTEREXAMPLE:
            model = dict(certificate.counterexample)
            assert all(evaluate_formula(h, model) is True for h in hypotheses)
            assert evaluate_formula(conclusion, model) is False


@pytest.mark.parametrize("name", OFFLINE_CORPUS)
def test_corpus_verdicts_survive_sampling(check, name):
    rng = random.Random(name)
    grid = [Fraction(n, 2) for n in range(-6, 7)]
    checked = check(corpus_files()[name])

    for obligation in checked.obligations:
        if obligation.certificate.outcome != Verdict.VALID:
            continue
        goal = obligation.goal
        defined = definition_map(goal.definitions)
        hypotheses = [expand(h.formula, defined) for h in goal.hypotheses]
        conclusion = expand(goal.conclusion, defined)
        variables = sorted(
            free_variables(conclusion).union(*(free_variables(h) for h in hypotheses)), key=str
        )
        for _ in range(1000):
            model = {v: rng.choice(grid) for v in variables}
            if all(evaluate_formula(h, model) is True for h in hypotheses):
                # undefined points (division by zero, radicals) prove nothing either way
                assert evaluate_formula(conclusion, model) is not False, (obligation.name, model)


# ============================================================================
# Polynomials and evaluation
# ============================================================================

def test_polynomial_normal_form(arithmetic):
    assert arithmetic.polynomial(parse_term("(x + 1)^2 - x^2")) == \
        Polynomial.from_term(parse_term("2*x + 1"))


def test_rational_terms_are_not_polynomials(arithmetic):
    form = arithmetic.normalize(parse_term("x / (2*y)"))
    assert not form.is_polynomial
    with pytest.raises(UnsupportedTermError):
        arithmetic.polynomial(parse_term("x / (2*y)"))


def test_rational_exponents_are_unsupported(arithmetic):
    with pytest.raises(UnsupportedTermError, match="non-integer exponent"):
        arithmetic.normalize(parse_term("x^0.5"))


def test_exact_evaluation():
    model = {Var("x"): Fraction(3), Var("y"): Fraction(0)}

    assert evaluate_term(parse_term("x^2 / 2"), model) == Fraction(9, 2)
    assert evaluate_term(parse_term("x / y"), model) is None
    assert evaluate_formula(parse_formula("x / y > 0 | x > 2"), model) is True
    assert evaluate_formula(parse_formula("x / y > 0 & x > 2"), model) is None
