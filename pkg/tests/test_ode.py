"""
Tests for the ODE engine building blocks: solutions, Lie derivatives,
differential induction, ghosts and Angelic durations
"""

import random
from fractions import Fraction

import pytest
import sympy

from src.application.services.ode_service import OdeEngine, solve_system
from src.application.services.symbolic import SymbolTable, to_sympy
from src.domain.entities import Assert, Compare, CompareOp, Num, OdeProof, OdeSystem, Polarity, Var
from src.domain.entities.analysis import free_variables
from src.domain.entities.formula import TRUE
from src.domain.entities.term import ZERO
from src.domain.exceptions import ProofError
from src.infrastructure.parsing import parse_formula, parse_term
from tests.conftest import mutation_files


@pytest.fixture
def engine(arithmetic) -> OdeEngine:
    return OdeEngine(arithmetic)


@pytest.fixture
def ode(elaborate):
    def run(text: str) -> OdeProof:
        return next(s for s in elaborate(text).statements if isinstance(s, OdeProof))
    return run


def _cut(system: OdeSystem) -> Assert:
    return next(c.statement for c in system.clauses if isinstance(c.statement, Assert))


# ============================================================================
# Solutions
# ============================================================================

def test_triangular_system_is_solved(ode):
    proof = ode("x := 0; v := 0; t := 0; {t' = 1, x' = v, v' = acc};")
    table = solve_system(proof)
    system = OdeSystem.from_proof(proof)
    t, x, v = system.posts

    assert table.complete
    symbols = SymbolTable()
    tau = symbols.symbol(proof.duration)
    solution = {post: to_sympy(table.solutions[post], symbols) for post in system.posts}

    assert sympy.expand(sympy.diff(solution[t], tau) - 1) == 0
    assert sympy.expand(sympy.diff(solution[x], tau) - solution[v]) == 0
    acc = symbols.symbol(Var("acc", 0))
    assert sympy.expand(sympy.diff(solution[v], tau) - acc) == 0
    for post in system.posts:
        start = symbols.symbol(system.pre_of(post))
        assert sympy.expand(solution[post].subs(tau, 0) - start) == 0


def _rk4(field, state, duration, steps=50):
    h = duration / steps
    for _ in range(steps):
        k1 = field(state)
        k2 = field([s + h / 2 * k for s, k in zip(state, k1)])
        k3 = field([s + h / 2 * k for s, k in zip(state, k2)])
        k4 = field([s + h * k for s, k in zip(state, k3)])
        state = [
            s + h / 6 * (a + 2 * b + 2 * c + d)
            for s, a, b, c, d in zip(state, k1, k2, k3, k4)
        ]
    return state


def test_solution_agrees_with_numeric_integration(ode):
    proof = ode("x := 0; v := 0; t := 0; {t' = 1, x' = v, v' = acc};")
    table = solve_system(proof)
    system = OdeSystem.from_proof(proof)
    symbols = SymbolTable()
    tau = symbols.symbol(proof.duration)
    acc = symbols.symbol(Var("acc", 0))
    solution = {post: to_sympy(table.solutions[post], symbols) for post in system.posts}

    rng = random.Random(7)
    for _ in range(20):
        start = [rng.uniform(-5, 5) for _ in system.posts]
        a, duration = rng.uniform(-2, 2), rng.uniform(0, 3)
        # state order follows the equations: t, x, v
        numeric = _rk4(lambda s: [1.0, s[2], a], start, duration)

        values = {symbols.symbol(system.pre_of(p)): s for p, s in zip(system.posts, start)}
        values.update({acc: a, tau: duration})
        for post, approx in zip(system.posts, numeric):
            assert float(solution[post].subs(values)) == pytest.approx(approx, abs=1e-6)


def test_self_dependent_equations_are_not_solved(ode):
    proof = ode("x := 1; {x' = x, y' = 2};")
    table = solve_system(proof)
    x, y = OdeSystem.from_proof(proof).posts

    assert x not in table
    assert y in table
    assert not table.complete


def test_inverse_ghost_equations_are_left_out(ode):
    proof = ode("z := 0; {/-- x' = y, y' = -x --/, z' = 1};")
    table = solve_system(proof)
    x, y, z = OdeSystem.from_proof(proof).posts

    assert z in table
    assert not table.covers([x, y])
    assert table.complete


# ============================================================================
# Differential induction
# ============================================================================

def test_lie_derivative_of_conserved_quantity(engine):
    x, y = Var("x"), Var("y")
    field = {x: y, y: parse_term("-x")}

    assert engine.lie_derivative(parse_term("x^2 + y^2"), field) == ZERO
    assert engine.lie_derivative(parse_term("x*y"), {x: Num(Fraction(1)), y: Num(Fraction(0))}) == y


@pytest.mark.parametrize("ghost_rhs", ["y/2", "y*(1/2)"])
def test_lie_derivative_of_ghost_invariant(engine, ghost_rhs):
    x, y = Var("x"), Var("y")
    field = {x: parse_term("-x"), y: parse_term(ghost_rhs)}

    assert engine.lie_derivative(parse_term("x*y^2"), field) == ZERO
    assert engine.lie_derivative(parse_term("x*y^2 - 1"), field) == ZERO


def test_equality_invariant_with_zero_derivative(engine, ode):
    proof = ode("x := 0; y := 1; {x' = y, y' = -x & !circle:(x^2 + y^2 = 1) by induction};")
    system = OdeSystem.from_proof(proof)
    base, step = engine.check_differential_induction(system, _cut(system).formula)

    assert step == TRUE
    assert free_variables(base) == set(proof.pre)


def test_inequality_step_keeps_direction(engine, ode):
    proof = ode("x := 0; {x' = 2 & !(x >= 0)};")
    system = OdeSystem.from_proof(proof)
    _, step = engine.check_differential_induction(system, _cut(system).formula)

    assert step == Compare(CompareOp.GE, Num(Fraction(2)), ZERO)


def test_disequalities_are_not_inductive(engine, ode):
    proof = ode("x := 0; {x' = 2};")
    system = OdeSystem.from_proof(proof)

    with pytest.raises(ProofError, match="single comparison"):
        engine.check_differential_induction(system, parse_formula("x != 1"))


# ============================================================================
# Ghosts
# ============================================================================

def test_nonlinear_ghost_is_rejected(engine, ode):
    proof = ode(mutation_files()["nonlinear-ghost"])
    system = OdeSystem.from_proof(proof)

    with pytest.raises(ProofError, match="not linear in y"):
        engine.check_differential_ghosts(system, set(proof.pre))


def test_ghost_must_be_initialized(engine, ode):
    proof = ode("x := 1; {x' = -x, /++ y' = y ++/};")
    system = OdeSystem.from_proof(proof)

    with pytest.raises(ProofError, match="not initialized"):
        engine.check_differential_ghosts(system, frozenset())
    engine.check_differential_ghosts(system, set(proof.pre))


def test_inverse_ghost_variables_stay_in_scope(engine, ode):
    proof = ode("z := 0; {/-- x' = y, y' = -x --/, z' = 1 & ?(x >= 0)};")
    system = OdeSystem.from_proof(proof)

    with pytest.raises(ProofError, match="only in an inverse ghost"):
        engine._check_inverse_scoping(system)


# ============================================================================
# Angelic durations
# ============================================================================

def test_angelic_duration_on_clock(engine, ode):
    proof = ode("?(T > 0); t := 0; x := 0; {t' = 1, x' = v & ?dur:(t := T)};")
    system = OdeSystem.from_proof(proof)
    duration = engine.check_angelic_duration(system)

    assert system.polarity == Polarity.ANGELIC
    assert duration.name == "dur"
    assert duration.clock == system.posts[0]
    assert duration.clock_pre == Var("t", 1)
    assert duration.value == Var("T", 0)


def test_angelic_domain_rejects_assumptions(engine, ode):
    proof = ode("t := 0; {t' = 1, x' = v & ?vel:(v >= 0) & ?dur:(t := T)};")

    with pytest.raises(ProofError, match="assumptions are not allowed"):
        engine.check_angelic_duration(OdeSystem.from_proof(proof))


def test_duration_needs_a_clock(engine, ode):
    proof = ode("t := 0; {t' = 1, x' = v & ?dur:(x := T)};")

    with pytest.raises(ProofError, match="duration variable x is not a clock"):
        engine.check_angelic_duration(OdeSystem.from_proof(proof))


def test_demonic_without_duration(ode):
    proof = ode("x := 0; {x' = 1 & ?(x <= 5)};")
    assert OdeSystem.from_proof(proof).polarity == Polarity.DEMONIC
