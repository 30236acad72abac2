"""
Tests for reading the played game and the proved theorem off a checked
strategy
"""

from fractions import Fraction

import pytest

from src.domain.entities import (
    Assign,
    Choice,
    Dual,
    Loop,
    Num,
    Ode,
    OdeEquation,
    RandomAssign,
    Sequence,
    Test,
    Var,
)
from src.domain.entities.formula import TRUE
from src.infrastructure.parsing import parse_formula, parse_term
from tests.conftest import corpus_files


def _num(value: int) -> Num:
    return Num(Fraction(value))


def test_commands_theorem_is_rendered(check, reifier):
    theorem = reifier.reify(check(corpus_files()["commands"]))

    assert reifier.render(theorem) == "[x := *; y := x + 1;] y > x"


@pytest.mark.parametrize("source", ["", "let square(z) = z * z;"])
def test_documents_without_moves_prove_true(check, reifier, source):
    theorem = reifier.reify(check(source))

    assert theorem.postcondition == TRUE
    assert reifier.render(theorem) == "[?true;] true"


def test_assumptions_and_assertions_become_tests(check, reifier):
    theorem = reifier.reify(check("?a:(x > 0); y := x; !b:(y > 0); z := 1;"))

    assert theorem.game == Sequence((
        Test(parse_formula("x > 0")),
        Assign(Var("y"), Var("x")),
        Dual(Test(parse_formula("y > 0"))),
        Assign(Var("z"), _num(1)),
    ))
    assert theorem.postcondition == parse_formula("y > 0")


def test_forward_ghosts_are_erased(check, reifier):
    theorem = reifier.reify(check("x := 1; /++ y := x; ++/ !(x > 0);"))

    # the trailing assertion is already the postcondition
    assert theorem.game == Assign(Var("x"), _num(1))
    assert theorem.postcondition == parse_formula("x > 0")


def test_demonic_choice(check, reifier):
    theorem = reifier.reify(check("{ x := 1; ++ x := 2; }"))

    assert theorem.game == Choice((Assign(Var("x"), _num(1)), Assign(Var("x"), _num(2))))
    assert theorem.postcondition == TRUE


def test_switch_is_angels_choice(check, reifier):
    theorem = reifier.reify(check(
        "x := *; switch { case (x >= 0) => y := 1; case (x <= 1) => y := 2; }"
    ))

    assert theorem.game == Sequence((
        RandomAssign(Var("x")),
        Dual(Choice((
            Sequence((Test(parse_formula("x >= 0")), Assign(Var("y"), _num(1)))),
            Sequence((Test(parse_formula("x <= 1")), Assign(Var("y"), _num(2)))),
        ))),
    ))


def test_demonic_loop(check, reifier):
    theorem = reifier.reify(check("x := 0; !inv:(x >= 0); { x := x + 1; !inv:(x >= 0); }*"))

    invariant = Dual(Test(parse_formula("x >= 0")))
    assert theorem.game == Sequence((
        Assign(Var("x"), _num(0)),
        invariant,
        Loop(Sequence((Assign(Var("x"), parse_term("x + 1")), invariant))),
    ))


def test_for_loop_is_angels_repetition(check, reifier):
    theorem = reifier.reify(check(
        "s := 0; for (i := 0; !inv:(s = 2*i); ?(i <= 10); i := i + 1) "
        "{ s := s + 2; !step:(s = 2*(i + 1)); }"
    ))

    items = theorem.game.items
    assert items[:3] == (
        Assign(Var("s"), _num(0)),
        Assign(Var("i"), _num(0)),
        Dual(Test(parse_formula("s = 2*i"))),
    )
    repetition = items[3]
    assert isinstance(repetition, Dual)
    assert isinstance(repetition.body, Loop)
    round_ = repetition.body.body
    assert isinstance(round_, Dual)
    assert round_.body.items[0] == Test(parse_formula("i <= 10"))


def test_stale_variants_are_kept_in_snapshots(check, reifier):
    theorem = reifier.reify(check(corpus_files()["backward-label"]))

    assert theorem.game.items[0] == Assign(Var("x_0"), Var("x"))
    assert "x_0" in reifier.render(theorem)


def test_demonic_ode_keeps_assumptions_as_domain(check, reifier):
    theorem = reifier.reify(check("x := 0; {x' = 1 & ?dom:(x <= 5)};"))

    assert theorem.game == Sequence((
        Assign(Var("x"), _num(0)),
        Ode((OdeEquation(Var("x"), _num(1)),), parse_formula("x <= 5")),
    ))


def test_angelic_ode_is_dualized(check, reifier):
    theorem = reifier.reify(check("?(T >= 0); t := 0; {t' = 1 & ?dur:(t := T)};"))

    ode = theorem.game.items[-1]
    assert isinstance(ode, Dual)
    assert isinstance(ode.body, Ode)
    assert ode.body.equations == (OdeEquation(Var("t"), _num(1)),)


def test_selected_conclusion(check, reifier):
    checked = check("?(x > 0); y := x + 1; !a:(y > 0); !b:(y > 1);")

    assert reifier.reify(checked, ["a"]).postcondition == parse_formula("y > 0")
