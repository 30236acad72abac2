"""Lexer, parser and printer"""

from fractions import Fraction

import pytest

from src.domain.entities import (
    Add,
    And,
    Assert,
    Assume,
    Box,
    Compare,
    CompareOp,
    Conclusion,
    DemonicChoice,
    DemonicLoop,
    Dual,
    ForLoop,
    ForwardGhost,
    GhostStatus,
    Implies,
    InverseGhost,
    LabelStmt,
    LocatedFormula,
    LocatedTerm,
    Loop,
    MethodKind,
    Modify,
    Mul,
    Num,
    OdeProof,
    Proves,
    SourceFile,
    Switch,
    Test,
    TrueF,
    Var,
)
from src.domain.exceptions import ParseError
from src.infrastructure.parsing import (
    TokenKind,
    format_number,
    parse_formula,
    parse_game,
    parse_term,
    parse_text,
    print_formula,
    print_game,
    print_statements,
    print_term,
    tokenize,
)

from tests.conftest import corpus_files, mutation_files


def test_tokens_use_longest_symbols():
    tokens = tokenize(SourceFile("t", "/++ x := *; ++/ y <= 1 // comment\n/* block */ z"))
    texts = [t.text for t in tokens if t.kind != TokenKind.EOF]
    assert texts == ["/++", "x", ":=", "*", ";", "++/", "y", "<=", "1", "z"]


def test_term_precedence_and_associativity():
    assert parse_term("x + y * 2") == Add(Var("x"), Mul(Var("y"), Num(Fraction(2))))
    assert print_term(parse_term("(a - b) - c")) == "a - b - c"
    assert print_term(parse_term("a - (b - c)")) == "a - (b - c)"
    assert print_term(parse_term("(x + 1)^2")) == "(x + 1)^2"


def test_decimal_literals_are_exact():
    term = parse_term("0.25")
    assert term == Num(Fraction(1, 4))
    assert format_number(Fraction(1, 4)) == "0.25"
    assert format_number(Fraction(1, 3)) == "1/3"


def test_formula_connectives():
    formula = parse_formula("x = 0 -> y = 1 & z > 2")
    assert isinstance(formula, Implies)
    assert isinstance(formula.right, And)
    assert formula.left == Compare(CompareOp.EQ, Var("x"), Num(Fraction(0)))


def test_located_expressions():
    located = parse_term("x@init")
    assert located == LocatedTerm(Var("x"), "init")
    formula = parse_formula("safe()@ode(T, acc)")
    assert isinstance(formula, LocatedFormula)
    assert formula.label == "ode"
    assert formula.args == (Var("T"), Var("acc"))


def test_spans_do_not_affect_equality():
    assert parse_formula("x  >=   1") == parse_formula("x >= 1")


def test_assumption_assertion_and_assignment_forms():
    document = parse_text("?bit:(x = 0); !c:(y = 1) using a b by prop; ?zFact:(z := y); x := *;")
    assume, assertion, binding, random = document.statements
    assert isinstance(assume, Assume) and assume.name == "bit"
    assert isinstance(assertion, Assert)
    assert assertion.method is not None and assertion.method.kind == MethodKind.PROP
    assert [u.name for u in assertion.using] == ["a", "b"]
    assert isinstance(binding, Modify) and binding.name == "zFact" and binding.var == Var("z")
    assert isinstance(random, Modify) and random.value is None


def test_demonic_choice_and_loop():
    document = parse_text("{?bit:(x = 0); ++ ?bit:(x = 1);} { x := x + 1; }*")
    choice, loop = document.statements
    assert isinstance(choice, DemonicChoice) and len(choice.branches) == 2
    assert isinstance(loop, DemonicLoop) and len(loop.body) == 1


def test_switch_without_scrutinee_and_true_case():
    document = parse_text("switch {case (d>=eps*V) => v:=V; case (true) => v:=0;}")
    switch = document.statements[0]
    assert isinstance(switch, Switch)
    assert switch.scrutinee is None
    assert isinstance(switch.cases[1].guard, TrueF)


def test_for_header_with_trailing_semicolon():
    document = parse_text(
        "for (time := 0; !(inv()); ?(time <= 10000); time := (time + 600);) { v := 0; }"
    )
    loop = document.statements[0]
    assert isinstance(loop, ForLoop)
    assert loop.init.var == Var("time")
    assert loop.increment.value == Add(Var("time"), Num(Fraction(600)))


def test_ode_with_ghost_equations_and_named_solution():
    document = parse_text(
        "{y' = 1, xSol: x' = -2, /++ g' = g * (1/2) ++/ & ?dc:(x >= 0) & !again:(x = 2*(1 - y))};"
    )
    ode = document.statements[0]
    assert isinstance(ode, OdeProof)
    assert [eq.var.name for eq in ode.equations] == ["y", "x", "g"]
    assert ode.equations[1].name == "xSol"
    assert ode.equations[2].ghost == GhostStatus.FORWARD
    assert [type(c) for c in ode.domain] == [Assume, Assert]


def test_ode_without_semicolon_before_next_statement():
    document = parse_text("x := 0; /-- y := 25; --/ {x' = 3} !(x >= 0);")
    kinds = [type(s) for s in document.statements]
    assert kinds == [Modify, InverseGhost, OdeProof, Assert]


def test_ghost_blocks_and_labels():
    document = parse_text("/++ ?yInit:(y := x); ++/ init: ode(t, acc): x := 1;")
    ghost, init, ode, _ = document.statements
    assert isinstance(ghost, ForwardGhost)
    assert init == LabelStmt("init")
    assert ode == LabelStmt("ode", (Var("t"), Var("acc")))


def test_commands():
    document = parse_text('x := 1; conclusion one; proves one "x = 0 -> [x := 1;] x > 0";')
    conclusion, proves = document.commands
    assert isinstance(conclusion, Conclusion) and conclusion.proof == "one"
    assert isinstance(proves, Proves)
    # A -> [α]φ is read as [?A; α]φ
    assert isinstance(proves.target, Box)


def test_game_syntax():
    game = parse_game("{{x := 1; ?x > 0;}^@}*")
    assert isinstance(game, Loop)
    assert isinstance(game.body, Dual)
    assert print_game(parse_game("x := *; ?y > x;")) == "x := *; ?y > x;"


def test_box_formula_roundtrip():
    text = "[x := *; y := x + 1;] y > x"
    assert print_formula(parse_formula(text)) == text


def test_unterminated_ghost_reports_the_opener():
    with pytest.raises(ParseError) as info:
        parse_text("/++ !inv:(x >= y);")
    assert "unterminated ghost" in str(info.value)
    assert info.value.span is not None and info.value.span.column == 1


def test_parse_error_names_expected_token():
    with pytest.raises(ParseError) as info:
        parse_text("x := ;")
    assert info.value.span is not None
    assert info.value.span.line == 1


@pytest.mark.parametrize("name, text", sorted({**corpus_files(), **mutation_files()}.items()))
def test_print_then_parse_is_a_fixpoint(name, text):
    document = parse_text(text, name)
    printed = print_statements(document.statements)
    reparsed = parse_text(printed, name)
    assert reparsed.statements == document.statements
