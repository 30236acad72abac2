"""
Tests for SSA elaboration and label resolution
"""

from fractions import Fraction

import pytest
import sympy

from src.application.services.elaboration_service import find_cycle
from src.application.services.symbolic import SymbolTable, to_sympy
from src.domain.entities import (
    Add,
    Assert,
    Compare,
    DemonicChoice,
    DemonicLoop,
    Modify,
    Num,
    OdeProof,
    Var,
)
from src.domain.entities.analysis import free_variables, map_variables
from src.domain.exceptions import ElaborationError, LabelCycleError
from src.infrastructure.parsing import parse_text
from tests.conftest import corpus_files, mutation_files


def _expand(term) -> sympy.Expr:
    return sympy.expand(to_sympy(term, SymbolTable()))


def _unindexed(node):
    return map_variables(node, lambda v: Var(v.name))


# ============================================================================
# Renaming
# ============================================================================

def test_assignments_get_fresh_variants(elaborate):
    elaborated = elaborate("x := 0; x := x + 1;")
    first, second = elaborated.statements

    assert first == Modify(None, Var("x", 1), Num(Fraction(0)))
    assert second == Modify(None, Var("x", 2), Add(Var("x", 1), Num(Fraction(1))))
    assert elaborated.final_state == {"x": 2}
    assert elaborated.current("x") == Var("x", 2)


def test_reads_before_any_assignment_use_initial_variant(elaborate):
    elaborated = elaborate("?(x > 0); y := x;")
    assume, assign = elaborated.statements

    assert free_variables(assume.formula) == {Var("x", 0)}
    assert assign.value == Var("x", 0)


def test_anonymous_facts_get_generated_names(elaborate):
    elaborated = elaborate("?(x > 0); !(x >= 0);")

    names = [s.name for s in elaborated.statements]
    assert names == ["_0", "_1"]


def test_choice_appends_merge_assignments(elaborate):
    elaborated = elaborate("{ x := 1; ++ x := 2; y := 3; }")
    (choice,) = elaborated.statements
    assert isinstance(choice, DemonicChoice)

    left, right = choice.branches
    left_merges = [s for s in left.statements if isinstance(s, Modify) and s.merge]
    right_merges = [s for s in right.statements if isinstance(s, Modify) and s.merge]

    assert {m.var.name for m in left_merges} == {"x", "y"}
    x_merge = next(m for m in left_merges if m.var.name == "x")
    assert x_merge.var == Var("x", 3)
    assert x_merge.value == Var("x", 1)
    assert next(m for m in right_merges if m.var.name == "x").value == Var("x", 2)
    # y is untouched on the left, so its merge reads the initial variant
    assert next(m for m in left_merges if m.var.name == "y").value == Var("y", 0)
    assert elaborated.final_state == {"x": 3, "y": 2}


def test_counters_are_global_across_branches(elaborate):
    elaborated = elaborate("{ x := 1; ++ x := 2; }")
    (choice,) = elaborated.statements

    assigned = [
        s.var for branch in choice.branches for s in branch.statements
        if isinstance(s, Modify) and not s.merge
    ]
    assert assigned == [Var("x", 1), Var("x", 2)]


def test_unchanged_variables_are_not_merged(elaborate):
    elaborated = elaborate("{ x := 1; ++ x := 1; } y := 0;")
    (choice, _) = elaborated.statements

    for branch in choice.branches:
        assert [s.var.name for s in branch.statements if s.merge] == ["x"]


def test_loop_records_entry_variants_and_invariant(elaborate):
    elaborated = elaborate("x := 0; !inv:(x >= 0); { x := x + 1; !inv:(x >= 0); }*")
    loop = elaborated.statements[-1]
    assert isinstance(loop, DemonicLoop)

    assert loop.entry == ((Var("x", 1), Var("x", 2)),)
    assert loop.invariant is not None
    assert loop.invariant.name == "inv"
    assert free_variables(loop.invariant.at_merge) == {Var("x", 2)}
    assert free_variables(loop.invariant.at_end) == {Var("x", 3)}


def test_ode_posts_are_fresh_and_pre_variants_recorded(elaborate):
    elaborated = elaborate("x := 0; t := 0; {t' = 1, x' = 2};")
    ode = elaborated.statements[-1]
    assert isinstance(ode, OdeProof)

    assert ode.pre == (Var("t", 1), Var("x", 1))
    assert [eq.var for eq in ode.equations] == [Var("t", 2), Var("x", 2)]
    assert ode.duration is not None and ode.duration.name == "_dur"


def test_definitions_expand_with_current_variants(elaborate):
    elaborated = elaborate("let f(a) = a + x; x := 1; y := f(2);")
    assign = elaborated.statements[-1]

    assert assign.value == Add(Num(Fraction(2)), Var("x", 1))


def test_modal_formulas_are_rejected_outside_proves(elaborate):
    with pytest.raises(ElaborationError, match="modal"):
        elaborate("!([x := 1;] x > 0);")


# ============================================================================
# Label resolution
# ============================================================================

def test_backward_reference_reads_label_snapshot(elaborate):
    elaborated = elaborate(corpus_files()["backward-label"])

    (first, *rest) = elaborated.resolutions
    assert first.result == Var("x", 0)
    assert all(r.result == Var("x", 0) for r in rest)


def test_forward_reference_substitutes_later_assignments(elaborate):
    elaborated = elaborate(corpus_files()["forward-determined"])

    (resolution,) = elaborated.resolutions
    assert resolution.source.label == "final"
    assert _expand(resolution.result) == sympy.Symbol("x_1", real=True) + 3


def test_forward_reference_into_choice(elaborate):
    elaborated = elaborate(corpus_files()["into-choice"])

    (resolution,) = elaborated.resolutions
    assert _expand(resolution.result) == sympy.Symbol("x_1", real=True) + 3


def test_forward_reference_out_of_choice(elaborate):
    elaborated = elaborate(corpus_files()["out-of-choice"])

    (resolution,) = elaborated.resolutions
    assert _expand(resolution.result) == 3


def test_resolution_substitutes_ode_solution(elaborate):
    elaborated = elaborate(corpus_files()["predictive"])

    (resolution,) = elaborated.resolutions
    result = _unindexed(resolution.result)
    assert isinstance(result, Compare)

    v, acc, T, B, d, x = sympy.symbols("v acc T B d x", real=True)
    expected = (v + acc * T) ** 2 / (2 * B) - (d - (x + v * T + acc * T ** 2 / 2))
    table = SymbolTable()
    actual = to_sympy(result.left, table) - to_sympy(result.right, table)
    assert sympy.cancel(actual - expected) == 0


def test_resolved_program_has_no_placeholders(elaborate):
    elaborated = elaborate(corpus_files()["forward-determined"])
    assertion = next(s for s in elaborated.statements if isinstance(s, Assert))

    assert free_variables(assertion.formula) == {Var("x", 1)}


def test_nondeterministic_change_needs_a_parameter(elaborate):
    with pytest.raises(ElaborationError, match="change nondeterministically") as info:
        elaborate("x := *; y := x@end; x := *; end:")

    assert info.value.hint is not None and "end(x)" in info.value.hint


def test_label_parameters_are_checked_against_arguments(elaborate):
    with pytest.raises(ElaborationError, match="expects 0 argument"):
        elaborate(mutation_files()["missing-label-parameter"])


def test_label_inside_loop_is_not_addressable_from_outside(elaborate):
    with pytest.raises(ElaborationError, match="inside a loop body"):
        elaborate("x := 0; { x := x + 1; inner: }* y := x@inner;")


def test_unknown_label(elaborate):
    with pytest.raises(ElaborationError, match="unknown label nowhere"):
        elaborate("y := x@nowhere;")


def test_duplicate_label(elaborate):
    with pytest.raises(ElaborationError, match="defined twice"):
        elaborate("here: x := 1; here:")


# ============================================================================
# Cycles
# ============================================================================

def test_cyclic_references_report_both_labels(elaborate):
    with pytest.raises(LabelCycleError) as info:
        elaborate(mutation_files()["cyclic-label"])

    assert info.value.labels == frozenset({"one", "two"})
    assert str(info.value) == "cyclic label references between {one, two}"


def test_detect_cycles(elaborator):
    cyclic = parse_text(mutation_files()["cyclic-label"], "cyclic.kaisar")
    acyclic = parse_text(corpus_files()["forward-determined"], "ok.kaisar")

    diagnostic = elaborator.detect_cycles(cyclic)
    assert diagnostic is not None
    assert "one" in diagnostic.message and "two" in diagnostic.message
    assert elaborator.detect_cycles(acyclic) is None


def test_find_cycle():
    assert find_cycle({1: [2], 2: [3], 3: []}) is None
    cycle = find_cycle({1: [2], 2: [3], 3: [1]})
    assert cycle is not None and sorted(cycle) == [1, 2, 3]
    assert find_cycle({"a": ["a"]}) == ["a"]
