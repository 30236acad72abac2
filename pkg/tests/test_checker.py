"""
Tests for the proof checker: the example corpus must check, every mutation
must be rejected at the mutated line, and the individual proof rules
behave as documented
"""

import os

import pytest

from src.application.services.document_service import DocumentService
from src.domain.entities import Verdict
from src.domain.exceptions import CheckerError, ProofError
from src.infrastructure.config import CheckerSettings
from src.infrastructure.parsing import parse_formula
from src.infrastructure.persistence import InMemoryObligationRepository
from src.infrastructure.solvers import ExternalSolver
from tests.conftest import OFFLINE_CORPUS, corpus_files, mutation_files

SOLVER_CORPUS = sorted(set(corpus_files()) - set(OFFLINE_CORPUS))

# line of the mutated statement in each rejected document
MUTATED_LINES = {
    "angelic-assumption": 5,
    "cyclic-label": 1,
    "exact-switch": 3,
    "ghost-scope": 5,
    "inverse-ghost-fact": 2,
    "missing-label-parameter": 4,
    "missing-reassertion": 4,
    "non-clock-duration": 8,
    "nonlinear-ghost": 3,
    "rcf-disjunction": 3,
    "unbounded-guard": 5,
    "variable-increment": 6,
    "wrong-circle": 2,
}


def _messages(checked) -> str:
    return "\n".join(d.message for d in checked.diagnostics())


# ============================================================================
# Corpus
# ============================================================================

@pytest.mark.parametrize("name", OFFLINE_CORPUS)
def test_corpus_document_checks(check, name):
    checked = check(corpus_files()[name])

    assert checked.ok, _messages(checked)


@pytest.mark.asyncio
@pytest.mark.skipif(not os.environ.get("HGCHECK_SOLVER"), reason="needs an external SMT-LIB solver")
@pytest.mark.parametrize("name", SOLVER_CORPUS)
async def test_solver_corpus_document_checks_with_solver(documents, name):
    settings = CheckerSettings(_env_file=None)
    service = DocumentService(
        documents,
        InMemoryObligationRepository(),
        settings=settings,
        solver=ExternalSolver(settings.solver, settings.solver_timeout),
    )
    report = await service.check_document(f"{name}.kaisar")

    assert report.ok, report.render_diagnostics()


def test_every_mutation_has_an_expected_line():
    assert set(MUTATED_LINES) == set(mutation_files())


@pytest.mark.asyncio
@pytest.mark.parametrize("name", sorted(MUTATED_LINES))
async def test_mutation_is_rejected_at_mutated_line(document_service, name):
    report = await document_service.check_document(f"mutations/{name}.kaisar")

    assert not report.ok
    lines = {d.span.line for d in report.errors if d.span is not None}
    assert MUTATED_LINES[name] in lines, report.render_diagnostics()


# ============================================================================
# Assertions
# ============================================================================

def test_valid_assertion(check):
    checked = check("x := 1; !(x > 0);")

    assert checked.ok
    (obligation,) = checked.obligations
    assert obligation.certificate.is_valid


def test_failed_assertion_reports_counterexample(check):
    checked = check("x := 1; !(x > 1);")

    assert not checked.ok
    (failed,) = checked.failed_obligations
    assert failed.certificate.outcome == Verdict.COUNTEREXAMPLE
    assert "cannot prove" in _messages(checked)


def test_checking_continues_after_a_failure(check):
    checked = check("x := 1; !a:(x > 1); !b:(x > 1) using a by auto;")

    assert len(checked.obligations) == 2
    assert len(checked.failed_obligations) == 1


def test_using_replaces_default_facts(check):
    assert check("?a:(x > 0); ?b:(y > 0); !(x > 0) using a by auto;").ok
    assert not check("?a:(x > 0); ?b:(y > 0); !(x > 0) using b by auto;").ok


def test_using_a_variable_selects_its_assignment(check):
    assert check("?xPos:(x > 0); y := (x + 1)/2; !(y > 0) using xPos y by auto;").ok
    assert not check("?xPos:(x > 0); y := x - 1; !(y > 0) using xPos y by auto;").ok


def test_using_an_unknown_name_is_an_error(check):
    checked = check("?xPos:(x > 0); !(x > 0) using xPos w by auto;")

    assert not checked.ok
    assert "unknown fact w in using clause" in _messages(checked)


def test_prop_method(check):
    assert check("?a:(x > 0 -> y > 0); ?b:(x > 0); !(y > 0) using a b by prop;").ok


def test_solution_method_outside_ode(check):
    checked = check("x := 1; !(x > 0) by solution;")

    assert not checked.ok
    assert "only applies to assertions inside an ODE" in _messages(checked)


def test_print_output(check):
    checked = check("x := 2; print(x + 1);")

    assert checked.ok
    assert len(checked.prints) == 1


# ============================================================================
# Switches and loops
# ============================================================================

def test_overlapping_switch_is_total(check):
    checked = check(
        "x := *; switch { case (x >= 0) => !(x >= 0); case (x <= 1) => !(x <= 1); }"
    )

    assert checked.ok, _messages(checked)
    assert any(o.name == "switch totality" for o in checked.obligations)


def test_exact_switch_is_not_total(check):
    checked = check(mutation_files()["exact-switch"])

    assert not checked.ok
    assert "not exhaustive" in _messages(checked)


def test_exact_split_through_negation_is_not_total(check):
    checked = check(
        "x := *; switch { case (x > 0) => !a:(x >= 0); case (!(x > 0)) => !b:(x <= 0); }"
    )

    assert not checked.ok
    assert "not exhaustive" in _messages(checked)


def test_overlapping_negated_guards_are_total(check):
    checked = check(
        "x := *; switch { case (x > 0) => !a:(x >= 0); case (!(x > 1)) => !b:(x <= 1); }"
    )

    assert checked.ok, _messages(checked)


def test_demonic_loop_needs_invariant(check):
    checked = check("x := 0; { x := x + 1; }*")

    assert not checked.ok
    assert "needs its invariant" in _messages(checked)


FOR_LOOP = """
?dPos:(d > 0);
s := 0;
for (i := 0; !inv:(s = 2*i); ?(i <= 10); i := i + 1) {
  s := s + 2;
  !step:(s = 2*(i + 1));
}
!done:(i >= 10 - d) by guard(d);
"""


def test_for_loop_with_guard_exit(check):
    checked = check(FOR_LOOP)

    assert checked.ok, _messages(checked)
    kinds = {o.kind for o in checked.obligations}
    assert {"invariant", "guard", "termination"} <= kinds


def test_for_loop_guard_must_bound_index(check):
    checked = check(mutation_files()["unbounded-guard"])
    assert "does not bound" in _messages(checked)


def test_for_loop_step_must_be_constant(check):
    checked = check(mutation_files()["variable-increment"])
    assert "not a constant step" in _messages(checked)


def test_loop_body_must_reestablish_invariant(check):
    checked = check(mutation_files()["missing-reassertion"])
    assert "must end with a proof of invariant inv" in _messages(checked)


# ============================================================================
# Ghosts and ODEs
# ============================================================================

def test_plain_fact_cannot_mention_forward_ghost(check):
    checked = check(mutation_files()["ghost-scope"])
    assert "forward-ghost variable y" in _messages(checked)


def test_inverse_ghost_fact_is_not_usable_outside(check):
    checked = check(mutation_files()["inverse-ghost-fact"])
    assert "inverse-ghost fact" in _messages(checked)


def test_rcf_rejects_disjunctive_goal(check):
    checked = check(mutation_files()["rcf-disjunction"])
    assert "hereditary Harrop" in _messages(checked)


def test_named_solution_holds_for_nonnegative_durations(check):
    checked = check("?xInit:(x := 2); {y' = 1, xSol: x' = -2}; !(x <= 2) using xInit xSol by auto;")

    assert checked.ok, _messages(checked)


def test_using_resolves_assigned_variable_in_reach_avoid(check):
    checked = check(corpus_files()["reach-avoid"])

    assert "unknown fact" not in _messages(checked)


def test_differential_invariant_base_case_fails(check):
    checked = check(mutation_files()["wrong-circle"])

    assert not checked.ok
    assert any("base case" in o.name for o in checked.failed_obligations)


# ============================================================================
# Postconditions
# ============================================================================

def test_postcondition_keeps_facts_about_final_state(check):
    checked = check("x := 1; !a:(x > 0); x := 2; !b:(x > 1);")

    assert checked.postcondition() == parse_formula("x > 1")
    assert checked.postcondition(["b"]) == parse_formula("x > 1")
    with pytest.raises(ProofError, match="earlier state"):
        checked.postcondition(["a"])


def test_elaboration_errors_stop_before_checking(elaborate):
    with pytest.raises(CheckerError):
        elaborate(mutation_files()["cyclic-label"])
