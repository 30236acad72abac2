"""
Tests for game refinement and `proves` queries
"""

import pytest

from src.domain.entities import StepKind
from src.domain.exceptions import RefinementError
from src.infrastructure.parsing import parse_formula, parse_game
from tests.conftest import OFFLINE_CORPUS, corpus_files


def _refines(refiner, strategy: str, target: str):
    return refiner.refines(parse_game(strategy), parse_game(target))


# ============================================================================
# Structural refinement
# ============================================================================

def test_identical_games_refine(refiner):
    trace = _refines(refiner, "{x := x + 1; ?x > 0;}*", "{x := x + 1; ?x > 0;}*")

    assert trace.ok
    assert trace.count(StepKind.MATCH) == 1


def test_target_may_add_demon_tests(refiner):
    trace = _refines(refiner, "x := 1;", "?x > 0; x := 1;")

    assert trace.ok
    assert trace.count(StepKind.DROP_TEST) == 1


def test_strategy_may_add_angel_tests(refiner):
    trace = _refines(refiner, "x := 1; {?x > 0;}^@", "x := 1;")

    assert trace.ok
    assert trace.count(StepKind.DROP_TEST) == 1


def test_demon_tests_are_compared_by_implication(refiner):
    stronger = _refines(refiner, "?x > 0;", "?x > 1;")
    assert stronger.ok
    assert stronger.count(StepKind.TEST_STRENGTHEN) == 1

    weaker = _refines(refiner, "?x > 1;", "?x > 0;")
    assert not weaker.ok
    assert weaker.failure is not None
    assert weaker.failure.kind == StepKind.FAILURE


def test_assignments_to_ghost_variables_are_erased(refiner):
    trace = _refines(refiner, "g := 1; x := 2;", "x := 2;")

    assert trace.ok
    assert trace.count(StepKind.GHOST_ERASE) == 1


def test_demon_random_assignment_refines_assignment(refiner):
    assert _refines(refiner, "x := *;", "x := 1;").count(StepKind.ASSIGN_REFINES_RANDOM) == 1
    assert not _refines(refiner, "x := 1;", "x := *;").ok


def test_angel_assignment_refines_random_assignment(refiner):
    trace = _refines(refiner, "{x := 1;}^@", "{x := *;}^@")

    assert trace.ok
    assert trace.count(StepKind.ASSIGN_REFINES_RANDOM) == 1


def test_demonic_choice_branches_may_be_reordered(refiner):
    assert _refines(refiner, "x := 1; ++ x := 2;", "x := 2; ++ x := 1;").ok
    assert not _refines(refiner, "x := 1;", "x := 1; ++ x := 2;").ok


def test_double_dual_cancels(refiner):
    trace = _refines(refiner, "{x := 1;}^@^@", "x := 1;")

    assert trace.ok
    assert trace.count(StepKind.DUAL_CANCEL) >= 1


def test_failure_names_the_mismatch(refiner):
    trace = _refines(refiner, "x := 1;", "x := 2;")

    assert not trace.ok
    assert "x := 1" in str(trace.failure)


# ============================================================================
# proves
# ============================================================================

@pytest.fixture
def commands(check, reifier):
    checked = check(corpus_files()["commands"])
    return checked, reifier.reify(checked)


def test_theorem_proves_itself(refiner, commands):
    checked, theorem = commands
    outcome = refiner.proves(checked, theorem, parse_formula("[x := *; y := x + 1;] y > x"))

    assert outcome.ok, outcome.describe()
    assert "both hold" in outcome.describe()


def test_implication_target_adds_a_demon_test(refiner, commands):
    checked, theorem = commands
    outcome = refiner.proves(
        checked, theorem, parse_formula("x > 0 -> [x := *; y := x + 1;] y > x")
    )

    assert outcome.ok, outcome.describe()


def test_postcondition_must_imply_target(refiner, commands):
    checked, theorem = commands
    outcome = refiner.proves(checked, theorem, parse_formula("[x := *; y := x + 1;] y > x + 1"))

    assert outcome.trace.ok
    assert not outcome.ok
    assert "does not imply" in outcome.describe()


def test_target_must_be_a_box(refiner, commands):
    checked, theorem = commands

    with pytest.raises(RefinementError, match="proves needs a target"):
        refiner.proves(checked, theorem, parse_formula("y > x"))


@pytest.mark.parametrize("name", OFFLINE_CORPUS)
def test_document_proves_its_rendered_conclusion(check, reifier, refiner, name):
    checked = check(corpus_files()[name])
    theorem = reifier.reify(checked)
    target = parse_formula(reifier.render(theorem))

    outcome = refiner.proves(checked, theorem, target)

    assert outcome.ok, outcome.describe()
    assert outcome.trace.count(StepKind.FAILURE) == 0


# hybrid-program model of the velocity controller, with Demon's and Angel's
# moves as separate definitions
CONTROLLER_MODEL = """
let ctrl ::= {{{?d >= V*eps; v := V; {?0 <= v & v <= V;}^@} ++ {v := 0;}}^@};
let plant ::= {t := 0; {d' = -v, t' = 1 & t <= eps}};
"""

CONTROLLER_PROBLEM = (
    "(d >= 0 & V > 0 & eps > 0 & v = 0 & t = 0) -> "
    "[time := 0; {{{?(time <= 10000); ctrl; plant; time := time + 600;}^@}*}^@] d >= 0"
)


def test_velocity_controller_refines_its_model(check, reifier, refiner):
    checked = check(corpus_files()["velocity-controller"] + CONTROLLER_MODEL)
    theorem = reifier.reify(checked)

    outcome = refiner.proves(checked, theorem, parse_formula(CONTROLLER_PROBLEM))

    assert outcome.ok, outcome.describe()
    assert "both hold" in outcome.describe()
