"""
Domain Layer - Kernel Proof Rules

The fixed table of propositional rules that proof terms (`note` statements,
`switch` scrutinees, `using` entries) may apply. Each rule maps the formulas
of its argument facts to the formula it concludes.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Sequence

from src.domain.entities.formula import (
    FALSE,
    And,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
)
from src.domain.exceptions import ProofError


@dataclass(frozen=True)
class KernelRule:
    """Value Object: a named rule with a fixed arity"""

    name: str
    arity: int
    premises: str
    conclude: Callable[[Sequence[Formula]], Formula]

    def apply(self, args: Sequence[Formula]) -> Formula:
        if len(args) != self.arity:
            raise ProofError(
                f"rule {self.name} takes {self.arity} argument(s), got {len(args)}",
                hint=f"{self.name} expects {self.premises}",
            )
        return self.conclude(args)


def _shape_error(rule: str, expected: str, got: Formula) -> ProofError:
    return ProofError(f"rule {rule} expects {expected}, got a {type(got).__name__} fact")


def _and_left(args: Sequence[Formula]) -> Formula:
    if not isinstance(args[0], And):
        raise _shape_error("andEL", "a conjunction", args[0])
    return args[0].left


def _and_right(args: Sequence[Formula]) -> Formula:
    if not isinstance(args[0], And):
        raise _shape_error("andER", "a conjunction", args[0])
    return args[0].right


def _imply_elim(args: Sequence[Formula]) -> Formula:
    implication, premise = args
    if not isinstance(implication, Implies):
        raise _shape_error("implyE", "an implication", implication)
    if implication.left != premise:
        raise ProofError("implyE: the second fact does not match the premise of the implication")
    return implication.right


def _iff_left(args: Sequence[Formula]) -> Formula:
    if not isinstance(args[0], Iff):
        raise _shape_error("iffEL", "an equivalence", args[0])
    return Implies(args[0].left, args[0].right)


def _iff_right(args: Sequence[Formula]) -> Formula:
    if not isinstance(args[0], Iff):
        raise _shape_error("iffER", "an equivalence", args[0])
    return Implies(args[0].right, args[0].left)


def _not_elim(args: Sequence[Formula]) -> Formula:
    negation, positive = args
    if not isinstance(negation, Not):
        raise _shape_error("notE", "a negation", negation)
    if negation.operand != positive:
        raise ProofError("notE: the second fact is not the negated formula")
    return FALSE


KERNEL_RULES: Dict[str, KernelRule] = {
    rule.name: rule
    for rule in (
        KernelRule("andI", 2, "(A, B)", lambda a: And(a[0], a[1])),
        KernelRule("andEL", 1, "(A & B)", _and_left),
        KernelRule("andER", 1, "(A & B)", _and_right),
        # orIL(a, b): a proves the left disjunct, b only contributes the right one's shape
        KernelRule("orIL", 2, "(A, B)", lambda a: Or(a[0], a[1])),
        KernelRule("orIR", 2, "(A, B)", lambda a: Or(a[0], a[1])),
        KernelRule("implyE", 2, "(A -> B, A)", _imply_elim),
        KernelRule("iffEL", 1, "(A <-> B)", _iff_left),
        KernelRule("iffER", 1, "(A <-> B)", _iff_right),
        KernelRule("notE", 2, "(!A, A)", _not_elim),
    )
}


def kernel_rule(name: str) -> KernelRule:
    rule = KERNEL_RULES.get(name)
    if rule is None:
        known = ", ".join(sorted(KERNEL_RULES))
        raise ProofError(f"unknown proof rule {name}", hint=f"available rules: {known}")
    return rule
