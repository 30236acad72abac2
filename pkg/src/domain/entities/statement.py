"""
Domain Layer - Proof Statements

A proof document is a list of statements written in the structured proof
language, followed by commands (`conclusion`, `proves`). The parser produces
statements over plain variables; the elaborator produces the same node kinds
in SSA form, filling in the elaboration fields (transitions, merge
assignments, loop invariants) and naming every anonymous fact `_k`.

Key principles:
- Statements are immutable values, compared structurally without spans
- A fact name of None means the fact is anonymous in the source
- A Modify with value None is a nondeterministic assignment `x := *`
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

from src.domain.entities.formula import Formula
from src.domain.entities.game import Game, OdeEquation
from src.domain.entities.node import Node
from src.domain.entities.term import Term, Var


# ============================================================================
# Proof terms and methods
# ============================================================================

@dataclass(frozen=True)
class ProofTerm(Node):
    """Base class of proof terms"""


@dataclass(frozen=True)
class FactRef(ProofTerm):
    """A fact name, or a variable name inside a `using` list"""

    name: str


@dataclass(frozen=True)
class RuleApp(ProofTerm):
    """Application of a kernel rule, e.g. `andI(left, right)`"""

    rule: str
    args: Tuple[ProofTerm, ...] = ()


@dataclass(frozen=True)
class EllipsisTerm(ProofTerm):
    """`...` in a using list: also use the default facts"""


class MethodKind(str, Enum):
    """Unstructured proof methods accepted after `by`"""
    AUTO = "auto"
    PROP = "prop"
    RCF = "rcf"
    SOLUTION = "solution"
    INDUCTION = "induction"
    GUARD = "guard"


@dataclass(frozen=True)
class Method(Node):
    kind: MethodKind = MethodKind.AUTO
    delta: Optional[Term] = None  # only for guard(δ)


# ============================================================================
# Statements
# ============================================================================

@dataclass(frozen=True)
class Statement(Node):
    """Base class of proof statements"""


@dataclass(frozen=True)
class Block(Statement):
    statements: Tuple[Statement, ...] = ()


@dataclass(frozen=True)
class Assume(Statement):
    """`?name:(φ);` a Demonic test: the fact is assumed"""

    name: Optional[str]
    formula: Formula


@dataclass(frozen=True)
class Assert(Statement):
    """`!name:(φ) using ... by m;` an Angelic test: the fact is proved"""

    name: Optional[str]
    formula: Formula
    method: Optional[Method] = None
    using: Optional[Tuple[ProofTerm, ...]] = None


@dataclass(frozen=True)
class Modify(Statement):
    """
    Assignment `x := f;`, `x := *;` (value None) or the binding form
    `?name:(x := f);`. Elaborated merge assignments have merge=True.
    """

    name: Optional[str]
    var: Var
    value: Optional[Term]
    merge: bool = False

    @property
    def is_random(self) -> bool:
        return self.value is None


@dataclass(frozen=True)
class OdeProof(Statement):
    """
    `{x' = f, ... & domain};` an ODE with a domain-constraint proof.

    Domain statements are Assume, Assert, a duration Modify `?dur:(t := T)`
    and ghost blocks wrapping any of these. After elaboration `pre` holds the
    pre-state variant of each equation's variable (aligned with equations,
    whose vars become post-state variants) and `duration` is the fresh
    evolution-time variable.
    """

    equations: Tuple[OdeEquation, ...]
    domain: Tuple[Statement, ...] = ()
    pre: Tuple[Var, ...] = ()
    duration: Optional[Var] = None

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        if not self.equations:
            raise ValueError("An ODE proof needs at least one equation")
        bases = [eq.var.name for eq in self.equations]
        if len(set(bases)) != len(bases):
            raise ValueError("ODE variables must be pairwise distinct")
        if self.pre and len(self.pre) != len(self.equations):
            raise ValueError("Every ODE equation needs a pre-state variant")


@dataclass(frozen=True)
class LoopInvariant(Node):
    """A loop invariant re-elaborated at the loop merge and body-end states"""

    name: str
    at_merge: Formula
    at_end: Formula


@dataclass(frozen=True)
class DemonicLoop(Statement):
    """`{ body }*` Demon decides how often the body repeats"""

    body: Tuple[Statement, ...]
    entry: Tuple[Tuple[Var, Var], ...] = ()  # (pre variant, merge variant)
    invariant: Optional[LoopInvariant] = None


@dataclass(frozen=True)
class ForLoop(Statement):
    """`for (init; !inv; ?guard; increment) { body }` an Angelic loop"""

    init: Modify
    invariant: Assert
    guard: Assume
    increment: Modify
    body: Tuple[Statement, ...]
    entry: Tuple[Tuple[Var, Var], ...] = ()
    loop_invariant: Optional[LoopInvariant] = None


@dataclass(frozen=True)
class SwitchCase(Node):
    guard_name: Optional[str]
    guard: Formula
    body: Tuple[Statement, ...]


@dataclass(frozen=True)
class Switch(Statement):
    """`switch (pt) { case g => ... }` Angel plays the first true case"""

    scrutinee: Optional[ProofTerm]
    cases: Tuple[SwitchCase, ...]

    def __post_init__(self) -> None:
        if not self.cases:
            raise ValueError("A switch needs at least one case")


@dataclass(frozen=True)
class DemonicChoice(Statement):
    """`{ A ++ B }` Demon picks a branch"""

    branches: Tuple[Block, ...]

    def __post_init__(self) -> None:
        if len(self.branches) < 2:
            raise ValueError("A choice needs at least two branches")


@dataclass(frozen=True)
class Note(Statement):
    name: str
    proof: ProofTerm


class DefinitionKind(str, Enum):
    TERM = "="
    FORMULA = "<->"
    GAME = "::="


@dataclass(frozen=True)
class Let(Statement):
    name: str
    params: Tuple[str, ...]
    body: Union[Term, Formula, Game]
    kind: DefinitionKind


@dataclass(frozen=True)
class ForwardGhost(Statement):
    """`/++ ... ++/` belongs to the proof, erased from the game"""

    body: Tuple[Statement, ...]


@dataclass(frozen=True)
class InverseGhost(Statement):
    """`/-- ... --/` belongs to the game, unusable in the proof"""

    body: Tuple[Statement, ...]


@dataclass(frozen=True)
class LabelStmt(Statement):
    """`name:` or `name(x, y):`"""

    name: str
    params: Tuple[Var, ...] = ()


@dataclass(frozen=True)
class Print(Statement):
    expr: Union[Term, Formula]


# ============================================================================
# Commands
# ============================================================================

@dataclass(frozen=True)
class Command(Node):
    """Base class of document commands"""


@dataclass(frozen=True)
class Conclusion(Command):
    """`conclusion name;` or `conclusion name with (f1, f2);`"""

    proof: str
    selected: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class Proves(Command):
    """`proves name "[α]φ";` with the target parsed eagerly"""

    proof: str
    target: Formula
    text: str = ""
