"""
Domain Layer - SSA State and Label Registry

Every source variable x is elaborated to a family of variants x_i, with x_0
the initial value. Counters are global and monotone, so no variant is ever
assigned twice, even across branches and loop iterations.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, Mapping, Optional, Tuple

from src.domain.entities.source import SourceSpan
from src.domain.entities.statement import Statement
from src.domain.entities.term import Var
from src.domain.exceptions import ElaborationError


class SsaState:
    """
    Entity: current variant per base variable plus the global counters.

    `snapshot()` and `restore()` let the elaborator walk branches from a
    common starting point.
    """

    def __init__(self) -> None:
        self._counters: Dict[str, int] = {}
        self._current: Dict[str, int] = {}

    def current(self, name: str) -> Var:
        return Var(name, self._current.get(name, 0))

    def index_of(self, name: str) -> int:
        return self._current.get(name, 0)

    def fresh(self, name: str) -> Var:
        """Allocate the next variant of name and make it current"""
        index = self._counters.get(name, 0) + 1
        self._counters[name] = index
        self._current[name] = index
        return Var(name, index)

    def allocate(self, name: str) -> Var:
        """Allocate a variant without making it current"""
        index = self._counters.get(name, 0) + 1
        self._counters[name] = index
        return Var(name, index)

    def set_current(self, var: Var) -> None:
        if var.index is None:
            raise ElaborationError(f"variable {var.name} has no SSA index")
        self._current[var.name] = var.index

    def snapshot(self) -> Dict[str, int]:
        return dict(self._current)

    def restore(self, snapshot: Mapping[str, int]) -> None:
        self._current = dict(snapshot)

    def __repr__(self) -> str:
        return f"SsaState(current={self._current})"


@dataclass
class LabelEntry:
    """
    A labelled program point: its parameters and, for each base variable,
    the variant current at the label.
    """

    name: str
    params: Tuple[Var, ...]
    snapshot: Dict[str, int]
    site: object = None
    span: Optional[SourceSpan] = None

    def variant(self, name: str) -> Var:
        return Var(name, self.snapshot.get(name, 0))


class LabelRegistry:
    """Document-wide map from label names to labelled points"""

    def __init__(self) -> None:
        self._labels: Dict[str, LabelEntry] = {}

    def define(self, entry: LabelEntry) -> None:
        if entry.name in self._labels:
            raise ElaborationError(f"label {entry.name} is defined twice", entry.span)
        self._labels[entry.name] = entry

    def get(self, name: str, span: Optional[SourceSpan] = None) -> LabelEntry:
        entry = self._labels.get(name)
        if entry is None:
            raise ElaborationError(f"unknown label {name}", span)
        return entry

    def __contains__(self, name: str) -> bool:
        return name in self._labels

    def __iter__(self) -> Iterator[LabelEntry]:
        return iter(self._labels.values())

    def __len__(self) -> int:
        return len(self._labels)


@dataclass(frozen=True)
class Difference:
    """
    Statements passed through on every path between a referrer and a label,
    in execution order, with the base variables bound nondeterministically
    along the way.
    """

    statements: Tuple[Statement, ...] = ()
    nondeterministic: FrozenSet[str] = field(default_factory=frozenset)

    @property
    def is_deterministic(self) -> bool:
        return not self.nondeterministic
