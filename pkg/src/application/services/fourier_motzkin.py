"""
Application Layer - Fourier-Motzkin Elimination

Exact feasibility of a conjunction of linear constraints over the rationals.
Equalities are eliminated first by Gaussian substitution, then each variable
is projected away by combining its lower and upper bounds. Strictness is
tracked per constraint, so `x > 0 & x < 0` and `x > 0 & -x >= 0` are both
refuted. A feasible system comes with a rational model, built by assigning
the eliminated variables in reverse order.
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Generic, Hashable, List, Mapping, Optional, Sequence, Tuple, TypeVar

K = TypeVar("K", bound=Hashable)


class Relation(str, Enum):
    """How a linear form compares to zero"""
    GT = ">"
    GE = ">="
    EQ = "="


class EliminationBudgetExceeded(Exception):
    """The projection produced more constraints than allowed"""


@dataclass(frozen=True)
class LinearConstraint(Generic[K]):
    """sum(coefficients[k] * k) + constant  REL  0"""

    coefficients: Tuple[Tuple[K, Fraction], ...]
    constant: Fraction
    relation: Relation

    @classmethod
    def build(cls, coefficients: Mapping[K, Fraction], constant: Fraction, relation: Relation) -> "LinearConstraint[K]":
        items = tuple(sorted(
            ((k, Fraction(c)) for k, c in coefficients.items() if c != 0),
            key=lambda item: repr(item[0]),
        ))
        return cls(items, Fraction(constant), relation)

    def coefficient(self, key: K) -> Fraction:
        for k, c in self.coefficients:
            if k == key:
                return c
        return Fraction(0)

    @property
    def variables(self) -> List[K]:
        return [k for k, _ in self.coefficients]

    @property
    def is_trivial(self) -> bool:
        return not self.coefficients

    def holds_trivially(self) -> bool:
        """Truth of a constraint without variables"""
        if self.relation == Relation.GT:
            return self.constant > 0
        if self.relation == Relation.GE:
            return self.constant >= 0
        return self.constant == 0

    def evaluate(self, model: Mapping[K, Fraction]) -> Fraction:
        return self.constant + sum((c * model.get(k, Fraction(0)) for k, c in self.coefficients), Fraction(0))

    def satisfied_by(self, model: Mapping[K, Fraction]) -> bool:
        value = self.evaluate(model)
        if self.relation == Relation.GT:
            return value > 0
        if self.relation == Relation.GE:
            return value >= 0
        return value == 0

    def normalized(self) -> "LinearConstraint[K]":
        """Scale so that the first coefficient has magnitude one"""
        if not self.coefficients:
            return self
        lead = abs(self.coefficients[0][1])
        if self.relation == Relation.EQ and self.coefficients[0][1] < 0:
            lead = -lead
        return LinearConstraint(
            tuple((k, c / lead) for k, c in self.coefficients),
            self.constant / lead,
            self.relation,
        )


def _combine(
    first: LinearConstraint[K], a: Fraction,
    second: LinearConstraint[K], b: Fraction,
    relation: Relation,
) -> LinearConstraint[K]:
    """a * first + b * second"""
    coefficients: Dict[K, Fraction] = {}
    for k, c in first.coefficients:
        coefficients[k] = coefficients.get(k, Fraction(0)) + a * c
    for k, c in second.coefficients:
        coefficients[k] = coefficients.get(k, Fraction(0)) + b * c
    return LinearConstraint.build(coefficients, a * first.constant + b * second.constant, relation)


def _substitute(constraint: LinearConstraint[K], pivot: K, solution: LinearConstraint[K]) -> LinearConstraint[K]:
    """Replace pivot using the equality `solution` (pivot coefficient non-zero)"""
    c = constraint.coefficient(pivot)
    if c == 0:
        return constraint
    factor = -c / solution.coefficient(pivot)
    return _combine(constraint, Fraction(1), solution, factor, constraint.relation)


def _pick_pivot(constraints: Sequence[LinearConstraint[K]]) -> Optional[K]:
    """The variable whose elimination creates the fewest new constraints"""
    counts: Dict[K, List[int]] = {}
    for constraint in constraints:
        for k, c in constraint.coefficients:
            lower_upper = counts.setdefault(k, [0, 0])
            lower_upper[0 if c > 0 else 1] += 1
    if not counts:
        return None
    return min(counts, key=lambda k: (counts[k][0] * counts[k][1] - sum(counts[k]), repr(k)))


@dataclass
class _Step(Generic[K]):
    pivot: K
    equality: Optional[LinearConstraint[K]] = None
    lower: Tuple[LinearConstraint[K], ...] = ()
    upper: Tuple[LinearConstraint[K], ...] = ()


def _dedupe(constraints: Sequence[LinearConstraint[K]]) -> List[LinearConstraint[K]]:
    seen = set()
    result = []
    for constraint in constraints:
        norm = constraint.normalized()
        if norm not in seen:
            seen.add(norm)
            result.append(norm)
    return result


def feasible(
    constraints: Sequence[LinearConstraint[K]],
    limit: int = 4000,
) -> Optional[Dict[K, Fraction]]:
    """
    A rational model of the constraints, or None when they are infeasible.

    Raises EliminationBudgetExceeded when more than `limit` constraints
    would be alive at once.
    """
    steps: List[_Step[K]] = []
    current = _dedupe(constraints)

    # Gaussian elimination of equalities
    while True:
        equality = next((c for c in current if c.relation == Relation.EQ and not c.is_trivial), None)
        if equality is None:
            break
        pivot = equality.variables[0]
        steps.append(_Step(pivot, equality=equality))
        current = _dedupe([_substitute(c, pivot, equality) for c in current if c is not equality])

    # projection of inequalities
    while True:
        if any(c.is_trivial and not c.holds_trivially() for c in current):
            return None
        current = [c for c in current if not c.is_trivial]
        pivot = _pick_pivot(current)
        if pivot is None:
            break
        lower = tuple(c for c in current if c.coefficient(pivot) > 0)
        upper = tuple(c for c in current if c.coefficient(pivot) < 0)
        rest = [c for c in current if c.coefficient(pivot) == 0]
        steps.append(_Step(pivot, lower=lower, upper=upper))
        combined = []
        for low in lower:
            for up in upper:
                relation = Relation.GT if Relation.GT in (low.relation, up.relation) else Relation.GE
                combined.append(_combine(low, -up.coefficient(pivot), up, low.coefficient(pivot), relation))
        current = _dedupe(rest + combined)
        if len(current) > limit:
            raise EliminationBudgetExceeded(f"{len(current)} constraints after eliminating {pivot!r}")

    return _build_model(steps)


def _bound(constraint: LinearConstraint[K], pivot: K, model: Mapping[K, Fraction]) -> Fraction:
    """Value of pivot that makes the constraint an equality, given the model"""
    c = constraint.coefficient(pivot)
    rest = constraint.constant + sum(
        (coeff * model.get(k, Fraction(0)) for k, coeff in constraint.coefficients if k != pivot),
        Fraction(0),
    )
    return -rest / c


def _build_model(steps: Sequence[_Step[K]]) -> Dict[K, Fraction]:
    model: Dict[K, Fraction] = {}
    for step in reversed(steps):
        pivot = step.pivot
        if step.equality is not None:
            model[pivot] = _bound(step.equality, pivot, model)
            continue
        lows = [(_bound(c, pivot, model), c.relation == Relation.GT) for c in step.lower]
        highs = [(_bound(c, pivot, model), c.relation == Relation.GT) for c in step.upper]
        low = max(lows, key=lambda item: (item[0], item[1])) if lows else None
        high = min(highs, key=lambda item: (item[0], not item[1])) if highs else None
        if low is not None and high is not None:
            model[pivot] = low[0] if low[0] == high[0] else (low[0] + high[0]) / 2
        elif low is not None:
            model[pivot] = low[0] + 1 if low[1] else low[0]
        elif high is not None:
            model[pivot] = high[0] - 1 if high[1] else high[0]
        else:
            model[pivot] = Fraction(0)
    return model
