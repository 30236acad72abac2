"""
Application Layer - SSA Elaboration Service

Turns a parsed proof document into static-single-assignment form and
resolves every located expression `e@label(args)`.

Elaboration runs in three passes:
1. Renaming. Every assignment gets a fresh variant, reads use the current
   one, choices and loops get merge variants, labels record a snapshot of
   the current variants. Located expressions are replaced by placeholders
   and queued with the program point that refers to them.
2. Resolution. Each placeholder is resolved on demand: backward references
   read the label snapshot, forward references substitute the statements
   between referrer and label in reverse order. A placeholder met again
   while it is being resolved is a cycle.
3. Placement. Resolved expressions replace the placeholders.

Key principles:
- Counters are global, so a variant is never assigned twice on any path
- A resolved expression only mentions variants assigned at the referrer
- Labels inside loop bodies are only addressable from the same iteration
"""

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import (
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    TypeVar,
)

from src.application.services.ode_service import solve_system
from src.domain.entities import (
    Apply,
    Assert,
    Assume,
    Block,
    Box,
    DefinitionKind,
    DefinitionRegistry,
    DemonicChoice,
    DemonicLoop,
    Diagnostic,
    Diamond,
    Exists,
    Forall,
    ForLoop,
    Formula,
    ForwardGhost,
    FrameKind,
    GameRef,
    InverseGhost,
    LabelEntry,
    LabelRegistry,
    LabelStmt,
    Let,
    LocatedFormula,
    LocatedTerm,
    LoopInvariant,
    Method,
    Modify,
    Node,
    Note,
    OdeEquation,
    OdeProof,
    PendingFormula,
    PendingTerm,
    PredApply,
    Print,
    ProofDocument,
    Severity,
    SsaState,
    Statement,
    Sub,
    Switch,
    SwitchCase,
    Term,
    Var,
)
from src.domain.entities.analysis import free_variables, map_variables, substitute
from src.domain.entities.definitions import Definition
from src.domain.entities.elaborated import ElaboratedDocument, Resolution
from src.domain.entities.node import map_children, walk
from src.domain.entities.ode_system import OdeSystem
from src.domain.entities.source import SourceSpan
from src.domain.exceptions import (
    CheckerError,
    DefinitionError,
    ElaborationError,
    LabelCycleError,
)

logger = logging.getLogger(__name__)

K = TypeVar("K", bound=Hashable)


def find_cycle(graph: Mapping[K, Iterable[K]]) -> Optional[List[K]]:
    """Return the nodes of some cycle of a directed graph, or None"""
    grey: Set[K] = set()
    black: Set[K] = set()
    path: List[K] = []

    def visit(node: K) -> Optional[List[K]]:
        grey.add(node)
        path.append(node)
        for succ in graph.get(node, ()):
            if succ in grey:
                return path[path.index(succ):]
            if succ not in black:
                found = visit(succ)
                if found:
                    return found
        path.pop()
        grey.discard(node)
        black.add(node)
        return None

    for node in list(graph):
        if node not in black:
            found = visit(node)
            if found:
                return found
    return None


# ============================================================================
# Program points
# ============================================================================

@dataclass(eq=False)
class _Frame:
    """One elaborated statement list and where it hangs in the tree"""

    kind: FrameKind
    parent: Optional["_Frame"] = None
    parent_index: int = -1
    items: List[Optional[Statement]] = field(default_factory=list)
    sources: List[Optional[Statement]] = field(default_factory=list)

    def statements(self, start: int = 0, stop: Optional[int] = None) -> List[Statement]:
        return [s for s in self.items[start:stop] if s is not None]


@dataclass(frozen=True, eq=False)
class ProgramPoint:
    """A statement slot, plus the variants assigned on the way there"""

    frame: _Frame
    index: int
    assigned: FrozenSet[Var]

    def path(self) -> List[Tuple[_Frame, int]]:
        result = [(self.frame, self.index)]
        frame = self.frame
        while frame.parent is not None:
            result.append((frame.parent, frame.parent_index))
            frame = frame.parent
        result.reverse()
        return result


@dataclass(eq=False)
class LocatedRequest:
    """A located expression waiting for resolution"""

    key: int
    expr: Node  # definitions expanded, variables not yet renamed
    label: str
    args: Tuple[Term, ...]
    referrer: ProgramPoint
    source: Node
    span: Optional[SourceSpan] = None


def _assigned_bases(statements: Iterable[Statement]) -> Set[str]:
    """Base variables a source statement list may assign"""
    names: Set[str] = set()
    for stmt in statements:
        if isinstance(stmt, Modify):
            names.add(stmt.var.name)
        elif isinstance(stmt, OdeProof):
            names.update(eq.var.name for eq in stmt.equations)
        elif isinstance(stmt, Block):
            names |= _assigned_bases(stmt.statements)
        elif isinstance(stmt, DemonicChoice):
            for branch in stmt.branches:
                names |= _assigned_bases(branch.statements)
        elif isinstance(stmt, Switch):
            for case in stmt.cases:
                names |= _assigned_bases(case.body)
        elif isinstance(stmt, (DemonicLoop, ForwardGhost, InverseGhost)):
            names |= _assigned_bases(stmt.body)
        elif isinstance(stmt, ForLoop):
            names |= {stmt.init.var.name, stmt.increment.var.name}
            names |= _assigned_bases(stmt.body)
    return names


def written_variants(stmt: Statement) -> Set[Var]:
    """SSA variants an elaborated statement assigns"""
    written: Set[Var] = set()
    for node in walk(stmt):
        if isinstance(node, Modify):
            written.add(node.var)
        elif isinstance(node, OdeProof):
            written.update(eq.var for eq in node.equations)
            if node.duration is not None:
                written.add(node.duration)
        elif isinstance(node, (DemonicLoop, ForLoop)):
            written.update(merge for _, merge in node.entry)
    return written


# ============================================================================
# Pass 1: renaming
# ============================================================================

class _Renamer:
    """Walks source statements, renaming variables and queueing located expressions"""

    def __init__(self) -> None:
        self.state = SsaState()
        self.labels = LabelRegistry()
        self.requests: List[LocatedRequest] = []
        self.root = _Frame(FrameKind.ROOT)
        self.frame = self.root
        self.index = -1
        self.assigned: Set[Var] = set()
        self.definitions = DefinitionRegistry()
        self.source_definitions = DefinitionRegistry()
        self._anonymous = 0

    def run(self, statements: Sequence[Statement]) -> None:
        self._elaborate_list(self.root, statements)

    # ------------------------------------------------------------------
    # Frames and scopes
    # ------------------------------------------------------------------

    def _open(self, kind: FrameKind) -> _Frame:
        return _Frame(kind, self.frame, self.index)

    @contextmanager
    def _scope(self) -> Iterator[None]:
        saved = self.definitions
        self.definitions = saved.child()
        try:
            yield
        finally:
            self.definitions = saved

    def _elaborate_list(self, frame: _Frame, statements: Sequence[Statement]) -> None:
        saved = (self.frame, self.index)
        self.frame = frame
        try:
            for stmt in statements:
                frame.items.append(None)
                frame.sources.append(stmt)
                self.index = len(frame.items) - 1
                frame.items[self.index] = self._statement(stmt)
        finally:
            self.frame, self.index = saved

    def point(self) -> ProgramPoint:
        return ProgramPoint(self.frame, self.index, frozenset(self.assigned))

    def _name(self, name: Optional[str]) -> str:
        if name is not None:
            return name
        generated = f"_{self._anonymous}"
        self._anonymous += 1
        return generated

    # ------------------------------------------------------------------
    # Expressions
    # ------------------------------------------------------------------

    def expr(self, node: Node) -> Node:
        if isinstance(node, Var):
            if node.index is not None:
                return node
            current = self.state.current(node.name)
            return Var(current.name, current.index, span=node.span)
        if isinstance(node, (Apply, PredApply)):
            return self._invoke(node)
        if isinstance(node, (LocatedTerm, LocatedFormula)):
            return self._locate(node)
        if isinstance(node, (Forall, Exists)):
            bound = self.state.allocate(node.var.name)
            saved = self.state.snapshot()
            self.state.set_current(bound)
            try:
                body = self.expr(node.body)
            finally:
                self.state.restore(saved)
            return type(node)(bound, body, span=node.span)
        if isinstance(node, (Box, Diamond)):
            raise ElaborationError("modal formulas are only allowed in proves targets", node.span)
        return map_children(node, self.expr)

    def term(self, term: Term) -> Term:
        return self.expr(term)  # type: ignore[return-value]

    def formula(self, formula: Formula) -> Formula:
        return self.expr(formula)  # type: ignore[return-value]

    def _require(self, node: Node) -> Definition:
        if isinstance(node, Apply):
            kind = DefinitionKind.TERM
        elif isinstance(node, PredApply):
            kind = DefinitionKind.FORMULA
        else:
            kind = DefinitionKind.GAME
        try:
            return self.definitions.require(node.name, kind, len(node.args))  # type: ignore[attr-defined]
        except DefinitionError as exc:
            raise exc.with_span(node.span)

    def _invoke(self, node: Node) -> Node:
        definition = self._require(node)
        args = {p: self.term(a) for p, a in zip(definition.params, node.args)}  # type: ignore[attr-defined]

        def rename(v: Var) -> Term:
            if v.index is not None:
                return v
            if v.name in args:
                return args[v.name]
            return self.state.current(v.name)

        return map_variables(definition.body, rename)

    def _expand_raw(self, node: Node, params: Tuple[str, ...] = ()) -> Node:
        """Expand definitions without renaming; located parts become placeholders"""
        if isinstance(node, (Apply, PredApply, GameRef)):
            definition = self._require(node)
            args = tuple(self._expand_raw(a, params) for a in node.args)  # type: ignore[attr-defined]
            return substitute(definition.body, {Var(p): a for p, a in zip(definition.params, args)})
        if isinstance(node, (LocatedTerm, LocatedFormula)):
            used = {v.name for v in free_variables(node.expr) | _arg_variables(node)}
            clash = sorted(used & set(params))
            if clash:
                raise DefinitionError(
                    f"parameter {clash[0]} cannot be used inside a located expression",
                    node.span,
                )
            return self._locate(node)
        return map_children(node, lambda child: self._expand_raw(child, params))

    def _locate(self, node: Node) -> Node:
        inner = self._expand_raw(node.expr)  # type: ignore[attr-defined]
        args = tuple(self.term(a) for a in node.args)  # type: ignore[attr-defined]
        key = len(self.requests)
        self.requests.append(LocatedRequest(
            key=key,
            expr=inner,
            label=node.label,  # type: ignore[attr-defined]
            args=args,
            referrer=self.point(),
            source=node,
            span=node.span,
        ))
        if isinstance(node, LocatedFormula):
            return PendingFormula(key, span=node.span)
        return PendingTerm(key, span=node.span)

    def _method(self, method: Optional[Method]) -> Optional[Method]:
        if method is None or method.delta is None:
            return method
        return Method(method.kind, self.term(method.delta), span=method.span)

    # ------------------------------------------------------------------
    # Statements
    # ------------------------------------------------------------------

    def _statement(self, stmt: Statement) -> Statement:
        if isinstance(stmt, Assume):
            return Assume(self._name(stmt.name), self.formula(stmt.formula), span=stmt.span)
        if isinstance(stmt, Assert):
            return self._assert(stmt)
        if isinstance(stmt, Modify):
            return self._modify(stmt)
        if isinstance(stmt, Block):
            frame = self._open(FrameKind.BLOCK)
            with self._scope():
                self._elaborate_list(frame, stmt.statements)
            return Block(tuple(frame.statements()), span=stmt.span)
        if isinstance(stmt, (ForwardGhost, InverseGhost)):
            kind = FrameKind.FORWARD_GHOST if isinstance(stmt, ForwardGhost) else FrameKind.INVERSE_GHOST
            frame = self._open(kind)
            with self._scope():
                self._elaborate_list(frame, stmt.body)
            return type(stmt)(tuple(frame.statements()), span=stmt.span)
        if isinstance(stmt, OdeProof):
            return self._ode(stmt)
        if isinstance(stmt, DemonicChoice):
            frames = self._branches([branch.statements for branch in stmt.branches])
            return DemonicChoice(
                tuple(Block(tuple(f.statements()), span=b.span) for f, b in zip(frames, stmt.branches)),
                span=stmt.span,
            )
        if isinstance(stmt, Switch):
            return self._switch(stmt)
        if isinstance(stmt, DemonicLoop):
            return self._demonic_loop(stmt)
        if isinstance(stmt, ForLoop):
            return self._for_loop(stmt)
        if isinstance(stmt, Let):
            return self._let(stmt)
        if isinstance(stmt, LabelStmt):
            return self._label(stmt)
        if isinstance(stmt, Print):
            return Print(self.expr(stmt.expr), span=stmt.span)  # type: ignore[arg-type]
        if isinstance(stmt, Note):
            return stmt
        raise ElaborationError(f"unexpected statement {type(stmt).__name__}", stmt.span)

    def _assert(self, stmt: Assert) -> Assert:
        return Assert(
            self._name(stmt.name),
            self.formula(stmt.formula),
            self._method(stmt.method),
            stmt.using,
            span=stmt.span,
        )

    def _modify(self, stmt: Modify) -> Modify:
        value = None if stmt.value is None else self.term(stmt.value)
        var = self.state.fresh(stmt.var.name)
        self.assigned.add(var)
        return Modify(stmt.name, var, value, span=stmt.span)

    def _ode(self, stmt: OdeProof) -> OdeProof:
        pre = tuple(self.state.current(eq.var.name) for eq in stmt.equations)
        durations: Dict[int, Term] = {}
        for clause in walk(Block(stmt.domain)):
            if isinstance(clause, Modify):
                if clause.value is None:
                    raise ElaborationError("an ODE duration must be a term", clause.span)
                durations[id(clause)] = self.term(clause.value)

        posts = [self.state.fresh(eq.var.name) for eq in stmt.equations]
        duration = self.state.allocate("_dur")
        self.assigned.update(posts)
        self.assigned.add(duration)

        equations = tuple(
            OdeEquation(post, self.term(eq.rhs), eq.name, eq.ghost, span=eq.span)
            for post, eq in zip(posts, stmt.equations)
        )
        domain = tuple(self._domain_clause(c, durations) for c in stmt.domain)
        return OdeProof(equations, domain, pre, duration, span=stmt.span)

    def _domain_clause(self, clause: Statement, durations: Dict[int, Term]) -> Statement:
        if isinstance(clause, (ForwardGhost, InverseGhost)):
            body = tuple(self._domain_clause(c, durations) for c in clause.body)
            return type(clause)(body, span=clause.span)
        if isinstance(clause, Modify):
            target = self.state.current(clause.var.name)
            return Modify(clause.name, target, durations[id(clause)], span=clause.span)
        if isinstance(clause, Assume):
            return Assume(self._name(clause.name), self.formula(clause.formula), span=clause.span)
        if isinstance(clause, Assert):
            return self._assert(clause)
        raise ElaborationError("unexpected statement in an ODE domain", clause.span)

    def _branches(self, bodies: Sequence[Sequence[Statement]]) -> List[_Frame]:
        """Elaborate alternatives from a common state and merge them"""
        start = self.state.snapshot()
        assigned = set(self.assigned)
        frames: List[_Frame] = []
        ends: List[Dict[str, int]] = []
        for body in bodies:
            self.state.restore(start)
            self.assigned = set(assigned)
            frame = self._open(FrameKind.BRANCH)
            with self._scope():
                self._elaborate_list(frame, body)
            frames.append(frame)
            ends.append(self.state.snapshot())

        self.state.restore(start)
        merges: Dict[str, Var] = {}
        for name in sorted({n for end in ends for n in end}):
            if len({end.get(name, 0) for end in ends}) > 1:
                merges[name] = self.state.fresh(name)
        for frame, end in zip(frames, ends):
            for name, merge in merges.items():
                frame.items.append(Modify(None, merge, Var(name, end.get(name, 0)), merge=True))
                frame.sources.append(None)
        self.assigned = assigned | set(merges.values())
        return frames

    def _switch(self, stmt: Switch) -> Switch:
        guards = [(self._name(c.guard_name), self.formula(c.guard)) for c in stmt.cases]
        frames = self._branches([c.body for c in stmt.cases])
        cases = tuple(
            SwitchCase(name, guard, tuple(frame.statements()), span=case.span)
            for (name, guard), frame, case in zip(guards, frames, stmt.cases)
        )
        return Switch(stmt.scrutinee, cases, span=stmt.span)

    def _enter_loop(self, bases: Iterable[str]) -> Tuple[Tuple[Var, Var], ...]:
        entry = []
        for name in sorted(bases):
            pre = self.state.current(name)
            merge = self.state.fresh(name)
            self.assigned.add(merge)
            entry.append((pre, merge))
        return tuple(entry)

    def _preceding_fact(self) -> Optional[Tuple[str, Node]]:
        """The fact statement right before the current slot, if any"""
        for i in range(self.index - 1, -1, -1):
            source = self.frame.sources[i]
            item = self.frame.items[i]
            if isinstance(source, LabelStmt):
                continue
            if isinstance(source, (Assume, Assert)):
                return item.name, source.formula  # type: ignore[union-attr]
            if isinstance(source, ForwardGhost) and isinstance(item, ForwardGhost):
                for inner_source, inner_item in zip(reversed(source.body), reversed(item.body)):
                    if isinstance(inner_source, LabelStmt):
                        continue
                    if isinstance(inner_source, (Assume, Assert)):
                        return inner_item.name, inner_source.formula  # type: ignore[attr-defined]
                    return None
            return None
        return None

    def _demonic_loop(self, stmt: DemonicLoop) -> DemonicLoop:
        fact = self._preceding_fact()
        entry = self._enter_loop(_assigned_bases(stmt.body))
        merge_state = self.state.snapshot()
        merge_assigned = set(self.assigned)
        at_merge = self.formula(fact[1]) if fact else None

        frame = self._open(FrameKind.LOOP_BODY)
        with self._scope():
            self._elaborate_list(frame, stmt.body)
        at_end = self.formula(fact[1]) if fact else None

        self.state.restore(merge_state)
        self.assigned = merge_assigned
        invariant = LoopInvariant(fact[0], at_merge, at_end) if fact else None
        return DemonicLoop(tuple(frame.statements()), entry, invariant, span=stmt.span)

    def _for_loop(self, stmt: ForLoop) -> ForLoop:
        if stmt.init.value is None or stmt.increment.value is None:
            raise ElaborationError("for-loop initialization and increment must be terms", stmt.span)
        init = self._modify(stmt.init)
        invariant = self._assert(stmt.invariant)
        source_invariant = stmt.invariant.formula

        bases = _assigned_bases(stmt.body) | {stmt.increment.var.name}
        entry = self._enter_loop(bases)
        merge_state = self.state.snapshot()
        merge_assigned = set(self.assigned)
        at_merge = self.formula(source_invariant)
        guard = Assume(self._name(stmt.guard.name), self.formula(stmt.guard.formula), span=stmt.guard.span)

        frame = self._open(FrameKind.LOOP_BODY)
        with self._scope():
            self._elaborate_list(frame, stmt.body)
        increment = self._modify(stmt.increment)
        at_end = self.formula(source_invariant)

        self.state.restore(merge_state)
        self.assigned = merge_assigned
        return ForLoop(
            init=init,
            invariant=invariant,
            guard=guard,
            increment=increment,
            body=tuple(frame.statements()),
            entry=entry,
            loop_invariant=LoopInvariant(invariant.name, at_merge, at_end),  # type: ignore[arg-type]
            span=stmt.span,
        )

    def _let(self, stmt: Let) -> Let:
        body = self._expand_raw(stmt.body, stmt.params)
        try:
            self.definitions.define(Definition(stmt.name, stmt.params, body, stmt.kind))
            if self.frame is self.root:
                self.source_definitions.define(Definition(stmt.name, stmt.params, stmt.body, stmt.kind))
        except DefinitionError as exc:
            raise exc.with_span(stmt.span)
        return Let(stmt.name, stmt.params, body, stmt.kind, span=stmt.span)  # type: ignore[arg-type]

    def _label(self, stmt: LabelStmt) -> LabelStmt:
        names = [p.name for p in stmt.params]
        if len(set(names)) != len(names):
            raise ElaborationError(f"label {stmt.name} repeats a parameter", stmt.span)
        self.labels.define(LabelEntry(
            name=stmt.name,
            params=stmt.params,
            snapshot=self.state.snapshot(),
            site=self.point(),
            span=stmt.span,
        ))
        return LabelStmt(stmt.name, tuple(self.state.current(n) for n in names), span=stmt.span)


def _arg_variables(node: Node) -> Set[Var]:
    result: Set[Var] = set()
    for arg in node.args:  # type: ignore[attr-defined]
        result |= free_variables(arg)
    return result


# ============================================================================
# Pass 2: resolution
# ============================================================================

class LabelResolver:
    """
    Resolves queued located expressions lazily, recording which placeholder
    needed which so that cycles can be reported with their labels.
    """

    def __init__(self, requests: Sequence[LocatedRequest], labels: LabelRegistry):
        self.requests = {r.key: r for r in requests}
        self.labels = labels
        self.resolved: Dict[int, Node] = {}
        self.graph: Dict[int, Set[int]] = {key: set() for key in self.requests}
        self.warnings: List[Diagnostic] = []
        self._active: List[int] = []

    def resolve_all(self) -> Dict[int, Node]:
        for key in sorted(self.requests):
            self.resolve(key)
        return self.resolved

    def resolve(self, key: int) -> Node:
        if key in self.resolved:
            return self.resolved[key]
        request = self.requests[key]
        if key in self._active:
            raise self._cycle_error(request)
        self._active.append(key)
        try:
            result = self._compute(request)
        except CheckerError as exc:
            raise exc.with_span(request.span)
        finally:
            self._active.pop()
        self.resolved[key] = result
        return result

    def fill(self, node: Node, owner: int) -> Node:
        """Replace placeholders in node by their resolutions"""
        if isinstance(node, (PendingTerm, PendingFormula)):
            self.graph[owner].add(node.key)
            return self.resolve(node.key)
        return map_children(node, lambda child: self.fill(child, owner))

    def _cycle_error(self, request: LocatedRequest) -> LabelCycleError:
        cycle = find_cycle(self.graph) or [request.key]
        labels = set()
        for key in cycle:
            labels.add(self.requests[key].label)
            labels.update(self.requests[dep].label for dep in self.graph[key])
        return LabelCycleError(labels, request.span)

    # ------------------------------------------------------------------
    # One request
    # ------------------------------------------------------------------

    def _compute(self, request: LocatedRequest) -> Node:
        entry = self.labels.get(request.label, request.span)
        if len(request.args) != len(entry.params):
            raise ElaborationError(
                f"label {entry.name} expects {len(entry.params)} argument(s), got {len(request.args)}",
                request.span,
            )
        params = self.hypothetical_bindings(request, entry)
        expr = self.fill(request.expr, request.key)
        expr = map_variables(expr, lambda v: entry.variant(v.name) if v.index is None else v)
        expr = substitute(expr, params)

        referrer = request.referrer
        site: ProgramPoint = entry.site  # type: ignore[assignment]
        ref_path, label_path = referrer.path(), site.path()
        common = 0
        while (
            common + 1 < min(len(ref_path), len(label_path))
            and ref_path[common + 1][0] is label_path[common + 1][0]
        ):
            common += 1
        ref_index, label_index = ref_path[common][1], label_path[common][1]
        label_nested = len(label_path) - 1 > common
        ref_nested = len(ref_path) - 1 > common

        if label_index < ref_index or (label_index == ref_index and not label_nested):
            result = self.resolve_backward(expr, request, entry, label_path[common + 1:], params)
        elif label_index == ref_index:
            if ref_nested:
                self._warn_parallel(request)
            statements = self._entry_part(label_path[common + 1:], request)
            result = self._substitute_back(expr, statements, params, request)
        else:
            result = self.resolve_forward(expr, request, ref_path, label_path, common, params)

        self._check_mobile(result, request)
        return result

    def hypothetical_bindings(self, request: LocatedRequest, entry: LabelEntry) -> Dict[Var, Term]:
        """Label parameters at the label's snapshot mapped to the resolved arguments"""
        args = [self.fill(a, request.key) for a in request.args]
        return {entry.variant(p.name): a for p, a in zip(entry.params, args)}  # type: ignore[misc]

    def resolve_backward(
        self,
        expr: Node,
        request: LocatedRequest,
        entry: LabelEntry,
        label_frames: Sequence[Tuple[_Frame, int]],
        params: Dict[Var, Term],
    ) -> Node:
        if any(frame.kind == FrameKind.BRANCH for frame, _ in label_frames):
            statements = self._entry_part(label_frames, request)
            return self._substitute_back(expr, statements, params, request)
        if any(frame.kind == FrameKind.LOOP_BODY for frame, _ in label_frames):
            self._entry_part(label_frames, request)
        return expr

    def resolve_forward(
        self,
        expr: Node,
        request: LocatedRequest,
        ref_path: List[Tuple[_Frame, int]],
        label_path: List[Tuple[_Frame, int]],
        common: int,
        params: Dict[Var, Term],
    ) -> Node:
        statements: List[Statement] = []
        deepest = len(ref_path) - 1
        for level in range(deepest, common, -1):
            frame, index = ref_path[level]
            if frame.kind == FrameKind.LOOP_BODY:
                raise ElaborationError(
                    f"reference to label {request.label} leaves a loop body",
                    request.span,
                    hint="labels after a loop can only be referenced from outside the loop",
                )
            statements.extend(frame.statements(index if level == deepest else index + 1))
        frame, ref_index = ref_path[common]
        start = ref_index + 1 if deepest > common else ref_index
        statements.extend(frame.statements(start, label_path[common][1]))
        statements.extend(self._entry_part(label_path[common + 1:], request))
        return self._substitute_back(expr, statements, params, request)

    def _entry_part(
        self,
        label_frames: Sequence[Tuple[_Frame, int]],
        request: LocatedRequest,
    ) -> List[Statement]:
        statements: List[Statement] = []
        for frame, index in label_frames:
            if frame.kind == FrameKind.LOOP_BODY:
                raise ElaborationError(
                    f"label {request.label} lies inside a loop body and has no single value outside it",
                    request.span,
                    hint="move the label out of the loop, or reference it from the same iteration",
                )
            statements.extend(frame.statements(0, index))
        return statements

    def _warn_parallel(self, request: LocatedRequest) -> None:
        message = f"{request.label} is referenced from a parallel branch"
        logger.warning("%s at %s", message, request.span)
        self.warnings.append(Diagnostic(Severity.WARNING, message, request.span))

    # ------------------------------------------------------------------
    # Reverse substitution
    # ------------------------------------------------------------------

    def _substitute_back(
        self,
        expr: Node,
        statements: Sequence[Statement],
        params: Dict[Var, Term],
        request: LocatedRequest,
    ) -> Node:
        unresolved: Set[str] = set()
        for stmt in reversed(statements):
            expr = self._step_back(expr, stmt, params, request, unresolved)
        if unresolved:
            names = ", ".join(sorted(unresolved))
            raise ElaborationError(
                f"{request.label} cannot be resolved: {names} "
                "change nondeterministically between reference and label",
                request.span,
                hint=f"add them as label parameters: {request.label}({names}):",
            )
        return expr

    def _step_back(
        self,
        expr: Node,
        stmt: Statement,
        params: Dict[Var, Term],
        request: LocatedRequest,
        unresolved: Set[str],
    ) -> Node:
        live = free_variables(expr)
        if isinstance(stmt, Modify):
            if stmt.var in live:
                if stmt.value is None:
                    unresolved.add(stmt.var.name)
                else:
                    value = self.fill(stmt.value, request.key)
                    expr = substitute(expr, {stmt.var: value})  # type: ignore[dict-item]
        elif isinstance(stmt, OdeProof):
            hit = live & {eq.var for eq in stmt.equations}
            if hit:
                expr = self._solve_back(expr, stmt, hit, params, request, unresolved)
        elif isinstance(stmt, Block):
            for inner in reversed(stmt.statements):
                expr = self._step_back(expr, inner, params, request, unresolved)
        elif isinstance(stmt, (ForwardGhost, InverseGhost)):
            for inner in reversed(stmt.body):
                expr = self._step_back(expr, inner, params, request, unresolved)
        elif isinstance(stmt, (DemonicChoice, Switch, DemonicLoop, ForLoop)):
            unresolved.update(v.name for v in live & written_variants(stmt))
        return substitute(expr, params)

    def _solve_back(
        self,
        expr: Node,
        stmt: OdeProof,
        hit: Set[Var],
        params: Dict[Var, Term],
        request: LocatedRequest,
        unresolved: Set[str],
    ) -> Node:
        system = OdeSystem.from_proof(stmt)
        elapsed: Optional[Term] = None
        for eq in system.clock_equations():
            if eq.var in params:
                elapsed = Sub(params[eq.var], system.pre_of(eq.var))
                break
        if elapsed is None:
            for clause in system.durations():
                duration = clause.statement
                if isinstance(duration, Modify) and duration.var in system.posts and duration.value is not None:
                    value = self.fill(duration.value, request.key)
                    elapsed = Sub(value, system.pre_of(duration.var))  # type: ignore[arg-type]
                    break
        table = solve_system(stmt)
        if elapsed is None or not table.covers(hit):
            unresolved.update(v.name for v in hit)
            return expr
        expr = substitute(expr, {v: table.solutions[v] for v in hit})
        assert stmt.duration is not None
        return substitute(expr, {stmt.duration: elapsed})

    def _check_mobile(self, result: Node, request: LocatedRequest) -> None:
        stale = sorted(
            str(v) for v in free_variables(result)
            if v.index and v not in request.referrer.assigned
        )
        if stale:
            raise ElaborationError(
                f"{request.label} resolves to variants {', '.join(stale)} "
                "that are not yet assigned where they are used",
                request.span,
                hint="pass the changing variables as label parameters",
            )


# ============================================================================
# Service
# ============================================================================

def _place(node: Node, resolved: Mapping[int, Node]) -> Node:
    if isinstance(node, (PendingTerm, PendingFormula)):
        return resolved[node.key]
    return map_children(node, lambda child: _place(child, resolved))


class ElaborationService:
    """
    SSA Elaboration Application Service

    Use cases:
    - Elaborate a parsed document (SSA renaming plus label resolution)
    - Detect cyclic label references
    """

    def elaborate(self, document: ProofDocument) -> ElaboratedDocument:
        renamer = _Renamer()
        renamer.run(document.statements)
        resolver = LabelResolver(renamer.requests, renamer.labels)
        resolved = resolver.resolve_all()

        statements = tuple(_place(s, resolved) for s in renamer.root.statements())
        resolutions = [
            Resolution(renamer.requests[key].source, resolved[key])  # type: ignore[arg-type]
            for key in sorted(resolved)
        ]
        logger.debug(
            "elaborated %s: %d labels, %d located expressions",
            document.name, len(renamer.labels), len(resolutions),
        )
        return ElaboratedDocument(
            document=document,
            statements=statements,  # type: ignore[arg-type]
            labels=renamer.labels,
            definitions=renamer.source_definitions,
            final_state=renamer.state.snapshot(),
            warnings=resolver.warnings,
            resolutions=resolutions,
        )

    def detect_cycles(self, document: ProofDocument) -> Optional[Diagnostic]:
        """None when every located expression resolves without a cycle"""
        try:
            self.elaborate(document)
        except LabelCycleError as exc:
            return exc.to_diagnostic()
        return None
