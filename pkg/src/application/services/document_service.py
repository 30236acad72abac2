"""
Application Layer - Document Service

Orchestrates one checker run over whole proof documents: parse, elaborate,
check, export what the internal procedures could not decide, and answer the
document's `conclusion` and `proves` commands.

Key principles:
- Parsing and elaboration errors end the pipeline for that document only
- An obligation left unknown is exported through the ObligationRepository;
  with an external solver configured, an `unsat` answer upgrades it to valid
- Documents are checked concurrently; reports come back in input order
"""

import asyncio
import logging
import time
from dataclasses import replace
from typing import List, Optional, Sequence

from src.application.services.elaboration_service import ElaborationService
from src.application.services.metrics_service import MetricsService
from src.application.services.proof_checking_service import ProofCheckingService
from src.application.services.refinement_service import RefinementService
from src.application.services.reification_service import ReificationService
from src.domain.entities import (
    CheckedDocument,
    Diagnostic,
    DocumentReport,
    FileMetrics,
    Formula,
    Procedure,
    ProofDocument,
    Severity,
    SourceFile,
    SourceSpan,
    Verdict,
    VerdictCertificate,
)
from src.domain.exceptions import CheckerError
from src.domain.repositories import ObligationRepository, ProofDocumentRepository
from src.infrastructure.config import CheckerSettings, get_settings
from src.infrastructure.parsing import parse_document, parse_formula_text
from src.infrastructure.solvers import ExternalSolver, SolverAnswer

logger = logging.getLogger(__name__)


def _by_position(diagnostic: Diagnostic) -> tuple:
    span = diagnostic.span
    return (0, 0) if span is None else (span.line, span.column)


class DocumentService:
    """
    Document Application Service

    Use cases:
    - Check a document and run its commands
    - Print the theorem a document proves
    - Ask whether a document proves a given formula
    - Measure documents for the metrics report
    """

    def __init__(
        self,
        document_repository: ProofDocumentRepository,
        obligation_repository: ObligationRepository,
        settings: Optional[CheckerSettings] = None,
        elaboration: Optional[ElaborationService] = None,
        checking: Optional[ProofCheckingService] = None,
        reification: Optional[ReificationService] = None,
        refinement: Optional[RefinementService] = None,
        metrics: Optional[MetricsService] = None,
        solver: Optional[ExternalSolver] = None,
        export_unknown: bool = False,
    ):
        self.document_repository = document_repository
        self.obligation_repository = obligation_repository
        self.settings = settings or get_settings()
        self.elaboration = elaboration or ElaborationService()
        self.checking = checking or ProofCheckingService(settings=self.settings)
        self.reification = reification or ReificationService()
        self.refinement = refinement or RefinementService(self.checking.arithmetic, self.settings)
        self.metrics_service = metrics or MetricsService()
        self.solver = solver
        self.export_unknown = export_unknown or solver is not None

    # ------------------------------------------------------------------
    # Checking
    # ------------------------------------------------------------------

    async def check_document(
        self, name: str, conclusion: bool = False, proves: Optional[str] = None
    ) -> DocumentReport:
        source = await self.document_repository.load(name)
        return await self.check_source(source, conclusion, proves)

    async def check_many(
        self, names: Sequence[str], conclusion: bool = False, proves: Optional[str] = None
    ) -> List[DocumentReport]:
        return list(await asyncio.gather(
            *(self.check_document(name, conclusion, proves) for name in names)
        ))

    async def check_source(
        self, source: SourceFile, conclusion: bool = False, proves: Optional[str] = None
    ) -> DocumentReport:
        started = time.perf_counter()
        report = DocumentReport(source)
        try:
            document = parse_document(source)
            elaborated = self.elaboration.elaborate(document)
        except CheckerError as exc:
            report.diagnostics.append(exc.to_diagnostic())
            report.elapsed_ms = (time.perf_counter() - started) * 1000
            return report

        checked = await asyncio.to_thread(self.checking.check, elaborated)
        report.checked = checked
        await self._export(checked)
        report.outputs.extend(checked.prints)

        extra: List[Diagnostic] = []
        if checked.ok:
            extra.extend(self._run_commands(document, checked, report))
            if conclusion:
                extra.extend(self._conclusion(checked, report, None))
            if proves is not None:
                extra.extend(self._proves_text(source, checked, report, proves))
        report.diagnostics = sorted(checked.diagnostics() + extra, key=_by_position)
        report.elapsed_ms = (time.perf_counter() - started) * 1000
        logger.info(
            "%s: %s in %.0f ms", source.name, "ok" if report.ok else "failed", report.elapsed_ms
        )
        return report

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------

    def _run_commands(
        self, document: ProofDocument, checked: CheckedDocument, report: DocumentReport
    ) -> List[Diagnostic]:
        found: List[Diagnostic] = []
        for command in document.conclusions():
            found.extend(self._conclusion(checked, report, command.selected, command.span))
        for query in document.proves_commands():
            found.extend(self._proves(checked, report, query.target, query.text, query.span))
        return found

    def _conclusion(
        self,
        checked: CheckedDocument,
        report: DocumentReport,
        selected: Optional[Sequence[str]],
        span: Optional[SourceSpan] = None,
    ) -> List[Diagnostic]:
        try:
            theorem = self.reification.reify(checked, selected)
        except CheckerError as exc:
            return [exc.with_span(span).to_diagnostic()]
        report.theorem = theorem
        report.outputs.append(self.reification.render(theorem))
        return []

    def _proves(
        self,
        checked: CheckedDocument,
        report: DocumentReport,
        target: Formula,
        text: str,
        span: Optional[SourceSpan] = None,
    ) -> List[Diagnostic]:
        try:
            theorem = self.reification.reify(checked)
            outcome = self.refinement.proves(checked, theorem, target)
        except CheckerError as exc:
            return [exc.with_span(span).to_diagnostic()]
        report.proves.append(outcome)
        if outcome.ok:
            report.outputs.append(f"proves {text}: ok")
            return []
        return [Diagnostic(
            Severity.ERROR,
            f"{checked.name} does not prove {text}: {outcome.describe()}",
            span,
            hint="add ghosts, or make the strategy and the game assume the same things",
        )]

    def _proves_text(
        self, source: SourceFile, checked: CheckedDocument, report: DocumentReport, text: str
    ) -> List[Diagnostic]:
        try:
            target = parse_formula_text(SourceFile(f"{source.name}:--proves", text), text)
        except CheckerError as exc:
            return [exc.to_diagnostic()]
        return self._proves(checked, report, target, text)

    # ------------------------------------------------------------------
    # Export and external solver
    # ------------------------------------------------------------------

    async def _export(self, checked: CheckedDocument) -> None:
        if not self.export_unknown:
            return
        for obligation in checked.obligations:
            if obligation.certificate.outcome != Verdict.UNKNOWN or not obligation.smtlib:
                continue
            location = await self.obligation_repository.save(checked.name, obligation)
            obligation.upgrade(replace(obligation.certificate, export_path=location))
            if self.solver is None:
                continue
            answer = await self.solver.check(location)
            if answer == SolverAnswer.UNSAT:
                obligation.upgrade(replace(
                    VerdictCertificate.valid(Procedure.EXTERNAL, "external solver"),
                    export_path=location,
                ))
            else:
                logger.warning(
                    "%s: external solver answered %s for %s",
                    checked.name, answer.value, obligation.name,
                )

    # ------------------------------------------------------------------
    # Metrics
    # ------------------------------------------------------------------

    async def metrics(self, names: Sequence[str]) -> List[FileMetrics]:
        sources = [await self.document_repository.load(name) for name in names]
        return self.metrics_service.measure_all(sources)
