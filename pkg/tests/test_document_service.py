"""
Tests for whole-document checking: commands, flags, exports and the
external solver hand-off
"""

import pytest

from src.application.services.document_service import DocumentService
from src.domain.entities import Procedure, SourceFile, Verdict
from src.infrastructure.persistence import InMemoryProofDocumentRepository
from src.infrastructure.solvers import ExternalSolver

UNDECIDED = "?a:(x > 1); !b:(x > 0) using a by prop;"


def _source(text: str) -> SourceFile:
    return SourceFile("t.kaisar", text)


@pytest.mark.asyncio
async def test_document_commands_are_answered(document_service):
    report = await document_service.check_document("commands.kaisar")

    assert report.ok, report.render_diagnostics()
    assert report.outputs[0] == "[x := *; y := x + 1;] y > x"
    assert report.outputs[-1].startswith("proves ")
    assert report.outputs[-1].endswith(": ok")
    assert report.theorem is not None
    assert [p.ok for p in report.proves] == [True]


@pytest.mark.asyncio
async def test_conclusion_flag(document_service):
    report = await document_service.check_source(_source("x := 1; !(x > 0);"), conclusion=True)

    assert report.outputs == ["[x := 1;] x > 0"]


@pytest.mark.asyncio
async def test_proves_flag(document_service):
    text = "x := 1; !(x > 0);"
    proved = await document_service.check_source(_source(text), proves="[x := 1;] x > 0")
    assert proved.outputs == ["proves [x := 1;] x > 0: ok"]

    refuted = await document_service.check_source(_source(text), proves="[x := 2;] x > 0")
    assert not refuted.ok
    assert "does not prove" in refuted.errors[0].message


@pytest.mark.asyncio
async def test_unparsable_proves_target(document_service):
    report = await document_service.check_source(_source("x := 1;"), proves="[x := ] x > 0")
    assert not report.ok


@pytest.mark.asyncio
async def test_commands_wait_for_a_checked_document(document_service):
    report = await document_service.check_source(_source("x := 1; !(x > 1);"), conclusion=True)

    assert not report.ok
    assert report.outputs == []
    assert report.theorem is None


@pytest.mark.asyncio
async def test_parse_errors_end_the_pipeline(document_service):
    report = await document_service.check_source(_source("x := ;"))

    assert report.checked is None
    assert len(report.errors) == 1
    assert report.obligations == []


@pytest.mark.asyncio
async def test_elaboration_errors_end_the_pipeline(document_service):
    report = await document_service.check_document("mutations/cyclic-label.kaisar")

    assert report.checked is None
    assert "cyclic label references" in report.errors[0].message


@pytest.mark.asyncio
async def test_reports_keep_input_order(document_service):
    names = ["prop-using.kaisar", "commands.kaisar", "assignment.kaisar"]
    reports = await document_service.check_many(names)

    assert [r.name for r in reports] == names
    assert all(r.ok for r in reports)


@pytest.mark.asyncio
async def test_unknown_obligations_are_exported(exports, settings):
    service = DocumentService(
        InMemoryProofDocumentRepository(), exports, settings=settings, export_unknown=True
    )
    report = await service.check_source(_source(UNDECIDED))

    assert not report.ok
    (obligation,) = report.obligations
    assert obligation.certificate.outcome == Verdict.UNKNOWN
    (location,) = await exports.find_by_document(report.checked.name)
    assert obligation.certificate.export_path == location
    text = await exports.read(location)
    assert "(declare-fun x_0 () Real)" in text
    assert text.rstrip().endswith("(exit)")


@pytest.mark.asyncio
async def test_nothing_is_exported_by_default(document_service, exports):
    report = await document_service.check_source(_source(UNDECIDED))

    assert await exports.find_by_document(report.checked.name) == []


@pytest.mark.asyncio
async def test_unsat_answer_upgrades_obligation(exports, settings):
    service = DocumentService(
        InMemoryProofDocumentRepository(),
        exports,
        settings=settings,
        solver=ExternalSolver("sh -c 'echo unsat'"),
    )
    report = await service.check_source(_source(UNDECIDED))

    assert report.ok, report.render_diagnostics()
    (obligation,) = report.obligations
    assert obligation.certificate.procedure == Procedure.EXTERNAL
    assert obligation.certificate.export_path is not None


@pytest.mark.asyncio
async def test_sat_answer_leaves_obligation_unknown(exports, settings):
    service = DocumentService(
        InMemoryProofDocumentRepository(),
        exports,
        settings=settings,
        solver=ExternalSolver("sh -c 'echo sat'"),
    )
    report = await service.check_source(_source(UNDECIDED))

    assert not report.ok
    assert report.obligations[0].certificate.outcome == Verdict.UNKNOWN


@pytest.mark.asyncio
async def test_metrics_of_named_documents(document_service):
    rows = await document_service.metrics(["commands.kaisar", "prop-using.kaisar"])

    assert [r.name for r in rows] == ["commands.kaisar", "prop-using.kaisar", "total"]
