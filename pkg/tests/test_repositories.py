"""
Tests for the document and export repositories
"""

import pytest

from src.domain.entities import (
    Goal,
    NamedFormula,
    Obligation,
    Procedure,
    VerdictCertificate,
)
from src.domain.exceptions import DocumentNotFoundError
from src.infrastructure.parsing import parse_formula
from src.infrastructure.persistence import (
    FileObligationRepository,
    FileProofDocumentRepository,
    InMemoryObligationRepository,
    InMemoryProofDocumentRepository,
)
from src.infrastructure.solvers import render


def _obligation(name: str = "bound") -> Obligation:
    goal = Goal((NamedFormula("h", parse_formula("x > 1")),), parse_formula("x*x > 1"))
    obligation = Obligation(name, goal, VerdictCertificate.unknown(Procedure.PRODUCTS))
    obligation.smtlib = render([parse_formula("x > 1")], parse_formula("x*x > 1"), name)
    return obligation


# ============================================================================
# Documents
# ============================================================================

@pytest.mark.asyncio
async def test_in_memory_documents():
    repository = InMemoryProofDocumentRepository({"b.kaisar": "x := 1;"})
    repository.add("a.kaisar", "y := 2;")

    assert await repository.find_all() == ["a.kaisar", "b.kaisar"]
    assert (await repository.load("b.kaisar")).text == "x := 1;"
    assert await repository.exists("a.kaisar")
    with pytest.raises(DocumentNotFoundError):
        await repository.load("c.kaisar")


@pytest.mark.asyncio
async def test_file_documents(tmp_path):
    (tmp_path / "nested").mkdir()
    (tmp_path / "nested" / "one.kaisar").write_text("x := 1;", encoding="utf-8")
    (tmp_path / "notes.txt").write_text("not a proof", encoding="utf-8")
    repository = FileProofDocumentRepository(str(tmp_path))

    assert await repository.find_all() == ["nested/one.kaisar"]
    source = await repository.load("nested/one.kaisar")
    assert source.name == "nested/one.kaisar"
    assert source.text == "x := 1;"
    assert not await repository.exists("missing.kaisar")


@pytest.mark.asyncio
async def test_missing_file_is_reported_by_name(tmp_path):
    repository = FileProofDocumentRepository(str(tmp_path))

    with pytest.raises(DocumentNotFoundError, match="missing.kaisar: no such file"):
        await repository.load("missing.kaisar")


# ============================================================================
# Exports
# ============================================================================

@pytest.mark.asyncio
async def test_in_memory_exports():
    repository = InMemoryObligationRepository()
    first = await repository.save("doc.kaisar", _obligation("a"))
    second = await repository.save("doc.kaisar", _obligation("b"))

    assert await repository.find_by_document("doc.kaisar") == [first, second]
    assert "(check-sat)" in await repository.read(first)
    assert await repository.clear("doc.kaisar") == 2
    assert await repository.find_by_document("doc.kaisar") == []
    with pytest.raises(DocumentNotFoundError):
        await repository.read(first)


@pytest.mark.asyncio
async def test_file_exports(tmp_path):
    repository = FileObligationRepository(str(tmp_path / "exports"))
    location = await repository.save("proofs/circle.kaisar", _obligation("circle (base case)"))

    assert location.endswith("000-circle_base_case.smt2")
    assert (tmp_path / "exports" / "circle").is_dir()
    text = await repository.read(location)
    assert text.startswith("; circle (base case)")
    assert "(declare-fun x () Real)" in text
    assert "(assert (not " in text

    await repository.save("proofs/circle.kaisar", _obligation("step"))
    assert len(await repository.find_by_document("proofs/circle.kaisar")) == 2
    assert await repository.clear("proofs/circle.kaisar") == 2
