"""
Tests for model and proof line counts
"""

import pytest

from src.application.services.metrics_service import MetricsService
from src.domain.entities import FileMetrics, SourceFile
from tests.conftest import corpus_files


@pytest.fixture
def metrics() -> MetricsService:
    return MetricsService()


def _source(name: str) -> SourceFile:
    return SourceFile(f"{name}.kaisar", corpus_files()[name])


def test_commands_are_proof_lines(metrics):
    assert metrics.measure(_source("commands")) == FileMetrics("commands.kaisar", 4, 1, 3, 0)


def test_using_lines_are_counted(metrics):
    assert metrics.measure(_source("prop-using")) == FileMetrics("prop-using.kaisar", 2, 1, 1, 1)


def test_labels_and_ghosts_are_proof(metrics):
    source = SourceFile("t.kaisar", "init:\nx := 1;\n/++ y := x; ++/\n{\n  x := x + 1;\n}*\n")
    result = metrics.measure(source)

    # the lone brace line is not counted
    assert result.counted == 5
    assert result.proof == 2
    assert result.model == 3


def test_negation_is_not_an_assertion(metrics):
    result = metrics.measure(SourceFile("t.kaisar", "?(!(x > 0));\n"))
    assert result.proof == 0


def test_totals_follow_the_files(metrics):
    rows = metrics.measure_all([_source("commands"), _source("prop-using")])

    assert [r.name for r in rows] == ["commands.kaisar", "prop-using.kaisar", "total"]
    assert rows[-1] == FileMetrics("total", 6, 2, 4, 1)
    assert len(metrics.measure_all([_source("commands")])) == 1


def test_counts_must_add_up():
    with pytest.raises(ValueError, match="either a model or a proof"):
        FileMetrics("bad", counted=3, model=1, proof=1)
