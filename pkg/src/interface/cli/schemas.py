"""
Interface Layer - Pydantic Schemas

The command-line contract: the validated per-invocation request and the
machine-readable records written by `--format json`.

Schemas stay separate from the domain entities: a report can change shape
for its readers without touching the checker.
"""

from enum import Enum
from fractions import Fraction
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from src.domain.entities import DocumentReport, FileMetrics, Obligation


class Mode(str, Enum):
    CHECK = "check"
    CONCLUSION = "conclusion"
    PROVES = "proves"
    METRICS = "metrics"


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"


# ============================================================================
# Request
# ============================================================================

class RunConfig(BaseModel):
    """One invocation of the checker: exactly one mode over some files"""

    paths: List[str] = Field(..., min_length=1)
    mode: Mode = Mode.CHECK
    proves: Optional[str] = None
    solver: Optional[str] = None
    delta: Optional[str] = None
    dump_ssa: bool = False
    dump_labels: bool = False
    dump_obligations: bool = False
    output_format: OutputFormat = OutputFormat.TEXT
    timings: bool = False
    verbose: int = Field(default=0, ge=0)

    @field_validator("delta")
    @classmethod
    def _positive_rational(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return value
        try:
            delta = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"--delta must be a rational number, got {value!r}") from exc
        if delta <= 0:
            raise ValueError("--delta must be positive")
        return value

    @model_validator(mode="after")
    def _proves_needs_target(self) -> "RunConfig":
        if (self.mode == Mode.PROVES) != (self.proves is not None):
            raise ValueError("--proves takes the target formula and is its own mode")
        return self

    @classmethod
    def from_flags(
        cls,
        paths: List[str],
        conclusion: bool = False,
        proves: Optional[str] = None,
        metrics: bool = False,
        mode_word: Optional[str] = None,
        **options,
    ) -> "RunConfig":
        """Exactly one of the mode word and the mode flags selects the mode"""
        chosen = [m for m, on in (
            (Mode.CONCLUSION, conclusion),
            (Mode.PROVES, proves is not None),
            (Mode.METRICS, metrics),
        ) if on]
        if mode_word is not None:
            word = Mode(mode_word)
            if word not in chosen and (word != Mode.CHECK or chosen):
                chosen.append(word)
        if len(chosen) > 1:
            names = ", ".join(m.value for m in chosen)
            raise ValueError(f"choose one mode per invocation, got {names}")
        mode = chosen[0] if chosen else Mode.CHECK
        return cls(paths=paths, mode=mode, proves=proves, **options)


# ============================================================================
# Responses
# ============================================================================

class ObligationRecord(BaseModel):
    name: str
    location: str
    kind: str
    verdict: str
    procedure: str
    detail: str = ""
    milliseconds: Optional[float] = None
    export_path: Optional[str] = None

    @classmethod
    def from_obligation(cls, obligation: Obligation, timings: bool = False) -> "ObligationRecord":
        certificate = obligation.certificate
        return cls(
            name=obligation.name,
            location=obligation.location,
            kind=obligation.kind,
            verdict=certificate.outcome.value,
            procedure=certificate.procedure.value,
            detail=certificate.describe(),
            milliseconds=round(obligation.elapsed_ms, 3) if timings else None,
            export_path=certificate.export_path,
        )


class FileReport(BaseModel):
    file: str
    ok: bool
    obligations: List[ObligationRecord] = Field(default_factory=list)
    diagnostics: List[str] = Field(default_factory=list)
    outputs: List[str] = Field(default_factory=list)
    milliseconds: Optional[float] = None

    @classmethod
    def from_report(cls, report: DocumentReport, timings: bool = False) -> "FileReport":
        return cls(
            file=report.name,
            ok=report.ok,
            obligations=[ObligationRecord.from_obligation(o, timings) for o in report.obligations],
            diagnostics=report.render_diagnostics(),
            outputs=list(report.outputs),
            milliseconds=round(report.elapsed_ms, 3) if timings else None,
        )


class MetricsRow(BaseModel):
    file: str
    lines: int
    model: int
    proof: int
    using: int

    @classmethod
    def from_metrics(cls, metrics: FileMetrics) -> "MetricsRow":
        return cls(
            file=metrics.name,
            lines=metrics.counted,
            model=metrics.model,
            proof=metrics.proof,
            using=metrics.using,
        )


class RunResponse(BaseModel):
    files: List[FileReport] = Field(default_factory=list)
    metrics: List[MetricsRow] = Field(default_factory=list)
    exit_code: int = 0
