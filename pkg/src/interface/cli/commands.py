"""
Interface Layer - Command Line

    hgcheck [check|conclusion|metrics] FILE... [--conclusion] [--proves FORMULA]
            [--metrics] [--solver CMD] [--delta Q] [--dump-ssa] [--dump-labels]
            [--dump-obligations] [--format text|json] [--timings] [-v]

Exit codes: 0 when every obligation of every file is valid, 1 when any file
has an error diagnostic, 2 for usage and I/O errors. Diagnostics go to
standard error; standard output only carries results, in input order.
"""

import argparse
import asyncio
import logging
import sys
from typing import List, Optional, Sequence, TextIO

from pydantic import ValidationError

from src.application.services.document_service import DocumentService
from src.domain.entities import DocumentReport
from src.domain.exceptions import CheckerError, DocumentNotFoundError
from src.infrastructure.parsing import print_statements
from src.interface.cli.dependencies import build_document_service, configure_logging, settings_for
from src.interface.cli.schemas import (
    FileReport,
    MetricsRow,
    Mode,
    ObligationRecord,
    OutputFormat,
    RunConfig,
    RunResponse,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

MODE_WORDS = ("check", "conclusion", "metrics")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hgcheck",
        description="Check structured proofs of hybrid-game strategies.",
    )
    parser.add_argument("paths", nargs="+", metavar="FILE",
                        help="proof documents; a leading check/conclusion/metrics selects the mode")
    parser.add_argument("--conclusion", action="store_true", help="print the theorem each file proves")
    parser.add_argument("--proves", metavar="FORMULA", help="ask whether each file proves [α]φ")
    parser.add_argument("--metrics", action="store_true", help="print model, proof and `using` line counts")
    parser.add_argument("--solver", metavar="CMD", help="external SMT-LIB solver (default: $HGCHECK_SOLVER)")
    parser.add_argument("--delta", metavar="Q", help="default margin for `by guard` without a δ")
    parser.add_argument("--dump-ssa", action="store_true", help="print the SSA form")
    parser.add_argument("--dump-labels", action="store_true", help="print the label registry")
    parser.add_argument("--dump-obligations", action="store_true", help="print one line per obligation")
    parser.add_argument("--format", dest="output_format", choices=[f.value for f in OutputFormat],
                        default=OutputFormat.TEXT.value)
    parser.add_argument("--timings", action="store_true", help="include elapsed times in the output")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    args = build_parser().parse_intermixed_args(list(argv))
    paths = list(args.paths)
    mode_word = None
    if paths and paths[0] in MODE_WORDS:
        mode_word = paths.pop(0)
    return RunConfig.from_flags(
        paths,
        conclusion=args.conclusion,
        proves=args.proves,
        metrics=args.metrics,
        mode_word=mode_word,
        solver=args.solver,
        delta=args.delta,
        dump_ssa=args.dump_ssa,
        dump_labels=args.dump_labels,
        dump_obligations=args.dump_obligations,
        output_format=args.output_format,
        timings=args.timings,
        verbose=args.verbose,
    )


# ============================================================================
# Text rendering
# ============================================================================

def _summary(report: DocumentReport) -> str:
    total = len(report.obligations)
    if report.ok:
        return f"{report.name}: ok, {total} obligation{'s' if total != 1 else ''}"
    failed = sum(1 for o in report.obligations if not o.certificate.is_valid)
    errors = len(report.errors)
    return f"{report.name}: FAILED, {failed} of {total} obligations failed, {errors} error(s)"


def _dumps(report: DocumentReport, config: RunConfig) -> List[str]:
    lines: List[str] = []
    checked = report.checked
    if checked is None:
        return lines
    if config.dump_ssa:
        lines.append(f"--- ssa: {report.name}")
        lines.append(print_statements(checked.elaborated.statements))
    if config.dump_labels:
        lines.append(f"--- labels: {report.name}")
        for entry in checked.elaborated.labels:
            params = f"({', '.join(str(p) for p in entry.params)})" if entry.params else ""
            state = ", ".join(f"{n}_{i}" for n, i in sorted(entry.snapshot.items()))
            lines.append(f"{entry.name}{params}: {state}")
    if config.dump_obligations:
        lines.append(f"--- obligations: {report.name}")
        for obligation in report.obligations:
            record = ObligationRecord.from_obligation(obligation, config.timings)
            timing = f" [{record.milliseconds} ms]" if record.milliseconds is not None else ""
            lines.append(f"{record.location}: {record.name}: {record.detail}{timing}")
    return lines


def render_text(reports: List[DocumentReport], config: RunConfig, out: TextIO, err: TextIO) -> None:
    for report in reports:
        for diagnostic in report.render_diagnostics():
            print(diagnostic, file=err)
        if config.mode == Mode.CHECK:
            print(_summary(report), file=out)
        for line in report.outputs:
            print(line, file=out)
        for line in _dumps(report, config):
            print(line, file=out)
        if config.timings:
            print(f"{report.name}: {report.elapsed_ms:.0f} ms", file=err)


def render_metrics(rows: List[MetricsRow], out: TextIO) -> None:
    width = max([len(r.file) for r in rows] + [4])
    print(f"{'file':<{width}}  {'lines':>5}  {'model':>5}  {'proof':>5}  {'using':>5}", file=out)
    for row in rows:
        print(
            f"{row.file:<{width}}  {row.lines:>5}  {row.model:>5}  {row.proof:>5}  {row.using:>5}",
            file=out,
        )


# ============================================================================
# Entry points
# ============================================================================

async def run(
    config: RunConfig,
    out: Optional[TextIO] = None,
    err: Optional[TextIO] = None,
    service: Optional[DocumentService] = None,
) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    if service is None:
        service = build_document_service(settings_for(config))
    json_output = config.output_format == OutputFormat.JSON
    response = RunResponse()

    if config.mode == Mode.METRICS:
        response.metrics = [MetricsRow.from_metrics(m) for m in await service.metrics(config.paths)]
        if json_output:
            print(response.model_dump_json(indent=2), file=out)
        else:
            render_metrics(response.metrics, out)
        return EXIT_OK

    reports = await service.check_many(
        config.paths,
        conclusion=config.mode == Mode.CONCLUSION,
        proves=config.proves,
    )
    response.exit_code = EXIT_OK if all(r.ok for r in reports) else EXIT_FAILED
    if json_output:
        response.files = [FileReport.from_report(r, config.timings) for r in reports]
        print(response.model_dump_json(indent=2), file=out)
    else:
        render_text(reports, config, out, err)
    return response.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    except (ValidationError, ValueError) as exc:
        print(f"hgcheck: {exc}", file=sys.stderr)
        return EXIT_USAGE

    configure_logging(config, settings_for(config))
    try:
        return asyncio.run(run(config))
    except DocumentNotFoundError as exc:
        print(f"hgcheck: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CheckerError as exc:
        # metrics mode tokenizes without the per-document recovery of checking
        print(exc.to_diagnostic().render(), file=sys.stderr)
        return EXIT_FAILED
