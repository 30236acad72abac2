"""
Walkthrough of the checker layers on a few small proofs

Runs the pipeline by hand, one layer at a time, with in-memory repositories
and no solver. `python test_architecture.py`
"""

import asyncio
import sys
from pathlib import Path

# Add project root to path for imports
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.application.services.arithmetic_service import ArithmeticService
from src.application.services.document_service import DocumentService
from src.application.services.elaboration_service import ElaborationService
from src.application.services.proof_checking_service import ProofCheckingService
from src.application.services.refinement_service import RefinementService
from src.application.services.reification_service import ReificationService
from src.infrastructure.config import CheckerSettings
from src.infrastructure.parsing import parse_formula, parse_text, print_statements
from src.infrastructure.persistence import (
    InMemoryObligationRepository,
    InMemoryProofDocumentRepository,
)

CIRCLE = "x := 0; y := 1; {x' = y, y' = -x & !circle:(x^2 + y^2 = 1) by induction};"

LOOP = """
x := 0; !inv:(x >= 0);
{ x := x + 1; !inv:(x >= 0); }*
!done:(x >= 0);
"""

BROKEN = "x := 1; !(x > 1);"


async def main():
    print("=" * 70)
    print("hgcheck - Layer Walkthrough")
    print("=" * 70)
    print()

    settings = CheckerSettings(_env_file=None)
    arithmetic = ArithmeticService(settings)
    elaboration = ElaborationService()
    checking = ProofCheckingService(arithmetic, settings=settings)
    reification = ReificationService()
    refinement = RefinementService(arithmetic, settings)

    print("✅ Services wired")
    print()

    # Step 1: parse and elaborate
    print("📝 Step 1: Parsing and SSA elaboration")
    print("-" * 70)
    document = parse_text(LOOP, "loop.kaisar")
    elaborated = elaboration.elaborate(document)
    print(print_statements(elaborated.statements))
    print(f"   final state: {elaborated.final_state}")
    print()

    # Step 2: check
    print("🔎 Step 2: Proof checking")
    print("-" * 70)
    checked = checking.check(elaborated)
    for obligation in checked.obligations:
        print(f"   {obligation.kind:<10} {obligation.name}: {obligation.certificate.describe()}")
    print(f"   ok: {checked.ok}")
    print()

    # Step 3: theorem
    print("📜 Step 3: Reification")
    print("-" * 70)
    theorem = reification.reify(checked)
    print(f"   {reification.render(theorem)}")
    print()

    # Step 4: proves
    print("🎯 Step 4: Refinement against a target")
    print("-" * 70)
    target = parse_formula("[x := 0; {x := x + 1;}*] x >= 0")
    outcome = refinement.proves(checked, theorem, target)
    print(f"   {outcome.describe()}")
    for step in outcome.trace.steps:
        print(f"     {step}")
    print()

    # Step 5: whole documents
    print("📂 Step 5: Document service")
    print("-" * 70)
    documents = InMemoryProofDocumentRepository({
        "circle.kaisar": CIRCLE,
        "loop.kaisar": LOOP,
        "broken.kaisar": BROKEN,
    })
    service = DocumentService(documents, InMemoryObligationRepository(), settings=settings)
    reports = await service.check_many(await documents.find_all(), conclusion=True)
    for report in reports:
        status = "✅ ok" if report.ok else "❌ failed"
        print(f"   {report.name}: {status}")
        for line in report.outputs:
            print(f"     {line}")
        for line in report.render_diagnostics():
            print(f"     {line}")
    print()

    print("=" * 70)
    print("🎉 Walkthrough finished")
    print("=" * 70)


if __name__ == "__main__":
    asyncio.run(main())
