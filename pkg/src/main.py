"""
hgcheck - checker for structured proofs of hybrid-game strategies

Entry point: `python -m src.main check corpus/circle.kaisar`.

LAYERS (from innermost to outermost):

1. DOMAIN LAYER (src/domain/)
   - Syntax trees, SSA state, fact contexts, goals and verdicts
   - Repository interfaces for documents and exported obligations

2. APPLICATION LAYER (src/application/)
   - Elaboration, arithmetic, ODE engine, proof checking
   - Reification, refinement, metrics, whole-document orchestration

3. INFRASTRUCTURE LAYER (src/infrastructure/)
   - Lexer, parser and printer
   - SMT-LIB export and external solver
   - File-system and in-memory repositories, settings

4. INTERFACE LAYER (src/interface/)
   - Command line, request and report schemas, dependency wiring

Inner layers never import outer ones.
"""

import os
import sys

# support running as `python src/main.py` as well as `python -m src.main`
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.interface.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
