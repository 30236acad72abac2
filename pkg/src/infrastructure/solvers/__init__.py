"""External solver support: SMT-LIB export and solver invocation"""

from .external_solver import ExternalSolver, SolverAnswer
from .smtlib_exporter import render

__all__ = ["ExternalSolver", "SolverAnswer", "render"]
