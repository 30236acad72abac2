"""
Infrastructure Layer - External Solver

Runs an SMT-LIB solver executable on an exported obligation file and reads
its first answer line. Only `unsat` proves anything; every other outcome
leaves the obligation unknown.
"""

import asyncio
import logging
import shlex
from enum import Enum
from typing import List

logger = logging.getLogger(__name__)


class SolverAnswer(str, Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"
    TIMEOUT = "timeout"
    ERROR = "error"


class ExternalSolver:
    """Asynchronous wrapper around a solver command line"""

    def __init__(self, command: str, timeout: float = 20.0):
        self.command: List[str] = shlex.split(command)
        self.timeout = timeout
        if not self.command:
            raise ValueError("Solver command cannot be empty")

    async def check(self, path: str) -> SolverAnswer:
        try:
            process = await asyncio.create_subprocess_exec(
                *self.command, path,
                stdout=asyncio.subprocess.PIPE,
                stderr=asyncio.subprocess.PIPE,
            )
        except OSError as exc:
            logger.warning("cannot start solver %s: %s", self.command[0], exc)
            return SolverAnswer.ERROR

        try:
            stdout, _ = await asyncio.wait_for(process.communicate(), timeout=self.timeout)
        except asyncio.TimeoutError:
            process.kill()
            await process.wait()
            logger.warning("solver timed out after %ss on %s", self.timeout, path)
            return SolverAnswer.TIMEOUT

        for line in stdout.decode(errors="replace").splitlines():
            answer = line.strip()
            if answer in ("sat", "unsat", "unknown"):
                logger.debug("solver answered %s for %s", answer, path)
                return SolverAnswer(answer)
        logger.warning("solver gave no answer for %s", path)
        return SolverAnswer.ERROR
