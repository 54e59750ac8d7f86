from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Optional, Sequence


@dataclass(frozen=True)
class Diagnostic:
    """A located message from parsing or validation."""

    severity: str  # "error" | "warning"
    code: str
    message: str
    line: Optional[int] = None
    column: Optional[int] = None
    path: Optional[str] = None  # JSON path for network files

    def __str__(self) -> str:
        where = ""
        if self.line is not None:
            where = f"{self.line}: " if self.column is None else f"{self.line}:{self.column}: "
        elif self.path:
            where = f"{self.path}: "
        return f"{where}{self.severity}[{self.code}]: {self.message}"

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


class PhaError(Exception):
    """Base class for all errors raised by this package."""


class DiagnosticError(PhaError):
    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class ParseError(DiagnosticError):
    """Lexical or syntax errors in ``.pha`` text."""


class KBValidationError(DiagnosticError):
    pass


class BNValidationError(DiagnosticError):
    pass


class NonGroundAssumption(PhaError):
    pass


class NonGroundQuery(PhaError):
    pass


class UnknownHypothesis(PhaError):
    pass


class UndefinedPosterior(PhaError):
    """The observation has zero mass, so the conditional is undefined."""


class ZeroProbabilityObservation(PhaError):
    pass
