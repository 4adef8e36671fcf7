"""
Diagnostics and error types shared by every 4+1 toolkit component
Findings about an architecture are Diagnostic values; API misuse raises
an ArchitectureError subclass carrying the matching error code
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from type_definitions import DiagnosticRecord


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class SourceSpan:
    """1-based position of a declaration inside an .arch document"""

    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    rule: str
    message: str
    location: Optional[SourceSpan] = None

    def sort_key(self) -> Tuple[str, int, int, str, str]:
        if self.location is None:
            return ("", 0, 0, self.rule, self.message)
        return (
            self.location.file,
            self.location.line,
            self.location.column,
            self.rule,
            self.message,
        )

    def with_severity(self, severity: Severity) -> "Diagnostic":
        return Diagnostic(severity, self.rule, self.message, self.location)

    def format(self) -> str:
        """Compiler-style line: file:line:col: severity RULE: message"""
        prefix = f"{self.location}: " if self.location else ""
        return f"{prefix}{self.severity.value} {self.rule}: {self.message}"

    def to_record(self) -> DiagnosticRecord:
        loc = self.location
        return {
            "rule": self.rule,
            "severity": self.severity.value,
            "message": self.message,
            "file": loc.file if loc else None,
            "line": loc.line if loc else None,
            "column": loc.column if loc else None,
        }


@dataclass(frozen=True)
class RuleInfo:
    rule: str
    severity: Severity
    summary: str
    views: FrozenSet[str] = frozenset()


def _rule(rule: str, severity: Severity, summary: str, *views: str) -> RuleInfo:
    return RuleInfo(rule, severity, summary, frozenset(views))


RULE_CATALOG: Dict[str, RuleInfo] = {
    info.rule: info
    for info in (
        # structural codes raised by the parser and resolve()
        _rule("E_PARSE", Severity.ERROR, "syntax error"),
        _rule("E_ENUM", Severity.ERROR, "unknown enumeration value"),
        _rule("E_DUP", Severity.ERROR, "duplicate identifier"),
        _rule("E_REF", Severity.ERROR, "unresolved reference"),
        _rule("E_CYCLE", Severity.ERROR, "subordination or inheritance cycle"),
        _rule("E_VIEW", Severity.ERROR, "view presence invariant violated"),
        _rule("E_INVALID", Severity.ERROR, "field constraint violated"),
        # consistency rules
        _rule(
            "D001",
            Severity.ERROR,
            "dependency points to a higher layer",
            "development",
        ),
        _rule("D002", Severity.WARNING, "layer count outside 4..6", "development"),
        _rule(
            "D003", Severity.WARNING, "subsystem size outside 5..20 KSLOC", "development"
        ),
        _rule("D004", Severity.INFO, "same-layer dependency cycle", "development"),
        _rule(
            "P001",
            Severity.ERROR,
            "rendezvous/shared memory connector crosses processes",
            "process",
        ),
        _rule(
            "P002",
            Severity.WARNING,
            "major task only uses rendezvous/shared memory",
            "process",
        ),
        _rule(
            "M001", Severity.ERROR, "class not mapped to any task", "logical", "process"
        ),
        _rule(
            "M002",
            Severity.ERROR,
            "subordinate class runs outside its master's tasks",
            "logical",
            "process",
        ),
        _rule(
            "M003",
            Severity.WARNING,
            "active class has no dedicated task",
            "logical",
            "process",
        ),
        _rule(
            "M004",
            Severity.ERROR,
            "class not mapped to any module",
            "logical",
            "development",
        ),
        _rule(
            "PH01",
            Severity.ERROR,
            "configuration misses a process or replica",
            "process",
            "physical",
        ),
        _rule(
            "S001",
            Severity.ERROR,
            "step references a missing class or operation",
            "scenarios",
        ),
        _rule(
            "S002",
            Severity.ERROR,
            "cross-process hop without inter-process connector",
            "scenarios",
            "process",
        ),
        _rule(
            "L001",
            Severity.ERROR,
            "class outside a coherent category",
            "logical",
        ),
        _rule("T001", Severity.INFO, "view absent, dependent rules skipped"),
        # load estimation
        _rule("LD01", Severity.INFO, "scenario without frequency contributes no load"),
        _rule("LD02", Severity.WARNING, "hop with unmapped endpoint contributes no load"),
    )
}


def make_diagnostic(
    rule: str, message: str, location: Optional[SourceSpan] = None
) -> Diagnostic:
    """Build a diagnostic with the catalog severity of its rule"""
    return Diagnostic(RULE_CATALOG[rule].severity, rule, message, location)


def sort_diagnostics(diagnostics: Iterable[Diagnostic]) -> List[Diagnostic]:
    return sorted(diagnostics, key=Diagnostic.sort_key)


def count_by_severity(diagnostics: Iterable[Diagnostic]) -> Dict[Severity, int]:
    counts = {severity: 0 for severity in Severity}
    for diagnostic in diagnostics:
        counts[diagnostic.severity] += 1
    return counts


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)


class ArchitectureError(Exception):
    """Base exception for 4+1 toolkit errors"""

    code = "E_ARCH"

    def __init__(self, message: str, diagnostics: Optional[List[Diagnostic]] = None):
        super().__init__(message)
        self.message = message
        self.diagnostics = diagnostics or []

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


class UnknownScenarioError(ArchitectureError):
    """Raised when a scenario reference cannot be resolved"""

    code = "E_NOSCENARIO"


class ViewAbsentError(ArchitectureError):
    """Raised when a blueprint is requested for a view the model omits"""

    code = "E_NOVIEW"


class UnknownConfigurationError(ArchitectureError):
    """Raised when a physical configuration name cannot be resolved"""

    code = "E_NOCONFIG"


class UncheckedModelError(ArchitectureError):
    """Raised when an operation needs a model free of errors"""

    code = "E_UNCHECKED"


class InfeasibleMappingError(ArchitectureError):
    """Raised when constraints cannot fit within the process budget"""

    code = "E_INFEASIBLE"


class NoStimuliError(ArchitectureError):
    """Raised when outside-in mapping is asked to run without stimuli"""

    code = "E_NOSTIMULI"


class InvalidConstraintsError(ArchitectureError):
    """Raised when mapper constraints name classes the logical view lacks"""

    code = "E_REF"
