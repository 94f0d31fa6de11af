"""Error types and validation reports shared across the package.

Every domain error carries a machine-readable ``code`` so the CLI and the
HTTP API can map failures without string matching. Validation problems that
are *data* (a rubric that fails its own invariants, a LaTeX body with
unbalanced math) are collected in a :class:`ValidationReport` instead of
being raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class RubricateError(Exception):
    """Base class for all domain errors."""

    code = "ERROR"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def __str__(self) -> str:
        return self.message


class FormatError(RubricateError):
    """A structured-text input is malformed (bad JSON, missing field, bad enum)."""

    code = "FORMAT_ERROR"


class StoreIOError(RubricateError):
    """Filesystem problem while reading or writing artifact data."""

    code = "IO_ERROR"


class BundleValidationError(RubricateError):
    """One or more loaded tasks failed validation; nothing was loaded."""

    code = "VALIDATION_ERROR"

    def __init__(self, message: str, reports: dict[str, "ValidationReport"]):
        super().__init__(message)
        self.reports = reports


class OutOfRangeError(RubricateError):
    code = "OUT_OF_RANGE"


class UnknownTaskError(RubricateError):
    code = "UNKNOWN_TASK"


class EmptySubmissionError(RubricateError):
    code = "EMPTY_SUBMISSION"


class TaskMismatchError(RubricateError):
    code = "TASK_MISMATCH"


class ResponseParseError(RubricateError):
    """Base for judge-reply parse failures; retried, never defaulted."""

    code = "PARSE_ERROR"


class EmptyAnswerError(ResponseParseError):
    code = "EMPTY_ANSWER"


class UnparseableVerdictError(ResponseParseError):
    code = "UNPARSEABLE_VERDICT"


class MissingItemError(ResponseParseError):
    code = "MISSING_ITEM"


class DuplicateItemError(ResponseParseError):
    code = "DUPLICATE_ITEM"


class JudgeTransportError(RubricateError):
    """Transient transport failure talking to a judge; eligible for backoff retry."""

    code = "JUDGE_TRANSPORT"


class JudgeUnavailableError(RubricateError):
    code = "JUDGE_UNAVAILABLE"


class NeedsHumanError(RubricateError):
    """The judge kept answering unparseably; the cell must go to a human."""

    code = "NEEDS_HUMAN"


class IncompleteJudgmentsError(RubricateError):
    code = "INCOMPLETE_JUDGMENTS"


class UnknownCriterionError(RubricateError):
    code = "UNKNOWN_CRITERION"


class DuplicateJudgmentError(RubricateError):
    code = "DUPLICATE_JUDGMENT"


class FrozenCellError(RubricateError):
    """The submission's initial judgments are frozen (consensus has opened)."""

    code = "FROZEN_CELL"


class NoOverlapError(RubricateError):
    code = "NO_OVERLAP"


class UnresolvedCellsError(RubricateError):
    code = "UNRESOLVED_CELLS"


class EmptyTagsError(RubricateError):
    code = "EMPTY_TAGS"


class MissingInitialError(RubricateError):
    code = "MISSING_INITIAL"


class NotAMismatchError(RubricateError):
    code = "NOT_A_MISMATCH"


class SessionLockedError(RubricateError):
    code = "SESSION_LOCKED"


class IntegrityError(RubricateError):
    """Referential integrity violated inside a persisted session."""

    code = "INTEGRITY_ERROR"


ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Issue:
    """One validation finding: a stable code plus a human message."""

    code: str
    message: str
    severity: str = ERROR

    def as_dict(self) -> dict[str, str]:
        return {"code": self.code, "message": self.message, "severity": self.severity}


@dataclass
class ValidationReport:
    """Ordered list of validation findings; empty error list means valid."""

    issues: list[Issue] = field(default_factory=list)

    def error(self, code: str, message: str) -> None:
        self.issues.append(Issue(code, message, ERROR))

    def warning(self, code: str, message: str) -> None:
        self.issues.append(Issue(code, message, WARNING))

    @property
    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == ERROR]

    @property
    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == WARNING]

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> list[str]:
        return [i.code for i in self.issues]

    def as_dict(self) -> dict[str, Any]:
        return {"ok": self.ok, "issues": [i.as_dict() for i in self.issues]}
