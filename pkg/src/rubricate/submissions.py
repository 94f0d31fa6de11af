"""Loading, checking and anonymizing LaTeX submissions against a cohort manifest.

Raw student identifiers never reach graded data: each one is swapped for an
"S<n>" alias in first-seen manifest order, and the raw-to-alias map is kept
in its own file so it can be stored with tighter permissions.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (
    EmptySubmissionError,
    FormatError,
    StoreIOError,
    UnknownTaskError,
    ValidationReport,
)
from .rubric import AssessmentTask


@dataclass(frozen=True)
class Submission:
    """One anonymized student answer, in LaTeX, for one task."""

    submission_id: str
    task_id: str
    student_alias: str
    body: str


@dataclass(frozen=True)
class ManifestEntry:
    student_id: str
    task_id: str
    path: str


@dataclass(frozen=True)
class CohortManifest:
    """Which student answered which task, and where the answer file lives."""

    session_name: str
    entries: tuple[ManifestEntry, ...]

    def __init__(self, session_name: str, entries: Iterable[ManifestEntry]):
        object.__setattr__(self, "session_name", session_name)
        object.__setattr__(self, "entries", tuple(entries))


def submission_id_for(task_id: str, alias: str) -> str:
    """Stable, filesystem-safe identifier for a (task, alias) pair."""
    return f"{task_id}__{alias}"


class AliasMap:
    """Deterministic raw-id to alias assignment, "S1", "S2", ... in first-seen order.

    Injective over distinct raw ids; asking again for a known id returns the
    same alias.
    """

    def __init__(self, aliases: Mapping[str, str] | None = None):
        self._aliases: dict[str, str] = dict(aliases or {})

    def alias_for(self, raw_student_id: str) -> str:
        existing = self._aliases.get(raw_student_id)
        if existing is not None:
            return existing
        alias = f"S{len(self._aliases) + 1}"
        self._aliases[raw_student_id] = alias
        return alias

    def __len__(self) -> int:
        return len(self._aliases)

    def as_dict(self) -> dict[str, str]:
        return dict(self._aliases)

    @classmethod
    def from_dict(cls, data: Mapping[str, str]) -> "AliasMap":
        return cls(data)


def anonymize(raw_student_id: str, aliases: AliasMap) -> str:
    """Alias a raw student id within a session (same id, same alias)."""
    return aliases.alias_for(raw_student_id)


def load_manifest(path: str | Path) -> CohortManifest:
    """Parse a manifest file: ``{session_name, entries:[{student_id, task_id, path}]}``."""
    manifest_path = Path(path)
    if not manifest_path.exists():
        raise StoreIOError(f"manifest not found: {manifest_path}")
    try:
        data = json.loads(manifest_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise StoreIOError(f"cannot read manifest {manifest_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{manifest_path.name}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc

    if not isinstance(data, dict) or not isinstance(data.get("entries"), list):
        raise FormatError(f"{manifest_path.name}: expected an object with an 'entries' list")
    session_name = data.get("session_name", "")
    if not isinstance(session_name, str):
        raise FormatError(f"{manifest_path.name}: 'session_name' must be a string")

    entries: list[ManifestEntry] = []
    seen: set[tuple[str, str]] = set()
    for i, raw in enumerate(data["entries"]):
        if not isinstance(raw, dict):
            raise FormatError(f"{manifest_path.name}: entry #{i + 1} must be an object")
        try:
            entry = ManifestEntry(
                student_id=raw["student_id"], task_id=raw["task_id"], path=raw["path"]
            )
        except KeyError as exc:
            raise FormatError(
                f"{manifest_path.name}: entry #{i + 1} is missing field {exc.args[0]!r}"
            ) from exc
        key = (entry.student_id, entry.task_id)
        if key in seen:
            raise FormatError(
                f"{manifest_path.name}: duplicate entry for student {entry.student_id!r} "
                f"on task {entry.task_id!r}"
            )
        seen.add(key)
        entries.append(entry)
    return CohortManifest(session_name=session_name, entries=entries)


_INLINE_OPEN = re.compile(r"(?<!\\)\\\(")
_INLINE_CLOSE = re.compile(r"(?<!\\)\\\)")
_DISPLAY_OPEN = re.compile(r"(?<!\\)\\\[")
_DISPLAY_CLOSE = re.compile(r"(?<!\\)\\\]")
_DOLLAR = re.compile(r"(?<!\\)\$")


def validate_latex(body: str) -> ValidationReport:
    """Advisory checks on a LaTeX body; warnings only, never a rejection.

    Graders must be able to assess malformed work, so unbalanced math
    delimiters, unbalanced braces and stray control bytes are reported but
    the content is always kept.
    """
    report = ValidationReport()

    if len(_DOLLAR.findall(body)) % 2 != 0:
        report.warning("UNBALANCED_MATH", "odd number of unescaped '$' delimiters")
    if len(_INLINE_OPEN.findall(body)) != len(_INLINE_CLOSE.findall(body)):
        report.warning("UNBALANCED_MATH", r"mismatched \( ... \) inline math delimiters")
    if len(_DISPLAY_OPEN.findall(body)) != len(_DISPLAY_CLOSE.findall(body)):
        report.warning("UNBALANCED_MATH", r"mismatched \[ ... \] display math delimiters")

    depth = 0
    dipped = False
    opens = closes = 0
    previous = ""
    for ch in body:
        if ch == "{" and previous != "\\":
            opens += 1
            depth += 1
        elif ch == "}" and previous != "\\":
            closes += 1
            depth -= 1
            if depth < 0:
                dipped = True
        previous = ch if previous != "\\" or ch != "\\" else ""
    if opens != closes or dipped:
        report.warning(
            "UNBALANCED_BRACES", f"unbalanced braces ({opens} opened, {closes} closed)"
        )

    suspicious = sorted({ch for ch in body if ord(ch) < 0x20 and ch not in "\t\n\r"})
    if suspicious:
        shown = ", ".join(f"0x{ord(c):02x}" for c in suspicious)
        report.warning("CONTROL_CHARS", f"suspicious control bytes present: {shown}")
    return report


def load_submissions(
    manifest: CohortManifest,
    tasks: Iterable[AssessmentTask],
    aliases: AliasMap,
    *,
    base_dir: str | Path | None = None,
) -> list[Submission]:
    """Read one Submission per manifest entry, aliasing students as they appear.

    Entries are processed in manifest order so alias assignment is
    deterministic regardless of how file reads are scheduled. Paths are
    resolved relative to ``base_dir`` when given.
    """
    tasks_by_id = {task.id: task for task in tasks}
    root = Path(base_dir) if base_dir is not None else None

    submissions: list[Submission] = []
    for entry in manifest.entries:
        if entry.task_id not in tasks_by_id:
            raise UnknownTaskError(
                f"manifest references task {entry.task_id!r} which is not loaded",
                task_id=entry.task_id,
            )
        file_path = Path(entry.path)
        if root is not None and not file_path.is_absolute():
            file_path = root / file_path
        try:
            body = file_path.read_text(encoding="utf-8")
        except OSError as exc:
            raise StoreIOError(f"cannot read submission file {file_path}: {exc}") from exc
        if not body.strip():
            raise EmptySubmissionError(
                f"submission file {file_path} is empty (student {entry.student_id!r}, "
                f"task {entry.task_id!r})"
            )
        alias = aliases.alias_for(entry.student_id)
        submissions.append(
            Submission(
                submission_id=submission_id_for(entry.task_id, alias),
                task_id=entry.task_id,
                student_alias=alias,
                body=body,
            )
        )
    return submissions


def latex_warnings(submissions: Iterable[Submission]) -> dict[str, ValidationReport]:
    """Advisory LaTeX reports keyed by submission id; clean submissions are omitted."""
    findings: dict[str, ValidationReport] = {}
    for submission in submissions:
        report = validate_latex(submission.body)
        if report.issues:
            findings[submission.submission_id] = report
    return findings
