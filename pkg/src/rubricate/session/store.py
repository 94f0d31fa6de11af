"""File-backed grading sessions.

A session is a directory of human-diffable JSON files, one per collection:

    session.json            name, schema version, needs-human flags
    tasks/<task_id>.json    task definitions (bundle format)
    submissions/<id>.json   anonymized submissions
    judgments.json          all judgments, all phases
    consensus.json          resolved cells + overwrite audit trail
    tags.json               discrepancy tags
    aliases.private.json    raw-id to alias map (mode 0600, never in reports)
    reports/                emitted reports and feedback

Writes go through a temp file and an atomic rename, serialization is
byte-stable, and mutation requires the per-session lock file, so crashes
and re-runs leave the directory consistent.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from ..errors import (
    DuplicateJudgmentError,
    FrozenCellError,
    IntegrityError,
    SessionLockedError,
    StoreIOError,
    UnknownCriterionError,
    UnknownTaskError,
)
from ..judging.models import PHASE_INITIAL, Judgment
from ..reliability import ConsensusLedger, DiscrepancyTag, JudgmentMatrix
from ..rubric import AssessmentTask, load_task_bundle, task_to_dict
from ..submissions import AliasMap, Submission

SCHEMA_VERSION = 1
LOCK_FILE = ".lock"


@dataclass
class GradingSession:
    """Everything one grading exercise accumulates, with integrity rules."""

    session_name: str
    schema_version: int = SCHEMA_VERSION
    tasks: dict[str, AssessmentTask] = field(default_factory=dict)
    submissions: dict[str, Submission] = field(default_factory=dict)
    judgments: list[Judgment] = field(default_factory=list)
    consensus: ConsensusLedger = field(default_factory=ConsensusLedger)
    tags: list[DiscrepancyTag] = field(default_factory=list)
    aliases: AliasMap = field(default_factory=AliasMap)
    needs_human: set[str] = field(default_factory=set)

    def task_of(self, submission_id: str) -> AssessmentTask:
        submission = self.submissions.get(submission_id)
        if submission is None:
            raise UnknownTaskError(f"unknown submission {submission_id!r}")
        return self.tasks[submission.task_id]

    def task_by_submission(self) -> dict[str, str]:
        return {s.submission_id: s.task_id for s in self.submissions.values()}

    def matrix(self) -> JudgmentMatrix:
        return JudgmentMatrix.from_judgments(self.judgments, self.task_by_submission())

    def frozen_submissions(self) -> set[str]:
        """Submissions whose initial judgments are frozen (consensus opened)."""
        return self.consensus.submissions()

    def initial_judgments(
        self, *, grader_id: str | None = None, submission_id: str | None = None
    ) -> list[Judgment]:
        return [
            j
            for j in self.judgments
            if j.phase == PHASE_INITIAL
            and (grader_id is None or j.grader_id == grader_id)
            and (submission_id is None or j.submission_id == submission_id)
        ]

    def graders(self) -> list[str]:
        return sorted({j.grader_id for j in self.judgments})

    def add_submissions(self, submissions: Iterable[Submission]) -> int:
        """Add new submissions; already-present ids are skipped (idempotent)."""
        added = 0
        for submission in submissions:
            if submission.task_id not in self.tasks:
                raise UnknownTaskError(
                    f"submission {submission.submission_id!r} references unknown task "
                    f"{submission.task_id!r}"
                )
            if submission.submission_id in self.submissions:
                continue
            self.submissions[submission.submission_id] = submission
            added += 1
        return added

    def add_initial_judgments(self, batch: Iterable[Judgment]) -> None:
        """Append initial judgments, enforcing uniqueness and the freeze rule."""
        existing = {
            (j.grader_id, j.submission_id, j.criterion_id, j.phase) for j in self.judgments
        }
        frozen = self.frozen_submissions()
        staged: list[Judgment] = []
        for judgment in batch:
            if judgment.submission_id not in self.submissions:
                raise IntegrityError(
                    f"judgment references unknown submission {judgment.submission_id!r}"
                )
            task = self.task_of(judgment.submission_id)
            if judgment.criterion_id not in task.criterion_ids:
                raise UnknownCriterionError(
                    f"criterion {judgment.criterion_id!r} is not on task {task.id!r}"
                )
            if judgment.submission_id in frozen:
                raise FrozenCellError(
                    f"submission {judgment.submission_id!r} is frozen: consensus has "
                    "opened, initial judgments are a closed snapshot",
                    submission_id=judgment.submission_id,
                )
            key = (judgment.grader_id, judgment.submission_id, judgment.criterion_id, judgment.phase)
            if key in existing:
                raise DuplicateJudgmentError(
                    f"grader {judgment.grader_id!r} already judged "
                    f"{judgment.submission_id!r} / {judgment.criterion_id!r}",
                    grader_id=judgment.grader_id,
                    submission_id=judgment.submission_id,
                    criterion_id=judgment.criterion_id,
                )
            existing.add(key)
            staged.append(judgment)
        self.judgments.extend(staged)

    def check_integrity(self) -> None:
        """Referential integrity across all collections; raises on violation."""
        for submission in self.submissions.values():
            if submission.task_id not in self.tasks:
                raise IntegrityError(
                    f"submission {submission.submission_id!r} references missing task "
                    f"{submission.task_id!r}"
                )
        seen: set[tuple[str, str, str, str]] = set()
        for judgment in self.judgments:
            if judgment.submission_id not in self.submissions:
                raise IntegrityError(
                    f"judgment references missing submission {judgment.submission_id!r}"
                )
            task = self.task_of(judgment.submission_id)
            if judgment.criterion_id not in task.criterion_ids:
                raise IntegrityError(
                    f"judgment references criterion {judgment.criterion_id!r} not on "
                    f"task {task.id!r}"
                )
            key = (judgment.grader_id, judgment.submission_id, judgment.criterion_id, judgment.phase)
            if key in seen:
                raise IntegrityError(f"duplicate judgment {key!r}")
            seen.add(key)
        for record in self.consensus.records():
            if record.submission_id not in self.submissions:
                raise IntegrityError(
                    f"consensus references missing submission {record.submission_id!r}"
                )
            task = self.task_of(record.submission_id)
            if record.criterion_id not in task.criterion_ids:
                raise IntegrityError(
                    f"consensus references criterion {record.criterion_id!r} not on "
                    f"task {task.id!r}"
                )
        for tag in self.tags:
            if tag.submission_id not in self.submissions:
                raise IntegrityError(f"tag references missing submission {tag.submission_id!r}")


def _dump(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True) + "\n"


def _atomic_write(path: Path, text: str, *, mode: int | None = None) -> None:
    """Write via temp file + rename; skip the write when bytes are unchanged."""
    data = text.encode("utf-8")
    if path.exists() and path.read_bytes() == data:
        if mode is not None:
            os.chmod(path, mode)
        return
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    if mode is not None:
        os.chmod(tmp, mode)
    os.replace(tmp, path)


class SessionLock:
    """Exclusive single-writer lock, one file per session directory.

    A lock left by a dead process is taken over; a live one raises.
    """

    def __init__(self, directory: Path):
        self.path = directory / LOCK_FILE

    def acquire(self) -> None:
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            holder = self._holder_pid()
            if holder is not None and _pid_alive(holder):
                raise SessionLockedError(
                    f"session is locked by running process {holder} ({self.path})",
                    pid=holder,
                ) from None
            os.unlink(self.path)
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        with os.fdopen(fd, "w") as handle:
            handle.write(str(os.getpid()))

    def release(self) -> None:
        try:
            os.unlink(self.path)
        except FileNotFoundError:
            pass

    def _holder_pid(self) -> int | None:
        try:
            return int(self.path.read_text().strip())
        except (OSError, ValueError):
            return None

    def __enter__(self) -> "SessionLock":
        self.acquire()
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.release()


def _pid_alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    return True


class SessionStore:
    """Loads and saves a GradingSession directory with atomic writes."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    @property
    def tasks_dir(self) -> Path:
        return self.directory / "tasks"

    @property
    def submissions_dir(self) -> Path:
        return self.directory / "submissions"

    @property
    def reports_dir(self) -> Path:
        return self.directory / "reports"

    def exists(self) -> bool:
        return (self.directory / "session.json").exists()

    def lock(self) -> SessionLock:
        self.directory.mkdir(parents=True, exist_ok=True)
        return SessionLock(self.directory)

    def create(self, session_name: str) -> GradingSession:
        if self.exists():
            raise StoreIOError(f"session already exists at {self.directory}")
        session = GradingSession(session_name=session_name)
        self.save(session)
        return session

    def load(self) -> GradingSession:
        meta_path = self.directory / "session.json"
        if not meta_path.exists():
            raise StoreIOError(f"no session at {self.directory} (missing session.json)")
        meta = self._read_json(meta_path)
        if meta.get("schema_version") != SCHEMA_VERSION:
            raise IntegrityError(
                f"unsupported session schema {meta.get('schema_version')!r}; "
                f"this build reads version {SCHEMA_VERSION}"
            )
        session = GradingSession(
            session_name=meta.get("session_name", ""),
            schema_version=meta["schema_version"],
            needs_human=set(meta.get("needs_human", [])),
        )

        if self.tasks_dir.exists():
            for task in load_task_bundle(self.tasks_dir):
                session.tasks[task.id] = task

        if self.submissions_dir.exists():
            for file in sorted(self.submissions_dir.glob("*.json")):
                raw = self._read_json(file)
                submission = Submission(
                    submission_id=raw["submission_id"],
                    task_id=raw["task_id"],
                    student_alias=raw["student_alias"],
                    body=raw["body"],
                )
                session.submissions[submission.submission_id] = submission

        judgments_path = self.directory / "judgments.json"
        if judgments_path.exists():
            raw = self._read_json(judgments_path)
            session.judgments = [Judgment.from_dict(j) for j in raw.get("judgments", [])]

        consensus_path = self.directory / "consensus.json"
        if consensus_path.exists():
            session.consensus = ConsensusLedger.from_dict(self._read_json(consensus_path))

        tags_path = self.directory / "tags.json"
        if tags_path.exists():
            raw = self._read_json(tags_path)
            session.tags = [DiscrepancyTag.from_dict(t) for t in raw.get("tags", [])]

        aliases_path = self.directory / "aliases.private.json"
        if aliases_path.exists():
            raw = self._read_json(aliases_path)
            session.aliases = AliasMap.from_dict(raw.get("aliases", {}))

        session.check_integrity()
        return session

    def save(self, session: GradingSession) -> None:
        """Persist every collection; each file is written atomically."""
        self.directory.mkdir(parents=True, exist_ok=True)
        self.tasks_dir.mkdir(exist_ok=True)
        self.submissions_dir.mkdir(exist_ok=True)
        self.reports_dir.mkdir(exist_ok=True)

        self.save_meta(session)
        for task in session.tasks.values():
            _atomic_write(self.tasks_dir / f"{task.id}.json", _dump(task_to_dict(task)))
        for submission in session.submissions.values():
            _atomic_write(
                self.submissions_dir / f"{submission.submission_id}.json",
                _dump(
                    {
                        "submission_id": submission.submission_id,
                        "task_id": submission.task_id,
                        "student_alias": submission.student_alias,
                        "body": submission.body,
                    }
                ),
            )
        self.save_judgments(session)
        self.save_consensus(session)
        self.save_tags(session)
        self.save_aliases(session)

    def save_meta(self, session: GradingSession) -> None:
        _atomic_write(
            self.directory / "session.json",
            _dump(
                {
                    "schema_version": session.schema_version,
                    "session_name": session.session_name,
                    "needs_human": sorted(session.needs_human),
                }
            ),
        )

    def save_judgments(self, session: GradingSession) -> None:
        ordered = sorted(
            session.judgments,
            key=lambda j: (j.submission_id, j.grader_id, j.phase, j.criterion_id),
        )
        _atomic_write(
            self.directory / "judgments.json",
            _dump({"judgments": [j.as_dict() for j in ordered]}),
        )

    def save_consensus(self, session: GradingSession) -> None:
        _atomic_write(self.directory / "consensus.json", _dump(session.consensus.as_dict()))

    def save_tags(self, session: GradingSession) -> None:
        _atomic_write(
            self.directory / "tags.json", _dump({"tags": [t.as_dict() for t in session.tags]})
        )

    def save_aliases(self, session: GradingSession) -> None:
        _atomic_write(
            self.directory / "aliases.private.json",
            _dump({"aliases": session.aliases.as_dict()}),
            mode=0o600,
        )

    def _read_json(self, path: Path) -> dict[str, Any]:
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise StoreIOError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise IntegrityError(f"{path.name} is corrupt: {exc.msg} (line {exc.lineno})") from exc
