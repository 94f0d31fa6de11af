"""Review HTTP API consumed by the browser UI.

All grading math happens server-side: judgment and consensus writes return
recomputed totals so clients never have to (and never should) do their own
mark arithmetic. Mutations funnel through one lock and are persisted
immediately; reads serve consistent in-memory snapshots.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Any, Callable

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..errors import (
    DuplicateJudgmentError,
    EmptyTagsError,
    FrozenCellError,
    MissingInitialError,
    NoOverlapError,
    NotAMismatchError,
    RubricateError,
    UnknownCriterionError,
    UnknownTaskError,
    UnresolvedCellsError,
)
from ..judging.models import PHASE_INITIAL, Judgment
from ..judging.runner import utc_now
from ..reliability import DiscrepancyCategory, DiscrepancyTag, validate_tag
from ..rubric import task_to_dict
from ..scoring import aggregate_marks, running_total
from ..verdicts import Verdict
from . import reports
from .store import SessionStore

_STATUS_BY_CODE = {
    DuplicateJudgmentError.code: 409,
    FrozenCellError.code: 409,
    MissingInitialError.code: 409,
    NotAMismatchError.code: 409,
    UnknownTaskError.code: 404,
    UnknownCriterionError.code: 404,
    NoOverlapError.code: 400,
    UnresolvedCellsError.code: 409,
    EmptyTagsError.code: 404,
    "FORMAT_ERROR": 400,
    "INTEGRITY_ERROR": 404,
}


class JudgmentIn(BaseModel):
    grader_id: str
    submission_id: str
    criterion_id: str
    verdict: str
    note: str = ""


class ConsensusIn(BaseModel):
    submission_id: str
    criterion_id: str
    resolved_verdict: str
    note: str = ""
    resolved_by: list[str]


class TagIn(BaseModel):
    submission_id: str
    criterion_id: str
    grader_id: str
    category: str
    note: str = ""


def create_app(
    store: SessionStore,
    *,
    static_dir: str | Path | None = None,
    clock: Callable[[], str] = utc_now,
) -> FastAPI:
    """Build the review app over one session directory (single writer)."""
    app = FastAPI(title="rubricate review service")
    session = store.load()
    write_lock = threading.Lock()

    @app.exception_handler(RubricateError)
    async def domain_error_handler(_request: Request, exc: RubricateError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(
            status_code=status,
            content={"error": exc.code, "message": str(exc), "details": _plain(exc.details)},
        )

    def _submission_or_404(submission_id: str):
        submission = session.submissions.get(submission_id)
        if submission is None:
            raise UnknownTaskError(f"unknown submission {submission_id!r}")
        return submission

    def _consensus_progress(submission_id: str) -> dict[str, Any]:
        task = session.task_of(submission_id)
        verdicts = {}
        for criterion in task.criteria:
            record = session.consensus.get((submission_id, criterion.id))
            if record is not None:
                verdicts[criterion.id] = record.resolved_verdict
        return running_total(task, verdicts)

    def _grader_progress(submission_id: str, grader_id: str) -> dict[str, Any]:
        task = session.task_of(submission_id)
        verdicts = {
            j.criterion_id: j.verdict
            for j in session.initial_judgments(
                grader_id=grader_id, submission_id=submission_id
            )
        }
        return running_total(task, verdicts)

    @app.get("/api/session")
    def session_summary() -> dict[str, Any]:
        tasks = []
        consensus_complete = 0
        for task in sorted(session.tasks.values(), key=lambda t: t.id):
            task_subs = []
            for submission in sorted(
                (s for s in session.submissions.values() if s.task_id == task.id),
                key=lambda s: s.submission_id,
            ):
                progress = _consensus_progress(submission.submission_id)
                if progress["complete"]:
                    consensus_complete += 1
                graders = sorted(
                    {
                        j.grader_id
                        for j in session.initial_judgments(
                            submission_id=submission.submission_id
                        )
                    }
                )
                task_subs.append(
                    {
                        "submission_id": submission.submission_id,
                        "alias": submission.student_alias,
                        "graders": graders,
                        "needs_human": submission.submission_id in session.needs_human,
                        "consensus_complete": progress["complete"],
                    }
                )
            tasks.append(
                {
                    "id": task.id,
                    "category": task.category.value,
                    "statement": task.statement,
                    "criteria_count": len(task.criteria),
                    "max_marks": task.max_marks,
                    "submissions": task_subs,
                }
            )
        return {
            "session_name": session.session_name,
            "schema_version": session.schema_version,
            "counts": {
                "tasks": len(session.tasks),
                "submissions": len(session.submissions),
                "initial_judgments": len(
                    [j for j in session.judgments if j.phase == PHASE_INITIAL]
                ),
                "consensus_resolved": len(session.consensus),
                "consensus_complete_submissions": consensus_complete,
                "tags": len(session.tags),
                "needs_human": len(session.needs_human),
            },
            "tasks": tasks,
        }

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str) -> dict[str, Any]:
        task = session.tasks.get(task_id)
        if task is None:
            raise UnknownTaskError(f"unknown task {task_id!r}")
        return {**task_to_dict(task), "max_marks": task.max_marks}

    @app.get("/api/submissions/{submission_id}")
    def get_submission(submission_id: str) -> dict[str, Any]:
        submission = _submission_or_404(submission_id)
        by_grader: dict[str, dict[str, Any]] = {}
        for judgment in session.initial_judgments(submission_id=submission_id):
            by_grader.setdefault(judgment.grader_id, {})[judgment.criterion_id] = {
                "verdict": judgment.verdict.value,
                "justification": judgment.justification,
                "timestamp": judgment.timestamp,
            }
        consensus_records = {}
        task = session.task_of(submission_id)
        for criterion in task.criteria:
            record = session.consensus.get((submission_id, criterion.id))
            if record is not None:
                consensus_records[criterion.id] = record.as_dict()
        return {
            "submission_id": submission.submission_id,
            "task_id": submission.task_id,
            "alias": submission.student_alias,
            "body": submission.body,
            "needs_human": submission_id in session.needs_human,
            "frozen": submission_id in session.frozen_submissions(),
            "judgments": by_grader,
            "progress": {
                grader: _grader_progress(submission_id, grader) for grader in by_grader
            },
            "consensus": {
                "records": consensus_records,
                "progress": _consensus_progress(submission_id),
            },
        }

    @app.post("/api/judgments", status_code=201)
    def post_judgment(payload: JudgmentIn) -> dict[str, Any]:
        judgment = Judgment(
            grader_id=payload.grader_id,
            submission_id=payload.submission_id,
            criterion_id=payload.criterion_id,
            verdict=Verdict.from_string(payload.verdict),
            justification=payload.note,
            phase=PHASE_INITIAL,
            timestamp=clock(),
        )
        with write_lock:
            _submission_or_404(payload.submission_id)
            session.add_initial_judgments([judgment])
            store.save_judgments(session)
        return {
            "judgment": judgment.as_dict(),
            "progress": _grader_progress(payload.submission_id, payload.grader_id),
        }

    @app.post("/api/consensus", status_code=201)
    def post_consensus(payload: ConsensusIn) -> dict[str, Any]:
        with write_lock:
            _submission_or_404(payload.submission_id)
            record = session.consensus.resolve(
                session.matrix(),
                payload.submission_id,
                payload.criterion_id,
                Verdict.from_string(payload.resolved_verdict),
                payload.note,
                payload.resolved_by,
                timestamp=clock(),
            )
            store.save_consensus(session)
        progress = _consensus_progress(payload.submission_id)
        grade_record = None
        if progress["complete"]:
            task = session.task_of(payload.submission_id)
            judgments = [
                Judgment(
                    grader_id="consensus",
                    submission_id=payload.submission_id,
                    criterion_id=criterion.id,
                    verdict=session.consensus.get(
                        (payload.submission_id, criterion.id)
                    ).resolved_verdict,
                    justification="",
                    phase="consensus",
                )
                for criterion in task.criteria
            ]
            grade_record = aggregate_marks(task, judgments).as_dict()
        return {
            "consensus": record.as_dict(),
            "progress": progress,
            "grade_record": grade_record,
        }

    @app.post("/api/discrepancy-tags", status_code=201)
    def post_tag(payload: TagIn) -> dict[str, Any]:
        tag = DiscrepancyTag(
            submission_id=payload.submission_id,
            criterion_id=payload.criterion_id,
            grader_id=payload.grader_id,
            category=DiscrepancyCategory.from_string(payload.category),
            note=payload.note,
        )
        with write_lock:
            _submission_or_404(payload.submission_id)
            validate_tag(tag, session.matrix(), session.consensus)
            session.tags.append(tag)
            store.save_tags(session)
        return {"tag": tag.as_dict()}

    @app.get("/api/reports/agreement")
    def report_agreement(a: str, b: str, task: str | None = None) -> dict[str, Any]:
        scope = {task} if task else None
        return reports.agreement_payload(session, a, b, task_ids=scope)

    @app.get("/api/reports/accuracy")
    def report_accuracy(grader: str, task: str | None = None) -> dict[str, Any]:
        scope = {task} if task else None
        return reports.accuracy_payload(session, grader, task_ids=scope)

    @app.get("/api/reports/taxonomy")
    def report_taxonomy() -> dict[str, Any]:
        return reports.taxonomy_payload(session)

    @app.get("/api/reports/marks-table")
    def report_marks_table(task: str) -> dict[str, Any]:
        return reports.marks_table_payload(session, task)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app


def _plain(details: dict[str, Any]) -> dict[str, Any]:
    """Make error details JSON-friendly (tuples and verdicts appear in some)."""
    safe: dict[str, Any] = {}
    for key, value in details.items():
        if isinstance(value, (list, tuple)):
            safe[key] = [str(v) for v in value]
        elif isinstance(value, (str, int, float, bool)) or value is None:
            safe[key] = value
        else:
            safe[key] = str(value)
    return safe
