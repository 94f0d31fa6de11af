"""Command-line workflow: validate, ingest, grade, import verdicts, report, serve.

Exit codes are machine-readable: 0 success, 1 validation failure, 2 IO or
usage problems, 3 judge failure. Mutating commands take the session's
exclusive write lock.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from ..errors import (
    BundleValidationError,
    JudgeUnavailableError,
    RubricateError,
    SessionLockedError,
    StoreIOError,
)
from ..judging import HttpJudge, MockJudge, RetryPolicy, grade_many
from ..judging.models import PHASE_INITIAL, Judgment
from ..judging.judges import load_mock_fixture
from ..judging.runner import utc_now
from ..rubric import load_task_bundle
from ..scoring import aggregate_marks, assemble_feedback
from ..submissions import latex_warnings, load_manifest, load_submissions
from ..verdicts import Verdict
from . import reports
from .store import GradingSession, SessionStore

EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_JUDGE = 3


def _handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (StoreIOError, SessionLockedError) as exc:
            click.echo(f"error [{exc.code}]: {exc}", err=True)
            sys.exit(EXIT_IO)
        except JudgeUnavailableError as exc:
            click.echo(f"error [{exc.code}]: {exc}", err=True)
            sys.exit(EXIT_JUDGE)
        except BundleValidationError as exc:
            click.echo(f"error [{exc.code}]: {exc}", err=True)
            for name, report in exc.reports.items():
                for issue in report.issues:
                    click.echo(f"  {name}: [{issue.code}] {issue.message}", err=True)
            sys.exit(EXIT_VALIDATION)
        except RubricateError as exc:
            click.echo(f"error [{exc.code}]: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except OSError as exc:
            click.echo(f"error [IO_ERROR]: {exc}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


@click.group()
@click.version_option(package_name="rubricate")
def main() -> None:
    """Criterion-referenced grading with binary rubric checks."""


@main.command()
@click.argument("bundle", type=click.Path(path_type=Path))
@click.option(
    "--relax-criteria-count",
    is_flag=True,
    help="Demote the 3-6 criterion count rule to a warning.",
)
@_handle_errors
def validate(bundle: Path, relax_criteria_count: bool) -> None:
    """Validate every task in BUNDLE; exit nonzero on errors."""
    tasks = load_task_bundle(bundle, relax_criteria_count=relax_criteria_count)
    for task in tasks:
        click.echo(
            f"ok: {task.id} ({task.category.value}, {len(task.criteria)} criteria, "
            f"max {task.max_marks} marks)"
        )
    click.echo(f"{len(tasks)} task(s) valid")


def _open_session(session_dir: Path) -> tuple[SessionStore, GradingSession]:
    store = SessionStore(session_dir)
    return store, store.load()


@main.command()
@click.argument("manifest", type=click.Path(path_type=Path))
@click.option("--session", "session_dir", required=True, type=click.Path(path_type=Path))
@click.option("--tasks", "tasks_dir", type=click.Path(path_type=Path), default=None,
              help="Task bundle to (first) load into the session.")
@click.option("--relax-criteria-count", is_flag=True)
@_handle_errors
def ingest(
    manifest: Path, session_dir: Path, tasks_dir: Path | None, relax_criteria_count: bool
) -> None:
    """Load submissions listed in MANIFEST into a session."""
    cohort = load_manifest(manifest)
    store = SessionStore(session_dir)
    with store.lock():
        session = store.load() if store.exists() else GradingSession(cohort.session_name)
        if tasks_dir is not None:
            for task in load_task_bundle(tasks_dir, relax_criteria_count=relax_criteria_count):
                existing = session.tasks.get(task.id)
                if existing is not None and existing != task:
                    raise StoreIOError(
                        f"task {task.id!r} already exists in the session with a "
                        "different definition"
                    )
                session.tasks[task.id] = task
        submissions = load_submissions(
            cohort, session.tasks.values(), session.aliases, base_dir=manifest.parent
        )
        added = session.add_submissions(submissions)
        store.save(session)
    for submission_id, report in latex_warnings(submissions).items():
        for issue in report.warnings:
            click.echo(f"warning: {submission_id}: [{issue.code}] {issue.message}")
    click.echo(
        f"ingested {added} new submission(s) ({len(submissions) - added} already present)"
    )


@main.command()
@click.option("--session", "session_dir", required=True, type=click.Path(path_type=Path))
@click.option("--judge", "judge_kind", type=click.Choice(["remote", "mock"]), required=True)
@click.option("--parallel", type=int, default=4, show_default=True)
@click.option("--mock-fixture", type=click.Path(path_type=Path), default=None)
@click.option("--judge-url", default=None, help="Remote judge endpoint (or RUBRICATE_JUDGE_URL).")
@click.option("--model", default="", help="Model name for the remote judge.")
@click.option("--judge-name", default=None, help="Grader id recorded for this judge.")
@click.option("--max-attempts", type=int, default=3, show_default=True)
@click.option("--combine-steps", is_flag=True,
              help="Send the three steps as one message (single-turn judges).")
@click.option("--retry-flagged", is_flag=True,
              help="Re-attempt submissions previously flagged for human review.")
@_handle_errors
def grade(
    session_dir: Path,
    judge_kind: str,
    parallel: int,
    mock_fixture: Path | None,
    judge_url: str | None,
    model: str,
    judge_name: str | None,
    max_attempts: int,
    combine_steps: bool,
    retry_flagged: bool,
) -> None:
    """Run the judge over every ungraded (task, submission) pair; idempotent."""
    if judge_kind == "mock":
        if mock_fixture is None:
            raise click.UsageError("--judge mock requires --mock-fixture")
        judge = MockJudge(load_mock_fixture(mock_fixture), name=judge_name or "mock-judge")
    else:
        judge = HttpJudge(judge_url, model=model, name=judge_name or "ai-judge")

    store, session = _open_session(session_dir)
    with store.lock():
        already = {
            j.submission_id
            for j in session.initial_judgments(grader_id=judge.name)
        }
        skipped_flagged = set() if retry_flagged else set(session.needs_human)
        pending = []
        for submission in sorted(session.submissions.values(), key=lambda s: s.submission_id):
            if submission.submission_id in already:
                continue
            if submission.submission_id in skipped_flagged:
                continue
            pending.append((session.tasks[submission.task_id], submission))

        def commit(submission, batch):
            if batch is None:
                session.needs_human.add(submission.submission_id)
                store.save_meta(session)
            else:
                session.needs_human.discard(submission.submission_id)
                session.add_initial_judgments(batch)
                store.save_judgments(session)
                store.save_meta(session)

        result = grade_many(
            pending,
            judge,
            RetryPolicy(max_attempts=max_attempts),
            parallel=parallel,
            combine_steps=combine_steps,
            on_submission=commit,
        )
    click.echo(
        f"graded {len(result.graded_submissions)} submission(s), "
        f"{len(result.needs_human)} flagged for human review, "
        f"{len(session.submissions) - len(pending)} skipped"
    )
    for submission_id in result.needs_human:
        click.echo(f"needs human: {submission_id}")


@main.command(name="judge-as")
@click.argument("grader_id")
@click.argument("verdict_file", type=click.Path(path_type=Path))
@click.option("--session", "session_dir", required=True, type=click.Path(path_type=Path))
@_handle_errors
def judge_as(grader_id: str, verdict_file: Path, session_dir: Path) -> None:
    """Import a human grader's verdict file as initial judgments.

    The file is a JSON list of {submission_id, criterion_id, verdict, note?}.
    """
    try:
        entries = json.loads(verdict_file.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise StoreIOError(f"verdict file not found: {verdict_file}") from exc
    except json.JSONDecodeError as exc:
        raise StoreIOError(f"{verdict_file.name}: invalid JSON: {exc.msg}") from exc
    if not isinstance(entries, list):
        raise StoreIOError(f"{verdict_file.name}: expected a JSON list of judgments")

    stamp = utc_now()
    judgments = [
        Judgment(
            grader_id=grader_id,
            submission_id=entry["submission_id"],
            criterion_id=entry["criterion_id"],
            verdict=Verdict.from_string(entry["verdict"]),
            justification=entry.get("note", ""),
            phase=PHASE_INITIAL,
            timestamp=stamp,
        )
        for entry in entries
    ]
    store, session = _open_session(session_dir)
    with store.lock():
        session.add_initial_judgments(judgments)
        store.save_judgments(session)
    click.echo(f"imported {len(judgments)} judgment(s) for grader {grader_id}")


def _emit_report(store: SessionStore, name: str, payload: dict, markdown: str) -> None:
    store.reports_dir.mkdir(parents=True, exist_ok=True)
    (store.reports_dir / f"{name}.json").write_text(
        json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    (store.reports_dir / f"{name}.md").write_text(markdown, encoding="utf-8")
    click.echo(markdown)


@main.command()
@click.option("--session", "session_dir", required=True, type=click.Path(path_type=Path))
@click.option("--agreement", default=None, metavar="A,B",
              help="Agreement between two graders.")
@click.option("--accuracy", default=None, metavar="GRADER",
              help="Accuracy of a grader against consensus.")
@click.option("--taxonomy", is_flag=True, help="Discrepancy taxonomy distribution.")
@click.option("--marks-table", default=None, metavar="TASK",
              help="Per-submission marks grid for one task.")
@click.option("--scope-task", multiple=True, help="Restrict metrics to these task ids.")
@_handle_errors
def report(
    session_dir: Path,
    agreement: str | None,
    accuracy: str | None,
    taxonomy: bool,
    marks_table: str | None,
    scope_task: tuple[str, ...],
) -> None:
    """Emit reliability reports (Markdown + JSON) under the session's reports/."""
    store, session = _open_session(session_dir)
    scope = set(scope_task) or None
    produced = False
    if agreement:
        try:
            grader_a, grader_b = (part.strip() for part in agreement.split(",", 1))
        except ValueError:
            raise click.UsageError("--agreement expects two grader ids: A,B")
        payload = reports.agreement_payload(session, grader_a, grader_b, task_ids=scope)
        _emit_report(
            store,
            f"agreement_{grader_a}_vs_{grader_b}",
            payload,
            reports.agreement_markdown(payload),
        )
        produced = True
    if accuracy:
        payload = reports.accuracy_payload(session, accuracy, task_ids=scope)
        _emit_report(store, f"accuracy_{accuracy}", payload, reports.accuracy_markdown(payload))
        produced = True
    if taxonomy:
        payload = reports.taxonomy_payload(session)
        _emit_report(store, "taxonomy", payload, reports.taxonomy_markdown(payload))
        produced = True
    if marks_table:
        payload = reports.marks_table_payload(session, marks_table)
        _emit_report(
            store,
            f"marks_table_{marks_table}",
            payload,
            reports.marks_table_markdown(payload),
        )
        produced = True
    if not produced:
        raise click.UsageError(
            "nothing to report: pass --agreement, --accuracy, --taxonomy or --marks-table"
        )


@main.command()
@click.option("--session", "session_dir", required=True, type=click.Path(path_type=Path))
@click.option("--draft", is_flag=True,
              help="Render from AI-only initial judgments, watermarked as a draft.")
@click.option("--grader", default=None,
              help="Grader whose judgments feed --draft (default: the only grader).")
@_handle_errors
def feedback(session_dir: Path, draft: bool, grader: str | None) -> None:
    """Write per-submission feedback files for consensus-complete submissions."""
    store, session = _open_session(session_dir)
    out_root = store.reports_dir / "feedback"
    draft_grader = (grader or _sole_grader(session)) if draft else None
    written = 0
    skipped = 0
    for submission in sorted(session.submissions.values(), key=lambda s: s.submission_id):
        task = session.tasks[submission.task_id]
        if draft:
            grader_id = draft_grader
            judgments = session.initial_judgments(
                grader_id=grader_id, submission_id=submission.submission_id
            )
            if len(judgments) != len(task.criteria):
                skipped += 1
                continue
            record = aggregate_marks(task, judgments)
            provenance = f"AI-only draft — justifications by {grader_id}, not human-reviewed"
        else:
            resolved = {
                criterion.id: session.consensus.get((submission.submission_id, criterion.id))
                for criterion in task.criteria
            }
            if any(record is None for record in resolved.values()):
                skipped += 1
                continue
            consensus_judgments = [
                Judgment(
                    grader_id="consensus",
                    submission_id=submission.submission_id,
                    criterion_id=criterion.id,
                    verdict=resolved[criterion.id].resolved_verdict,
                    justification="",
                    phase="consensus",
                )
                for criterion in task.criteria
            ]
            record = aggregate_marks(task, consensus_judgments)
            judgments, sources = _consensus_notes(session, submission.submission_id, task, resolved)
            provenance = (
                "AI-assisted, human-reviewed — justifications from "
                + ", ".join(sorted(sources))
            )
        document = assemble_feedback(record, task, judgments, provenance=provenance)
        target = out_root / task.id / f"{submission.student_alias}.feedback.md"
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(document, encoding="utf-8")
        written += 1
    click.echo(f"wrote {written} feedback file(s) under {out_root} ({skipped} skipped)")


def _sole_grader(session: GradingSession) -> str:
    graders = session.graders()
    if len(graders) != 1:
        raise click.UsageError(
            f"--draft needs --grader when the session has {len(graders)} graders "
            f"({', '.join(graders) or 'none'})"
        )
    return graders[0]


def _consensus_notes(session, submission_id, task, resolved):
    """Pick one justification per criterion: moderation note, else a matching initial."""
    judgments = []
    sources: set[str] = set()
    initials = session.initial_judgments(submission_id=submission_id)
    for criterion in task.criteria:
        record = resolved[criterion.id]
        note = record.resolution_note.strip()
        if note:
            judgments.append(
                Judgment("moderation", submission_id, criterion.id, record.resolved_verdict, note)
            )
            sources.add("moderation notes")
            continue
        matching = sorted(
            (
                j
                for j in initials
                if j.criterion_id == criterion.id and j.verdict == record.resolved_verdict
            ),
            key=lambda j: j.grader_id,
        )
        if matching:
            judgments.append(matching[0])
            sources.add(matching[0].grader_id)
        else:
            judgments.append(
                Judgment("moderation", submission_id, criterion.id, record.resolved_verdict, "")
            )
            sources.add("moderation notes")
    return judgments, sources


@main.command()
@click.option("--session", "session_dir", required=True, type=click.Path(path_type=Path))
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui", "ui_dir", type=click.Path(path_type=Path), default=None,
              help="Static review UI directory to host at /.")
@_handle_errors
def serve(session_dir: Path, port: int, host: str, ui_dir: Path | None) -> None:
    """Start the review API (and static UI hosting) over one session."""
    import uvicorn

    from .api import create_app

    store = SessionStore(session_dir)
    with store.lock():
        app = create_app(store, static_dir=ui_dir)
        uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
