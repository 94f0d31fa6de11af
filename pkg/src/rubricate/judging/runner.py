"""Driving a judge over submissions, with retries that never invent grades.

Parse failures are retried immediately with the same script; transport
failures back off exponentially. A submission that exhausts its attempts is
flagged for a human instead of receiving default verdicts.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Iterable, Sequence

from ..errors import (
    JudgeTransportError,
    JudgeUnavailableError,
    NeedsHumanError,
    ResponseParseError,
)
from ..rubric import AssessmentTask
from ..submissions import Submission
from .judges import Judge
from .models import PHASE_INITIAL, Judgment
from .parsing import parse_judge_response
from .prompts import build_prompt_script

DEFAULT_PARALLELISM = 4


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class RetryPolicy:
    """Attempt budget and backoff curve for one submission's grading."""

    max_attempts: int = 3
    backoff_base: float = 1.0
    backoff_factor: float = 2.0

    def backoff_for(self, attempt: int) -> float:
        """Seconds to wait after a transport failure on 1-based ``attempt``."""
        return self.backoff_base * self.backoff_factor ** (attempt - 1)


def grade_submission(
    task: AssessmentTask,
    submission: Submission,
    judge: Judge,
    policy: RetryPolicy = RetryPolicy(),
    *,
    combine_steps: bool = False,
    context: str | None = None,
    clock: Callable[[], str] = utc_now,
    sleep: Callable[[float], None] = time.sleep,
) -> list[Judgment]:
    """Run the three-step script through the judge and parse the reply.

    Returns one initial-phase Judgment per criterion, grader_id set to the
    judge's name. Raises NeedsHumanError after persistent parse failures and
    JudgeUnavailableError after persistent transport failures; neither ever
    records a fabricated verdict.
    """
    script = build_prompt_script(task, submission, context=context)
    messages: Sequence[str] = [script.as_text()] if combine_steps else script.messages()

    last_parse_error: ResponseParseError | None = None
    for attempt in range(1, policy.max_attempts + 1):
        try:
            reply = judge.complete(
                messages, task_id=task.id, submission_id=submission.submission_id
            )
        except JudgeTransportError as exc:
            if attempt == policy.max_attempts:
                raise JudgeUnavailableError(
                    f"judge unreachable after {attempt} attempts: {exc}",
                    submission_id=submission.submission_id,
                ) from exc
            sleep(policy.backoff_for(attempt))
            continue
        try:
            triples = parse_judge_response(reply, task)
        except ResponseParseError as exc:
            last_parse_error = exc
            continue
        stamp = clock()
        return [
            Judgment(
                grader_id=judge.name,
                submission_id=submission.submission_id,
                criterion_id=criterion_id,
                verdict=verdict,
                justification=justification,
                phase=PHASE_INITIAL,
                timestamp=stamp,
            )
            for criterion_id, verdict, justification in triples
        ]

    raise NeedsHumanError(
        f"submission {submission.submission_id!r} needs human review: the judge's "
        f"replies stayed unparseable over {policy.max_attempts} attempts "
        f"(last error: {last_parse_error})",
        submission_id=submission.submission_id,
        attempts=policy.max_attempts,
    )


@dataclass
class GradeRunResult:
    """Outcome of grading a batch: judgments in order, plus flagged cells."""

    judgments: list[Judgment] = field(default_factory=list)
    needs_human: list[str] = field(default_factory=list)
    graded_submissions: list[str] = field(default_factory=list)

    def extend(self, other: "GradeRunResult") -> None:
        self.judgments.extend(other.judgments)
        self.needs_human.extend(other.needs_human)
        self.graded_submissions.extend(other.graded_submissions)


def grade_many(
    pairs: Iterable[tuple[AssessmentTask, Submission]],
    judge: Judge,
    policy: RetryPolicy = RetryPolicy(),
    *,
    parallel: int = DEFAULT_PARALLELISM,
    combine_steps: bool = False,
    context: str | None = None,
    clock: Callable[[], str] = utc_now,
    sleep: Callable[[float], None] = time.sleep,
    on_submission: Callable[[Submission, list[Judgment] | None], None] | None = None,
) -> GradeRunResult:
    """Grade many (task, submission) pairs concurrently, committing in order.

    Work runs on up to ``parallel`` workers to respect judge rate limits, but
    results are consumed in (task_id, submission_id) order regardless of
    completion order; ``on_submission`` fires in that order with the batch
    (or None when the submission was flagged for a human). A transport
    failure aborts the run after the already-ordered prefix is delivered.
    """
    ordered = sorted(pairs, key=lambda pair: (pair[0].id, pair[1].submission_id))
    result = GradeRunResult()
    if not ordered:
        return result

    with ThreadPoolExecutor(max_workers=max(1, parallel)) as pool:
        futures = [
            pool.submit(
                grade_submission,
                task,
                submission,
                judge,
                policy,
                combine_steps=combine_steps,
                context=context,
                clock=clock,
                sleep=sleep,
            )
            for task, submission in ordered
        ]
        for (task, submission), future in zip(ordered, futures):
            try:
                judgments = future.result()
            except NeedsHumanError:
                result.needs_human.append(submission.submission_id)
                if on_submission is not None:
                    on_submission(submission, None)
                continue
            except JudgeUnavailableError:
                for pending in futures:
                    pending.cancel()
                raise
            result.judgments.extend(judgments)
            result.graded_submissions.append(submission.submission_id)
            if on_submission is not None:
                on_submission(submission, judgments)
    return result
