"""Turning binary judgments into marks, rubric levels, and feedback documents.

Marks are all-or-nothing per criterion: a criterion is awarded exactly when
the verdict equals its ``awarded_on`` polarity, so a "No" on a negatively
phrased check earns the marks. Feedback shows a tick or cross by
marks-earned, not by the raw verdict, so those checks read correctly to
students.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping

from .errors import (
    DuplicateJudgmentError,
    IncompleteJudgmentsError,
    UnknownCriterionError,
)
from .judging.models import Judgment
from .rubric import AssessmentTask, BinaryCriterion, map_marks_to_level
from .verdicts import Verdict

NO_EXPLANATION = "(no explanation provided)"


@dataclass(frozen=True)
class CriterionOutcome:
    criterion_id: str
    verdict: Verdict
    awarded: bool
    marks_awarded: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "criterion_id": self.criterion_id,
            "verdict": self.verdict.value,
            "awarded": self.awarded,
            "marks_awarded": self.marks_awarded,
        }


@dataclass(frozen=True)
class GradeRecord:
    """One grader's complete mark breakdown for one submission."""

    submission_id: str
    grader_id: str
    phase: str
    outcomes: tuple[CriterionOutcome, ...]
    total_marks: int
    level_name: str

    def as_dict(self) -> dict[str, Any]:
        return {
            "submission_id": self.submission_id,
            "grader_id": self.grader_id,
            "phase": self.phase,
            "per_criterion": [o.as_dict() for o in self.outcomes],
            "total_marks": self.total_marks,
            "level": self.level_name,
        }


def marks_for(criterion: BinaryCriterion, verdict: Verdict) -> int:
    """Full marks when the verdict matches the award polarity, else zero."""
    return criterion.marks if verdict == criterion.awarded_on else 0


def aggregate_marks(task: AssessmentTask, judgments: Iterable[Judgment]) -> GradeRecord:
    """Fold one grader's judgments on one submission into a GradeRecord.

    Requires exactly one judgment per criterion of the task, all from the
    same (grader, submission, phase). Judgment order does not matter;
    outcomes come back in task order.
    """
    judgments = list(judgments)
    if not judgments:
        raise IncompleteJudgmentsError(
            f"no judgments supplied; task {task.id!r} has {len(task.criteria)} criteria",
            missing=[c.id for c in task.criteria],
        )

    keys = {(j.grader_id, j.submission_id, j.phase) for j in judgments}
    if len(keys) > 1:
        raise ValueError(f"judgments mix graders/submissions/phases: {sorted(keys)}")
    grader_id, submission_id, phase = next(iter(keys))

    valid_ids = set(task.criterion_ids)
    by_criterion: dict[str, Judgment] = {}
    for judgment in judgments:
        if judgment.criterion_id not in valid_ids:
            raise UnknownCriterionError(
                f"judgment references criterion {judgment.criterion_id!r} "
                f"which is not on task {task.id!r}",
                criterion_id=judgment.criterion_id,
            )
        if judgment.criterion_id in by_criterion:
            raise DuplicateJudgmentError(
                f"two judgments for criterion {judgment.criterion_id!r}",
                criterion_id=judgment.criterion_id,
            )
        by_criterion[judgment.criterion_id] = judgment

    missing = [c.id for c in task.criteria if c.id not in by_criterion]
    if missing:
        raise IncompleteJudgmentsError(
            f"missing judgments for criteria: {', '.join(missing)}", missing=missing
        )

    outcomes = []
    for criterion in task.criteria:
        verdict = by_criterion[criterion.id].verdict
        awarded = verdict == criterion.awarded_on
        outcomes.append(
            CriterionOutcome(
                criterion_id=criterion.id,
                verdict=verdict,
                awarded=awarded,
                marks_awarded=marks_for(criterion, verdict),
            )
        )
    total = sum(o.marks_awarded for o in outcomes)
    level = map_marks_to_level(task.rubric, total)
    return GradeRecord(
        submission_id=submission_id,
        grader_id=grader_id,
        phase=phase,
        outcomes=tuple(outcomes),
        total_marks=total,
        level_name=level.name,
    )


def running_total(task: AssessmentTask, verdicts: Mapping[str, Verdict]) -> dict[str, Any]:
    """Partial, polarity-aware progress summary for a possibly incomplete cell set.

    Used by the review service so displayed totals are always
    server-computed, even before every criterion is judged.
    """
    judged = 0
    total = 0
    for criterion in task.criteria:
        verdict = verdicts.get(criterion.id)
        if verdict is None:
            continue
        judged += 1
        total += marks_for(criterion, verdict)
    complete = judged == len(task.criteria)
    return {
        "judged": judged,
        "of": len(task.criteria),
        "total_marks": total,
        "max_marks": task.max_marks,
        "complete": complete,
        "level": map_marks_to_level(task.rubric, total).name if complete else None,
    }


def assemble_feedback(
    record: GradeRecord,
    task: AssessmentTask,
    judgments: Iterable[Judgment],
    *,
    provenance: str = "AI-only draft",
) -> str:
    """Render a Markdown feedback document for one submission.

    Criteria appear in task order with a tick where marks were earned and a
    cross otherwise; each line quotes the stored justification verbatim. The
    footer states the total, the rubric level, and who produced the
    justifications.
    """
    by_criterion = {j.criterion_id: j for j in judgments}
    outcome_by_id = {o.criterion_id: o for o in record.outcomes}

    lines = [
        f"# Feedback — {record.submission_id}",
        "",
        f"**Task:** {task.statement}",
        "",
        "## Criteria",
        "",
    ]
    for criterion in task.criteria:
        outcome = outcome_by_id[criterion.id]
        judgment = by_criterion.get(criterion.id)
        note = judgment.justification.strip() if judgment else ""
        mark = "✓" if outcome.awarded else "✗"
        lines.append(
            f"- {mark} {criterion.text} — {note if note else NO_EXPLANATION}"
        )
    lines += [
        "",
        "## Result",
        "",
        f"**{record.total_marks}/{task.max_marks} — {record.level_name}**",
        "",
        f"_{provenance}_",
        "",
    ]
    return "\n".join(lines)
