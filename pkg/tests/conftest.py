from __future__ import annotations

import json
from pathlib import Path

import pytest

from rubricate.rubric import AssessmentTask, task_from_dict
from rubricate.submissions import Submission, submission_id_for
from rubricate.verdicts import Verdict

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def load_fixture_task(name: str) -> AssessmentTask:
    data = json.loads((FIXTURES / "tasks" / f"{name}.json").read_text(encoding="utf-8"))
    return task_from_dict(data, source=f"{name}.json")


@pytest.fixture
def linearity_task() -> AssessmentTask:
    return load_fixture_task("linearity-proof")


@pytest.fixture
def sample_submission(linearity_task: AssessmentTask) -> Submission:
    body = (FIXTURES / "submissions" / "alex.tex").read_text(encoding="utf-8")
    return Submission(
        submission_id=submission_id_for(linearity_task.id, "S1"),
        task_id=linearity_task.id,
        student_alias="S1",
        body=body,
    )


@pytest.fixture
def mock_fixture() -> dict:
    return json.loads((FIXTURES / "mock_replies.json").read_text(encoding="utf-8"))


def verdicts_for_total(task: AssessmentTask, total: int) -> dict[str, "Verdict"]:
    """Verdict vector awarding the first criteria in task order until ``total``.

    Only valid for all-1-mark tasks; checked against aggregate_marks by the
    tests that use it.
    """
    assert all(c.marks == 1 for c in task.criteria)
    assert 0 <= total <= len(task.criteria)
    verdicts = {}
    for i, criterion in enumerate(task.criteria):
        awarded = i < total
        verdicts[criterion.id] = (
            criterion.awarded_on if awarded else criterion.awarded_on.flipped()
        )
    return verdicts
