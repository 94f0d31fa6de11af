from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rubricate.errors import (
    DuplicateJudgmentError,
    IncompleteJudgmentsError,
    UnknownCriterionError,
)
from rubricate.judging.models import Judgment
from rubricate.rubric import AssessmentTask, BinaryCriterion, Rubric, RubricLevel, TaskCategory
from rubricate.scoring import NO_EXPLANATION, aggregate_marks, assemble_feedback, running_total
from rubricate.verdicts import Verdict


def judgments_for(task, verdicts, grader="g", submission="sub", phase="initial"):
    return [
        Judgment(
            grader_id=grader,
            submission_id=submission,
            criterion_id=criterion.id,
            verdict=verdict,
            justification=f"note on {criterion.id}",
        )
        for criterion, verdict in zip(task.criteria, verdicts)
    ]


def build_task(marks_and_polarity, task_id="t", category=TaskCategory.PROOF):
    """Task with the given (marks, awarded_on) criteria and a two-band rubric."""
    criteria = [
        BinaryCriterion(id=f"c{i}", text=f"Check {i}?", marks=m, awarded_on=p)
        for i, (m, p) in enumerate(marks_and_polarity, start=1)
    ]
    total = sum(m for m, _ in marks_and_polarity)
    rubric = Rubric(
        learning_outcome="x",
        levels=[RubricLevel("low", 0, total - 1), RubricLevel("high", total, total)],
    )
    return AssessmentTask(
        id=task_id, statement="Do it.", category=category, rubric=rubric, criteria=criteria
    )


def naive_grade(task, verdicts):
    """Independent oracle: count marks criterion by criterion, then scan bands."""
    total = 0
    for criterion, verdict in zip(task.criteria, verdicts):
        if verdict == criterion.awarded_on:
            total = total + criterion.marks
    for level in task.rubric.levels:
        if level.min_marks <= total <= level.max_marks:
            return total, level.name
    raise AssertionError("no band matched")


class TestAggregateMarks:
    def test_full_marks_with_negative_polarity_item(self, linearity_task):
        verdicts = [Verdict.YES, Verdict.YES, Verdict.YES, Verdict.YES, Verdict.NO]
        record = aggregate_marks(linearity_task, judgments_for(linearity_task, verdicts))
        assert record.total_marks == 5
        assert record.level_name == "Level 3: Accomplished"
        assert all(o.awarded for o in record.outcomes)

    def test_fully_inverted_verdicts_score_zero(self, linearity_task):
        verdicts = [Verdict.NO, Verdict.NO, Verdict.NO, Verdict.NO, Verdict.YES]
        record = aggregate_marks(linearity_task, judgments_for(linearity_task, verdicts))
        assert record.total_marks == 0
        assert record.level_name == "Level 1: Beginning"

    def test_hand_computed_partial(self, linearity_task):
        # c1-c3 earned, c4 missed, c5 earned on "No": 4 marks, middle band
        verdicts = [Verdict.YES, Verdict.YES, Verdict.YES, Verdict.NO, Verdict.NO]
        record = aggregate_marks(linearity_task, judgments_for(linearity_task, verdicts))
        assert record.total_marks == 4
        assert record.level_name == "Level 2: Developing"

    def test_judgment_order_does_not_matter(self, linearity_task):
        verdicts = [Verdict.YES, Verdict.NO, Verdict.YES, Verdict.NO, Verdict.YES]
        judgments = judgments_for(linearity_task, verdicts)
        expected = aggregate_marks(linearity_task, judgments)
        for _ in range(10):
            shuffled = judgments[:]
            random.Random(7).shuffle(shuffled)
            assert aggregate_marks(linearity_task, shuffled) == expected

    def test_missing_criterion_rejected(self, linearity_task):
        judgments = judgments_for(linearity_task, [Verdict.YES] * 5)[:-1]
        with pytest.raises(IncompleteJudgmentsError) as excinfo:
            aggregate_marks(linearity_task, judgments)
        assert "notation-check" in excinfo.value.details["missing"]

    def test_unknown_criterion_rejected(self, linearity_task):
        judgments = judgments_for(linearity_task, [Verdict.YES] * 5)
        judgments[0] = Judgment(
            grader_id="g",
            submission_id="sub",
            criterion_id="mystery",
            verdict=Verdict.YES,
            justification="",
        )
        with pytest.raises(UnknownCriterionError):
            aggregate_marks(linearity_task, judgments)

    def test_duplicate_judgment_rejected(self, linearity_task):
        judgments = judgments_for(linearity_task, [Verdict.YES] * 5)
        with pytest.raises(DuplicateJudgmentError):
            aggregate_marks(linearity_task, judgments + [judgments[0]])

    def test_mixed_graders_rejected(self, linearity_task):
        judgments = judgments_for(linearity_task, [Verdict.YES] * 5)
        judgments[2] = Judgment(
            grader_id="other",
            submission_id="sub",
            criterion_id=judgments[2].criterion_id,
            verdict=Verdict.YES,
            justification="",
        )
        with pytest.raises(ValueError):
            aggregate_marks(linearity_task, judgments)


class TestBruteForceOracle:
    def test_all_verdict_vectors_match_naive_oracle(self):
        rng = random.Random(20260808)
        for _ in range(120):
            n = rng.randint(3, 6)
            spec = [
                (rng.randint(1, 4), rng.choice([Verdict.YES, Verdict.NO])) for _ in range(n)
            ]
            task = build_task(spec)
            for verdicts in itertools.product([Verdict.YES, Verdict.NO], repeat=n):
                record = aggregate_marks(task, judgments_for(task, verdicts))
                expected_total, expected_level = naive_grade(task, verdicts)
                assert record.total_marks == expected_total
                assert record.level_name == expected_level
                assert 0 <= record.total_marks <= task.max_marks
                for outcome, criterion in zip(record.outcomes, task.criteria):
                    assert outcome.marks_awarded in (0, criterion.marks)

    @given(
        data=st.data(),
        marks=st.lists(st.integers(min_value=1, max_value=5), min_size=3, max_size=6),
    )
    def test_flipping_one_verdict_moves_total_by_its_marks(self, data, marks):
        spec = [
            (m, data.draw(st.sampled_from([Verdict.YES, Verdict.NO]))) for m in marks
        ]
        task = build_task(spec)
        verdicts = [
            data.draw(st.sampled_from([Verdict.YES, Verdict.NO])) for _ in marks
        ]
        index = data.draw(st.integers(min_value=0, max_value=len(marks) - 1))
        base = aggregate_marks(task, judgments_for(task, verdicts)).total_marks
        flipped = list(verdicts)
        flipped[index] = flipped[index].flipped()
        moved = aggregate_marks(task, judgments_for(task, flipped)).total_marks
        assert abs(moved - base) == task.criteria[index].marks


class TestRunningTotal:
    def test_partial_progress(self, linearity_task):
        partial = running_total(
            linearity_task,
            {"identify-linear": Verdict.YES, "notation-check": Verdict.NO},
        )
        assert partial == {
            "judged": 2,
            "of": 5,
            "total_marks": 2,
            "max_marks": 5,
            "complete": False,
            "level": None,
        }

    def test_complete_matches_aggregate(self, linearity_task):
        verdicts = [Verdict.YES, Verdict.YES, Verdict.NO, Verdict.YES, Verdict.NO]
        by_id = dict(zip(linearity_task.criterion_ids, verdicts))
        full = running_total(linearity_task, by_id)
        record = aggregate_marks(linearity_task, judgments_for(linearity_task, verdicts))
        assert full["complete"] is True
        assert full["total_marks"] == record.total_marks
        assert full["level"] == record.level_name


class TestFeedback:
    def test_full_marks_document(self, linearity_task):
        verdicts = [Verdict.YES, Verdict.YES, Verdict.YES, Verdict.YES, Verdict.NO]
        judgments = judgments_for(linearity_task, verdicts)
        record = aggregate_marks(linearity_task, judgments)
        doc = assemble_feedback(record, linearity_task, judgments, provenance="AI-only draft")

        ticks = [line for line in doc.splitlines() if line.startswith("- ✓")]
        assert len(ticks) == 5  # the "No" on the negative check still earns a tick
        assert "5/5 — Level 3: Accomplished" in doc
        assert "AI-only draft" in doc
        for judgment in judgments:
            assert judgment.justification in doc

    def test_zero_marks_footer(self, linearity_task):
        verdicts = [Verdict.NO, Verdict.NO, Verdict.NO, Verdict.NO, Verdict.YES]
        judgments = judgments_for(linearity_task, verdicts)
        record = aggregate_marks(linearity_task, judgments)
        doc = assemble_feedback(record, linearity_task, judgments)
        assert "0/5 — Level 1: Beginning" in doc
        crosses = [line for line in doc.splitlines() if line.startswith("- ✗")]
        assert len(crosses) == 5

    def test_empty_justification_placeholder(self, linearity_task):
        verdicts = [Verdict.YES] * 4 + [Verdict.NO]
        judgments = [
            Judgment("g", "sub", c.id, v, justification="")
            for c, v in zip(linearity_task.criteria, verdicts)
        ]
        record = aggregate_marks(linearity_task, judgments)
        doc = assemble_feedback(record, linearity_task, judgments)
        assert doc.count(NO_EXPLANATION) == 5

    def test_criteria_in_task_order(self, linearity_task):
        verdicts = [Verdict.YES] * 4 + [Verdict.NO]
        judgments = judgments_for(linearity_task, verdicts)
        record = aggregate_marks(linearity_task, judgments)
        doc = assemble_feedback(record, linearity_task, judgments)
        positions = [doc.index(c.text) for c in linearity_task.criteria]
        assert positions == sorted(positions)
