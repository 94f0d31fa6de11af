"""Prompt construction, judge drivers, and verdict parsing."""

from .judges import HttpJudge, Judge, MockJudge, load_mock_fixture
from .models import PHASE_CONSENSUS, PHASE_INITIAL, Judgment
from .parsing import JudgeResponse, format_answer, parse_judge_response, parse_verdict
from .prompts import PromptScript, build_prompt_script
from .runner import GradeRunResult, RetryPolicy, grade_many, grade_submission

__all__ = [
    "HttpJudge",
    "Judge",
    "MockJudge",
    "load_mock_fixture",
    "PHASE_CONSENSUS",
    "PHASE_INITIAL",
    "Judgment",
    "JudgeResponse",
    "format_answer",
    "parse_judge_response",
    "parse_verdict",
    "PromptScript",
    "build_prompt_script",
    "GradeRunResult",
    "RetryPolicy",
    "grade_many",
    "grade_submission",
]
