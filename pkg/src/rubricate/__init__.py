"""Criterion-referenced grading with binary rubric checks and a pluggable AI judge."""

from .errors import RubricateError, ValidationReport
from .rubric import (
    AssessmentTask,
    BinaryCriterion,
    Rubric,
    RubricLevel,
    TaskCategory,
    load_task_bundle,
    map_marks_to_level,
    validate_task,
)
from .scoring import GradeRecord, aggregate_marks, assemble_feedback
from .submissions import AliasMap, CohortManifest, Submission, load_submissions, validate_latex
from .verdicts import Verdict

__version__ = "0.1.0"

__all__ = [
    "RubricateError",
    "ValidationReport",
    "AssessmentTask",
    "BinaryCriterion",
    "Rubric",
    "RubricLevel",
    "TaskCategory",
    "load_task_bundle",
    "map_marks_to_level",
    "validate_task",
    "GradeRecord",
    "aggregate_marks",
    "assemble_feedback",
    "AliasMap",
    "CohortManifest",
    "Submission",
    "load_submissions",
    "validate_latex",
    "Verdict",
    "__version__",
]
