"""Assessment tasks, qualitative rubrics, and their binary-criterion decompositions.

A task couples a qualitative rubric (ordered mark bands, e.g. 0-2 / 3-4 / 5)
with a short list of yes/no grading criteria carrying fixed integer mark
values. Marks are all-or-nothing per criterion; the criterion's
``awarded_on`` polarity says which verdict earns them, so negatively phrased
checks ("does the solution have any incorrect notation?") award on "no".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

from .errors import (
    BundleValidationError,
    FormatError,
    OutOfRangeError,
    StoreIOError,
    ValidationReport,
)
from .verdicts import Verdict

MIN_CRITERIA = 3
MAX_CRITERIA = 6


class TaskCategory(Enum):
    """Closed set of question types a task may belong to."""

    NUMERICAL = "numerical"
    DESCRIPTIVE = "descriptive"
    SHORT_ANSWER = "short_answer"
    PROOF = "proof"

    @classmethod
    def from_string(cls, raw: str) -> "TaskCategory":
        for member in cls:
            if member.value == raw:
                return member
        valid = ", ".join(m.value for m in cls)
        raise FormatError(f"unknown task category {raw!r} (expected one of: {valid})", value=raw)


@dataclass(frozen=True)
class RubricLevel:
    """One qualitative performance band with an inclusive mark range."""

    name: str
    min_marks: int
    max_marks: int
    description: str = ""


@dataclass(frozen=True)
class Rubric:
    """Ordered performance levels whose mark bands tile [0, max_total]."""

    learning_outcome: str
    levels: tuple[RubricLevel, ...]

    def __init__(self, learning_outcome: str, levels: Iterable[RubricLevel]):
        object.__setattr__(self, "learning_outcome", learning_outcome)
        object.__setattr__(self, "levels", tuple(levels))

    @property
    def max_total(self) -> int:
        """Highest attainable mark (top of the last band)."""
        return self.levels[-1].max_marks


@dataclass(frozen=True)
class BinaryCriterion:
    """A single yes/no grading question worth a fixed number of marks.

    ``awarded_on`` is the verdict that earns the marks. It defaults to YES
    and must be NO for negatively phrased checks.
    """

    id: str
    text: str
    marks: int = 1
    awarded_on: Verdict = Verdict.YES


@dataclass(frozen=True)
class AssessmentTask:
    """A task statement plus its rubric and binary criteria, in grading order."""

    id: str
    statement: str
    category: TaskCategory
    rubric: Rubric
    criteria: tuple[BinaryCriterion, ...]

    def __init__(
        self,
        id: str,
        statement: str,
        category: TaskCategory,
        rubric: Rubric,
        criteria: Iterable[BinaryCriterion],
    ):
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "statement", statement)
        object.__setattr__(self, "category", category)
        object.__setattr__(self, "rubric", rubric)
        object.__setattr__(self, "criteria", tuple(criteria))

    def criterion(self, criterion_id: str) -> BinaryCriterion:
        for c in self.criteria:
            if c.id == criterion_id:
                return c
        raise KeyError(criterion_id)

    @property
    def criterion_ids(self) -> list[str]:
        return [c.id for c in self.criteria]

    @property
    def max_marks(self) -> int:
        return sum(c.marks for c in self.criteria)


def validate_task(task: AssessmentTask, *, relax_criteria_count: bool = False) -> ValidationReport:
    """Check every task and rubric invariant; violations become report entries.

    Pure and idempotent: the same task always yields an identical report.
    ``relax_criteria_count`` demotes the 3-6 criterion count rule from an
    error to a warning for rubric authors who deliberately step outside it.
    """
    report = ValidationReport()
    _check_rubric(task.rubric, report)

    n = len(task.criteria)
    if not MIN_CRITERIA <= n <= MAX_CRITERIA:
        message = f"task {task.id!r} has {n} criteria; expected {MIN_CRITERIA}-{MAX_CRITERIA}"
        if relax_criteria_count:
            report.warning("CRITERIA_COUNT", message)
        else:
            report.error("CRITERIA_COUNT", message)

    seen: set[str] = set()
    for criterion in task.criteria:
        if criterion.id in seen:
            report.error("DUPLICATE_CRITERION_ID", f"duplicate criterion id {criterion.id!r}")
        seen.add(criterion.id)
        if not isinstance(criterion.marks, int) or criterion.marks < 1:
            report.error(
                "CRITERION_MARKS",
                f"criterion {criterion.id!r} has marks={criterion.marks!r}; "
                "marks must be an integer >= 1 (no partial credit)",
            )

    if task.rubric.levels:
        mark_sum = sum(c.marks for c in task.criteria)
        if mark_sum != task.rubric.max_total:
            report.error(
                "MARK_SUM_MISMATCH",
                f"criterion marks sum to {mark_sum} but the rubric tops out "
                f"at {task.rubric.max_total}",
            )
    return report


def _check_rubric(rubric: Rubric, report: ValidationReport) -> None:
    levels = rubric.levels
    if len(levels) < 2:
        report.error("LEVEL_COUNT", f"rubric has {len(levels)} levels; expected at least 2")
    for level in levels:
        if not (isinstance(level.min_marks, int) and isinstance(level.max_marks, int)):
            report.error("LEVEL_RANGE", f"level {level.name!r} has non-integer mark bounds")
            return
        if level.min_marks < 0:
            report.error("LEVEL_RANGE", f"level {level.name!r} starts below 0")
        if level.min_marks > level.max_marks:
            report.error(
                "LEVEL_RANGE",
                f"level {level.name!r} has min_marks {level.min_marks} > "
                f"max_marks {level.max_marks}",
            )
    if not levels:
        return
    if levels[0].min_marks != 0:
        report.error("LEVEL_START", f"first level {levels[0].name!r} must start at 0")
    for prev, cur in zip(levels, levels[1:]):
        if cur.min_marks != prev.max_marks + 1:
            report.error(
                "LEVEL_CONTIGUITY",
                f"level {cur.name!r} starts at {cur.min_marks}; expected "
                f"{prev.max_marks + 1} (bands must be disjoint, contiguous and ascending)",
            )


def map_marks_to_level(rubric: Rubric, total_marks: int) -> RubricLevel:
    """Return the unique level whose band contains ``total_marks``.

    Raises OutOfRangeError for totals outside [0, max_total].
    """
    if not isinstance(total_marks, int):
        raise OutOfRangeError(f"total marks must be an integer, got {total_marks!r}")
    if total_marks < 0 or total_marks > rubric.max_total:
        raise OutOfRangeError(
            f"total marks {total_marks} outside the rubric range [0, {rubric.max_total}]",
            total_marks=total_marks,
            max_total=rubric.max_total,
        )
    for level in rubric.levels:
        if level.min_marks <= total_marks <= level.max_marks:
            return level
    raise OutOfRangeError(f"no rubric level covers {total_marks} marks", total_marks=total_marks)


def task_from_dict(data: dict[str, Any], *, source: str = "<task>") -> AssessmentTask:
    """Build a task from its bundle-format dict, with field-level diagnostics."""
    if not isinstance(data, dict):
        raise FormatError(f"{source}: task definition must be an object")

    def _require(obj: dict[str, Any], key: str, kind: type, where: str) -> Any:
        if key not in obj:
            raise FormatError(f"{source}: missing field {key!r} in {where}")
        value = obj[key]
        if kind is int and isinstance(value, bool):
            raise FormatError(f"{source}: field {key!r} in {where} must be an integer")
        if not isinstance(value, kind):
            raise FormatError(f"{source}: field {key!r} in {where} must be {kind.__name__}")
        return value

    task_id = _require(data, "id", str, "task")
    statement = _require(data, "statement", str, "task")
    category = TaskCategory.from_string(_require(data, "category", str, "task"))

    rubric_data = _require(data, "rubric", dict, "task")
    levels = []
    raw_levels = _require(rubric_data, "levels", list, "rubric")
    for i, raw in enumerate(raw_levels):
        if not isinstance(raw, dict):
            raise FormatError(f"{source}: rubric level #{i + 1} must be an object")
        levels.append(
            RubricLevel(
                name=_require(raw, "name", str, f"level #{i + 1}"),
                min_marks=_require(raw, "min_marks", int, f"level #{i + 1}"),
                max_marks=_require(raw, "max_marks", int, f"level #{i + 1}"),
                description=raw.get("description", ""),
            )
        )
    rubric = Rubric(
        learning_outcome=_require(rubric_data, "learning_outcome", str, "rubric"),
        levels=levels,
    )

    criteria = []
    raw_criteria = _require(data, "criteria", list, "task")
    for i, raw in enumerate(raw_criteria):
        if not isinstance(raw, dict):
            raise FormatError(f"{source}: criterion #{i + 1} must be an object")
        awarded_raw = raw.get("awarded_on", "yes")
        if not isinstance(awarded_raw, str):
            raise FormatError(f"{source}: field 'awarded_on' in criterion #{i + 1} must be str")
        try:
            awarded_on = Verdict.from_string(awarded_raw)
        except FormatError as exc:
            raise FormatError(f"{source}: criterion #{i + 1}: {exc}") from exc
        criteria.append(
            BinaryCriterion(
                id=_require(raw, "id", str, f"criterion #{i + 1}"),
                text=_require(raw, "text", str, f"criterion #{i + 1}"),
                marks=_require(raw, "marks", int, f"criterion #{i + 1}"),
                awarded_on=awarded_on,
            )
        )

    return AssessmentTask(
        id=task_id, statement=statement, category=category, rubric=rubric, criteria=criteria
    )


def task_to_dict(task: AssessmentTask) -> dict[str, Any]:
    """Emit the bundle-format dict; round-trips through task_from_dict."""
    return {
        "id": task.id,
        "statement": task.statement,
        "category": task.category.value,
        "rubric": {
            "learning_outcome": task.rubric.learning_outcome,
            "levels": [
                {
                    "name": level.name,
                    "min_marks": level.min_marks,
                    "max_marks": level.max_marks,
                    "description": level.description,
                }
                for level in task.rubric.levels
            ],
        },
        "criteria": [
            {
                "id": c.id,
                "text": c.text,
                "marks": c.marks,
                "awarded_on": c.awarded_on.value,
            }
            for c in task.criteria
        ],
    }


def load_task_bundle(
    path: str | Path, *, relax_criteria_count: bool = False
) -> list[AssessmentTask]:
    """Load every ``*.json`` task file under ``path``, validating all of them.

    The load is atomic: if any task fails validation, nothing is returned and
    the aggregated reports ride along on the raised BundleValidationError.
    """
    bundle_dir = Path(path)
    if not bundle_dir.exists():
        raise StoreIOError(f"task bundle not found: {bundle_dir}")
    if not bundle_dir.is_dir():
        raise StoreIOError(f"task bundle must be a directory: {bundle_dir}")

    tasks: list[AssessmentTask] = []
    failed: dict[str, ValidationReport] = {}
    seen_ids: set[str] = set()
    for file in sorted(bundle_dir.glob("*.json")):
        try:
            raw = file.read_text(encoding="utf-8")
        except OSError as exc:
            raise StoreIOError(f"cannot read task file {file}: {exc}") from exc
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{file.name}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        task = task_from_dict(data, source=file.name)
        if task.id in seen_ids:
            raise FormatError(f"{file.name}: duplicate task id {task.id!r} in bundle")
        seen_ids.add(task.id)
        report = validate_task(task, relax_criteria_count=relax_criteria_count)
        if not report.ok:
            failed[file.name] = report
        tasks.append(task)

    if failed:
        summary = "; ".join(
            f"{name}: {', '.join(issue.code for issue in report.errors)}"
            for name, report in failed.items()
        )
        raise BundleValidationError(f"task bundle failed validation ({summary})", reports=failed)
    return tasks


def save_task_bundle(tasks: Iterable[AssessmentTask], path: str | Path) -> None:
    """Write one ``<task_id>.json`` per task under ``path``."""
    bundle_dir = Path(path)
    bundle_dir.mkdir(parents=True, exist_ok=True)
    for task in tasks:
        target = bundle_dir / f"{task.id}.json"
        target.write_text(
            json.dumps(task_to_dict(task), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
