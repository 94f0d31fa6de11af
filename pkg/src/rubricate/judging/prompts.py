"""Three-step grading script construction.

The script template ships with the package so its wording is versioned with
the code: step one presents the task, step two the student's LaTeX response,
and step three asks for a yes/no verdict plus a brief explanation per
criterion. Rendering is deterministic and byte-stable; tests pin it against
a golden file.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from ..errors import TaskMismatchError
from ..rubric import AssessmentTask
from ..submissions import Submission

_SECTION_SEPARATOR = "\n---\n"


@dataclass(frozen=True)
class PromptScript:
    """Exactly three ordered messages making up one grading conversation."""

    steps: tuple[str, str, str]

    def messages(self) -> list[str]:
        return list(self.steps)

    def as_text(self) -> str:
        """Single-message form for judges without multi-turn support."""
        return "\n\n".join(self.steps)


@lru_cache(maxsize=1)
def _template_sections() -> tuple[str, str, str]:
    raw = resources.files("rubricate.templates").joinpath("three_step.txt").read_text("utf-8")
    if raw.endswith("\n"):
        raw = raw[:-1]
    sections = raw.split(_SECTION_SEPARATOR)
    if len(sections) != 3:
        raise RuntimeError(
            f"prompt template must have 3 sections separated by '---', found {len(sections)}"
        )
    return (sections[0], sections[1], sections[2])


def _criteria_block(task: AssessmentTask) -> str:
    lines = []
    for i, criterion in enumerate(task.criteria, start=1):
        unit = "mark" if criterion.marks == 1 else "marks"
        lines.append(f"{i}. {criterion.text} ({criterion.marks} {unit})")
    return "\n".join(lines)


def build_prompt_script(
    task: AssessmentTask,
    submission: Submission,
    *,
    context: str | None = None,
) -> PromptScript:
    """Render the three-step script for one submission.

    ``context`` is an optional preamble prepended to step one (extra
    instructions, a model solution, ...). It is empty by default: the
    standard script shows the judge nothing beyond the task, the response,
    and the numbered criteria.
    """
    if submission.task_id != task.id:
        raise TaskMismatchError(
            f"submission {submission.submission_id!r} belongs to task "
            f"{submission.task_id!r}, not {task.id!r}",
            submission_id=submission.submission_id,
        )
    # str.replace, not str.format: statements and submissions are LaTeX and
    # full of braces.
    step1_tpl, step2_tpl, step3_tpl = _template_sections()
    step1 = step1_tpl.replace("{statement}", task.statement)
    if context:
        step1 = f"{context}\n\n{step1}"
    step2 = step2_tpl.replace("{submission}", submission.body)
    step3 = step3_tpl.replace("{criteria}", _criteria_block(task))
    return PromptScript(steps=(step1, step2, step3))
