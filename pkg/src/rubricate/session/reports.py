"""Report payloads and renderings shared by the CLI and the HTTP API.

Both surfaces call these builders, so a given scope always produces the same
numbers no matter which way it is asked for. JSON payloads carry raw counts
next to every rounded percentage so the rounding is auditable.
"""

from __future__ import annotations

from typing import Any

from ..reliability import (
    accuracy_vs_consensus,
    agreement_rate,
    marks_table,
    per_type_breakdown,
    render_marks_table,
    taxonomy_distribution,
)
from ..errors import UnknownTaskError
from .store import GradingSession


def agreement_payload(
    session: GradingSession, grader_a: str, grader_b: str, *, task_ids: set[str] | None = None
) -> dict[str, Any]:
    result = agreement_rate(session.matrix(), grader_a, grader_b, task_ids=task_ids)
    return {
        "grader_a": grader_a,
        "grader_b": grader_b,
        "scope": sorted(task_ids) if task_ids else "all",
        **result.as_dict(),
    }


def agreement_markdown(payload: dict[str, Any]) -> str:
    return "\n".join(
        [
            "# Inter-grader agreement",
            "",
            f"Graders: {payload['grader_a']} vs {payload['grader_b']}",
            f"Scope: {payload['scope']}",
            "",
            f"Identical verdicts on **{payload['matched']} of {payload['total']}** "
            f"shared cells: **{payload['pct']}%**",
            "",
        ]
    )


def accuracy_payload(
    session: GradingSession, grader_id: str, *, task_ids: set[str] | None = None
) -> dict[str, Any]:
    matrix = session.matrix()
    overall = accuracy_vs_consensus(matrix, session.consensus, grader_id, task_ids=task_ids)
    scoped_tasks = [
        t for t in session.tasks.values() if task_ids is None or t.id in task_ids
    ]
    by_category = per_type_breakdown(matrix, session.consensus, grader_id, scoped_tasks)
    return {
        "grader": grader_id,
        "scope": sorted(task_ids) if task_ids else "all",
        **overall.as_dict(),
        "by_category": {
            category.value: result.as_dict() for category, result in by_category.items()
        },
    }


def accuracy_markdown(payload: dict[str, Any]) -> str:
    lines = [
        "# Accuracy vs consensus",
        "",
        f"Grader: {payload['grader']}",
        f"Scope: {payload['scope']}",
        "",
        f"Initial verdicts matching consensus: **{payload['matched']} of "
        f"{payload['total']}** = **{payload['pct']}%**",
    ]
    if payload["by_category"]:
        lines += ["", "By question type:", ""]
        for category, result in payload["by_category"].items():
            lines.append(
                f"- {category}: {result['matched']}/{result['total']} = {result['pct']}%"
            )
    lines.append("")
    return "\n".join(lines)


def taxonomy_payload(session: GradingSession) -> dict[str, Any]:
    distribution = taxonomy_distribution(session.tags)
    return {
        "total_tags": len(session.tags),
        "categories": {
            category.value: {"count": count, "pct": pct}
            for category, (count, pct) in distribution.items()
        },
    }


def taxonomy_markdown(payload: dict[str, Any]) -> str:
    lines = ["# Discrepancy taxonomy", "", f"Tags: {payload['total_tags']}", ""]
    for category, entry in payload["categories"].items():
        lines.append(f"- {category}: {entry['count']} ({entry['pct']}%)")
    lines.append("")
    return "\n".join(lines)


def marks_table_payload(
    session: GradingSession, task_id: str, graders: list[str] | None = None
) -> dict[str, Any]:
    task = session.tasks.get(task_id)
    if task is None:
        raise UnknownTaskError(f"unknown task {task_id!r}")
    graders = graders or session.graders()
    table = marks_table(
        session.matrix(), graders, task, list(session.submissions.values())
    )
    return {**table.as_dict(), "text": render_marks_table(table)}


def marks_table_markdown(payload: dict[str, Any]) -> str:
    return "\n".join(
        [
            f"# Marks by grader — task {payload['task_id']}",
            "",
            "```",
            payload["text"],
            "```",
            "",
        ]
    )
