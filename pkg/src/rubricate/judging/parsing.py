"""Parsing judge replies into binary verdicts.

A reply is a numbered list, one item per criterion, each starting with
"Yes" or "No" followed by a brief explanation. Anything that does not parse
is an error, never a default verdict: a garbage reply must not cost (or
award) a student marks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import (
    DuplicateItemError,
    EmptyAnswerError,
    MissingItemError,
    UnparseableVerdictError,
)
from ..rubric import AssessmentTask
from ..verdicts import Verdict

_BULLET = re.compile(r"^[\s]*(?:[-*•]\s+)?")
_VERDICT = re.compile(r"^(yes|no)\b\s*([.,:;—])?\s*(.*)$", re.IGNORECASE | re.DOTALL)
_ITEM_MARKER = re.compile(r"^[ \t]*(\d+)\.\s", re.MULTILINE)


@dataclass(frozen=True)
class JudgeResponse:
    """A raw judge reply split into per-criterion answer chunks."""

    raw_text: str
    per_criterion: tuple[tuple[int, str], ...]


def parse_verdict(answer_text: str) -> tuple[Verdict, str]:
    """Split one answer into (verdict, justification).

    The leading token (case-insensitive, after stripping list markers and
    whitespace) must be "yes" or "no", optionally followed by one of
    ``. , : ; —``; whatever remains, trimmed, is the justification.
    """
    if not answer_text or not answer_text.strip():
        raise EmptyAnswerError("empty answer text")
    stripped = _BULLET.sub("", answer_text.strip(), count=1)
    match = _VERDICT.match(stripped)
    if not match:
        lead = stripped.split(None, 1)[0] if stripped.split() else stripped
        raise UnparseableVerdictError(
            f"answer must lead with yes or no, got {lead!r}", leading_token=lead
        )
    verdict = Verdict.YES if match.group(1).lower() == "yes" else Verdict.NO
    justification = match.group(3).strip()
    return verdict, justification


def format_answer(verdict: Verdict, justification: str = "") -> str:
    """Canonical answer text; parse_verdict(format_answer(v, j)) == (v, j)."""
    if justification:
        return f"{verdict.label}. {justification}"
    return f"{verdict.label}."


def split_numbered_items(raw_text: str, item_count: int) -> JudgeResponse:
    """Cut a reply into items `1.` .. `N.` found at line starts.

    Preamble before item 1 is ignored; numbers outside 1..N are treated as
    content, not markers. Every item must appear exactly once.
    """
    markers = [
        (m.start(), m.end(), int(m.group(1)))
        for m in _ITEM_MARKER.finditer(raw_text)
        if 1 <= int(m.group(1)) <= item_count
    ]

    seen: dict[int, str] = {}
    for idx, (_, end, number) in enumerate(markers):
        chunk_end = markers[idx + 1][0] if idx + 1 < len(markers) else len(raw_text)
        if number in seen:
            raise DuplicateItemError(f"item {number} appears more than once", item=number)
        seen[number] = raw_text[end:chunk_end].strip()
    for number in range(1, item_count + 1):
        if number not in seen:
            raise MissingItemError(f"item {number} not found in reply", item=number)

    ordered = tuple((number, seen[number]) for number in range(1, item_count + 1))
    return JudgeResponse(raw_text=raw_text, per_criterion=ordered)


def parse_judge_response(
    raw_text: str, task: AssessmentTask
) -> list[tuple[str, Verdict, str]]:
    """Parse a full reply into (criterion_id, verdict, justification) triples.

    Succeeds only if every one of the task's criteria is answered exactly
    once and every answer carries a binary verdict.
    """
    response = split_numbered_items(raw_text, len(task.criteria))
    results: list[tuple[str, Verdict, str]] = []
    for (number, chunk), criterion in zip(response.per_criterion, task.criteria):
        try:
            verdict, justification = parse_verdict(chunk)
        except (EmptyAnswerError, UnparseableVerdictError) as exc:
            exc.details.setdefault("item", number)
            raise
        results.append((criterion.id, verdict, justification))
    return results
