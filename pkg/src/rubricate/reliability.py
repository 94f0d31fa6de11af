"""Reliability metrics over a session's judgments.

Agreement and accuracy are micro-averages over binary cells: a cell is one
(submission, criterion) pair, and every ratio is an exact integer fraction
rendered at one decimal place. Consensus never mutates the initial
judgments it is computed against; accuracy is always measured against
frozen snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Mapping

from .errors import (
    EmptyTagsError,
    IncompleteJudgmentsError,
    IntegrityError,
    MissingInitialError,
    NoOverlapError,
    NotAMismatchError,
    UnresolvedCellsError,
)
from .judging.models import PHASE_INITIAL, Judgment
from .rubric import AssessmentTask, TaskCategory
from .scoring import aggregate_marks
from .submissions import Submission
from .verdicts import Verdict

Cell = tuple[str, str]  # (submission_id, criterion_id)


def pct_1dp(numerator: int, denominator: int) -> float:
    """Percentage at one decimal, rounded half-up in exact decimal arithmetic."""
    value = Decimal(numerator) * 100 / Decimal(denominator)
    return float(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class RatioResult:
    """An exact matched/total count pair with display helpers."""

    matched: int
    total: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.matched, self.total)

    @property
    def ratio(self) -> float:
        return self.matched / self.total

    @property
    def pct(self) -> float:
        return pct_1dp(self.matched, self.total)

    def as_dict(self) -> dict[str, Any]:
        return {
            "matched": self.matched,
            "total": self.total,
            "ratio": self.ratio,
            "pct": self.pct,
        }


class JudgmentMatrix:
    """Initial verdicts laid out by (submission, criterion) cell and grader."""

    def __init__(self, task_by_submission: Mapping[str, str]):
        self._verdicts: dict[Cell, dict[str, Verdict]] = {}
        self._task_by_submission = dict(task_by_submission)

    @classmethod
    def from_judgments(
        cls, judgments: Iterable[Judgment], task_by_submission: Mapping[str, str]
    ) -> "JudgmentMatrix":
        matrix = cls(task_by_submission)
        for judgment in judgments:
            if judgment.phase != PHASE_INITIAL:
                continue
            matrix.record(judgment.grader_id, judgment.cell, judgment.verdict)
        return matrix

    def record(self, grader_id: str, cell: Cell, verdict: Verdict) -> None:
        graders = self._verdicts.setdefault(cell, {})
        if grader_id in graders:
            raise IntegrityError(
                f"grader {grader_id!r} already has an initial verdict on cell {cell!r}"
            )
        graders[grader_id] = verdict

    def task_of(self, submission_id: str) -> str | None:
        return self._task_by_submission.get(submission_id)

    def _in_scope(self, cell: Cell, task_ids: set[str] | None) -> bool:
        return task_ids is None or self.task_of(cell[0]) in task_ids

    def cells(self) -> list[Cell]:
        return sorted(self._verdicts)

    def verdicts_at(self, cell: Cell) -> dict[str, Verdict]:
        return dict(self._verdicts.get(cell, {}))

    def cells_judged_by(self, grader_id: str, *, task_ids: set[str] | None = None) -> list[Cell]:
        return [
            cell
            for cell in self.cells()
            if grader_id in self._verdicts[cell] and self._in_scope(cell, task_ids)
        ]

    def graders(self) -> list[str]:
        names: set[str] = set()
        for graders in self._verdicts.values():
            names.update(graders)
        return sorted(names)


def agreement_rate(
    matrix: JudgmentMatrix,
    grader_a: str,
    grader_b: str,
    *,
    task_ids: set[str] | None = None,
) -> RatioResult:
    """Fraction of shared cells where two graders' verdicts coincide.

    Symmetric in its grader arguments and 1.0 when a grader is compared with
    themselves over any non-empty scope.
    """
    matched = 0
    total = 0
    for cell in matrix.cells():
        if not matrix._in_scope(cell, task_ids):
            continue
        verdicts = matrix.verdicts_at(cell)
        if grader_a not in verdicts or grader_b not in verdicts:
            continue
        total += 1
        if verdicts[grader_a] == verdicts[grader_b]:
            matched += 1
    if total == 0:
        raise NoOverlapError(
            f"graders {grader_a!r} and {grader_b!r} share no judged cells in scope"
        )
    return RatioResult(matched=matched, total=total)


@dataclass(frozen=True)
class ConsensusRecord:
    """The agreed-upon truth for one cell, with who resolved it and why."""

    submission_id: str
    criterion_id: str
    resolved_verdict: Verdict
    resolution_note: str
    resolved_by: tuple[str, ...]

    @property
    def cell(self) -> Cell:
        return (self.submission_id, self.criterion_id)

    def as_dict(self) -> dict[str, Any]:
        return {
            "submission_id": self.submission_id,
            "criterion_id": self.criterion_id,
            "resolved_verdict": self.resolved_verdict.value,
            "resolution_note": self.resolution_note,
            "resolved_by": list(self.resolved_by),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ConsensusRecord":
        return cls(
            submission_id=data["submission_id"],
            criterion_id=data["criterion_id"],
            resolved_verdict=Verdict.from_string(data["resolved_verdict"]),
            resolution_note=data.get("resolution_note", ""),
            resolved_by=tuple(data.get("resolved_by", [])),
        )


class ConsensusLedger:
    """Resolved verdicts per cell plus an audit trail of overwrites."""

    def __init__(self) -> None:
        self._records: dict[Cell, ConsensusRecord] = {}
        self.audit: list[dict[str, Any]] = []

    def resolve(
        self,
        matrix: JudgmentMatrix,
        submission_id: str,
        criterion_id: str,
        resolved_verdict: Verdict,
        note: str,
        resolvers: Iterable[str],
        *,
        timestamp: str = "",
    ) -> ConsensusRecord:
        """Record the agreed verdict for a cell.

        Every participating grader must already hold a frozen initial
        judgment on the cell; consensus may overturn them all, but never
        touches them. Re-resolving overwrites the record and logs the old
        one in the audit trail.
        """
        resolvers = tuple(resolvers)
        cell = (submission_id, criterion_id)
        if not resolvers:
            raise MissingInitialError("consensus needs at least one resolving grader")
        verdicts = matrix.verdicts_at(cell)
        absent = [g for g in resolvers if g not in verdicts]
        if absent:
            raise MissingInitialError(
                f"graders without an initial judgment on cell {cell!r}: {', '.join(absent)}",
                cell=cell,
                graders=absent,
            )
        record = ConsensusRecord(
            submission_id=submission_id,
            criterion_id=criterion_id,
            resolved_verdict=resolved_verdict,
            resolution_note=note,
            resolved_by=resolvers,
        )
        previous = self._records.get(cell)
        if previous is not None:
            self.audit.append(
                {"replaced": previous.as_dict(), "timestamp": timestamp}
            )
        self._records[cell] = record
        return record

    def get(self, cell: Cell) -> ConsensusRecord | None:
        return self._records.get(cell)

    def __contains__(self, cell: Cell) -> bool:
        return cell in self._records

    def __len__(self) -> int:
        return len(self._records)

    def records(self) -> list[ConsensusRecord]:
        return [self._records[cell] for cell in sorted(self._records)]

    def submissions(self) -> set[str]:
        return {cell[0] for cell in self._records}

    def as_dict(self) -> dict[str, Any]:
        return {
            "records": [r.as_dict() for r in self.records()],
            "audit": list(self.audit),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ConsensusLedger":
        ledger = cls()
        for raw in data.get("records", []):
            record = ConsensusRecord.from_dict(raw)
            ledger._records[record.cell] = record
        ledger.audit = list(data.get("audit", []))
        return ledger


def accuracy_vs_consensus(
    matrix: JudgmentMatrix,
    consensus: ConsensusLedger,
    grader_id: str,
    *,
    task_ids: set[str] | None = None,
) -> RatioResult:
    """Fraction of a grader's initial verdicts that match the resolved truth.

    Every scoped cell the grader judged must be resolved; unresolved cells
    are an error (listing them), not a silent exclusion.
    """
    cells = matrix.cells_judged_by(grader_id, task_ids=task_ids)
    unresolved = [cell for cell in cells if cell not in consensus]
    if unresolved:
        raise UnresolvedCellsError(
            f"{len(unresolved)} cell(s) judged by {grader_id!r} have no consensus: "
            + ", ".join(f"{s}/{c}" for s, c in unresolved[:5])
            + ("..." if len(unresolved) > 5 else ""),
            cells=unresolved,
        )
    if not cells:
        raise NoOverlapError(f"grader {grader_id!r} judged no cells in scope")
    matched = sum(
        1
        for cell in cells
        if matrix.verdicts_at(cell)[grader_id] == consensus.get(cell).resolved_verdict
    )
    return RatioResult(matched=matched, total=len(cells))


def per_type_breakdown(
    matrix: JudgmentMatrix,
    consensus: ConsensusLedger,
    grader_id: str,
    tasks: Iterable[AssessmentTask],
) -> dict[TaskCategory, RatioResult]:
    """Accuracy-vs-consensus split by task category; empty categories omitted.

    Weighted by per-category cell counts, the split recomposes the overall
    accuracy exactly (everything is integer arithmetic).
    """
    category_by_task = {task.id: task.category for task in tasks}
    breakdown: dict[TaskCategory, RatioResult] = {}
    for category in TaskCategory:
        scoped = {tid for tid, cat in category_by_task.items() if cat is category}
        if not scoped:
            continue
        if not matrix.cells_judged_by(grader_id, task_ids=scoped):
            continue
        breakdown[category] = accuracy_vs_consensus(
            matrix, consensus, grader_id, task_ids=scoped
        )
    return breakdown


class DiscrepancyCategory(Enum):
    """Closed taxonomy for why an initial judgment missed the consensus."""

    INTERPRETATION_DIFFERENCE = "interpretation_difference"
    SIMPLE_OVERSIGHT = "simple_oversight"
    UNANTICIPATED_APPROACH = "unanticipated_approach"
    SIMPLIFICATION_MISJUDGMENT = "simplification_misjudgment"
    HUMAN_ERROR = "human_error"
    OTHER = "other"

    @classmethod
    def from_string(cls, raw: str) -> "DiscrepancyCategory":
        for member in cls:
            if member.value == raw:
                return member
        valid = ", ".join(m.value for m in cls)
        raise NotAMismatchError(
            f"unknown discrepancy category {raw!r} (expected one of: {valid})"
        )


@dataclass(frozen=True)
class DiscrepancyTag:
    """A manual classification of one grader's mismatch on one cell."""

    submission_id: str
    criterion_id: str
    grader_id: str
    category: DiscrepancyCategory
    note: str = ""

    @property
    def cell(self) -> Cell:
        return (self.submission_id, self.criterion_id)

    def as_dict(self) -> dict[str, Any]:
        return {
            "submission_id": self.submission_id,
            "criterion_id": self.criterion_id,
            "grader_id": self.grader_id,
            "category": self.category.value,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DiscrepancyTag":
        return cls(
            submission_id=data["submission_id"],
            criterion_id=data["criterion_id"],
            grader_id=data["grader_id"],
            category=DiscrepancyCategory.from_string(data["category"]),
            note=data.get("note", ""),
        )


def validate_tag(tag: DiscrepancyTag, matrix: JudgmentMatrix, consensus: ConsensusLedger) -> None:
    """Check a tag points at a real mismatch.

    With consensus resolved, the tagged grader's initial verdict must differ
    from the resolved one. Before resolution, tags may mark grader-vs-grader
    disagreement cells instead.
    """
    verdicts = matrix.verdicts_at(tag.cell)
    if tag.grader_id not in verdicts:
        raise MissingInitialError(
            f"grader {tag.grader_id!r} has no initial judgment on cell {tag.cell!r}"
        )
    record = consensus.get(tag.cell)
    if record is not None:
        if verdicts[tag.grader_id] == record.resolved_verdict:
            raise NotAMismatchError(
                f"grader {tag.grader_id!r} matches the consensus on cell {tag.cell!r}; "
                "nothing to tag"
            )
        return
    others = {g: v for g, v in verdicts.items() if g != tag.grader_id}
    if not others or all(v == verdicts[tag.grader_id] for v in others.values()):
        raise NotAMismatchError(
            f"cell {tag.cell!r} has no disagreement involving grader {tag.grader_id!r}"
        )


def taxonomy_distribution(
    tags: Iterable[DiscrepancyTag],
) -> dict[DiscrepancyCategory, tuple[int, float]]:
    """Count tags per category and attach percentages rounded half-up to 0.1.

    Raw counts ride along so the rounding is auditable; the distribution of
    an empty tag set is undefined and raises.
    """
    tags = list(tags)
    if not tags:
        raise EmptyTagsError("no discrepancy tags to distribute")
    counts: dict[DiscrepancyCategory, int] = {}
    for tag in tags:
        counts[tag.category] = counts.get(tag.category, 0) + 1
    total = len(tags)
    return {
        category: (count, pct_1dp(count, total))
        for category, count in sorted(counts.items(), key=lambda kv: kv[0].value)
    }


@dataclass
class MarksTable:
    """Total marks per grader per submission for one task, in alias order."""

    task_id: str
    columns: list[str] = field(default_factory=list)  # aliases
    rows: dict[str, list[int]] = field(default_factory=dict)  # grader -> marks

    def as_dict(self) -> dict[str, Any]:
        return {"task_id": self.task_id, "columns": self.columns, "rows": self.rows}


def _alias_sort_key(alias: str) -> tuple[int, str]:
    if alias.startswith("S") and alias[1:].isdigit():
        return (int(alias[1:]), "")
    return (1_000_000, alias)


def marks_table(
    matrix: JudgmentMatrix,
    graders: Iterable[str],
    task: AssessmentTask,
    submissions: Iterable[Submission],
) -> MarksTable:
    """Build the per-submission mark comparison grid for one task.

    Cell totals come from aggregate_marks so polarity and mark values are
    honored; a grader missing any criterion verdict on a submission is an
    error naming the gap.
    """
    subs = sorted(
        (s for s in submissions if s.task_id == task.id),
        key=lambda s: _alias_sort_key(s.student_alias),
    )
    table = MarksTable(task_id=task.id, columns=[s.student_alias for s in subs])
    for grader in graders:
        totals: list[int] = []
        for submission in subs:
            judgments = []
            for criterion in task.criteria:
                verdicts = matrix.verdicts_at((submission.submission_id, criterion.id))
                if grader not in verdicts:
                    raise IncompleteJudgmentsError(
                        f"grader {grader!r} has no verdict on submission "
                        f"{submission.submission_id!r}, criterion {criterion.id!r}",
                        grader_id=grader,
                        submission_id=submission.submission_id,
                        criterion_id=criterion.id,
                    )
                judgments.append(
                    Judgment(
                        grader_id=grader,
                        submission_id=submission.submission_id,
                        criterion_id=criterion.id,
                        verdict=verdicts[grader],
                        justification="",
                    )
                )
            totals.append(aggregate_marks(task, judgments).total_marks)
        table.rows[grader] = totals
    return table


def render_marks_table(table: MarksTable, *, corner: str = "Grader") -> str:
    """Aligned text grid: one row per grader, one column per submission alias."""
    headers = [corner] + table.columns
    body = [[grader] + [str(v) for v in row] for grader, row in table.rows.items()]
    widths = [
        max(len(line[i]) for line in [headers] + body) for i in range(len(headers))
    ]
    lines = []
    for line in [headers] + body:
        lines.append(
            "  ".join(
                cell.ljust(widths[i]) if i == 0 else cell.rjust(widths[i])
                for i, cell in enumerate(line)
            ).rstrip()
        )
    return "\n".join(lines)
