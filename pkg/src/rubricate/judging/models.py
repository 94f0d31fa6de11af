"""The judgment record shared by human graders and AI judges."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..verdicts import Verdict

PHASE_INITIAL = "initial"
PHASE_CONSENSUS = "consensus"
PHASES = (PHASE_INITIAL, PHASE_CONSENSUS)


@dataclass(frozen=True)
class Judgment:
    """One grader's verdict and justification on one criterion of one submission.

    ``phase`` separates independent first-pass judgments from anything
    recorded during moderation; initial judgments are frozen snapshots once
    consensus work opens on their submission.
    """

    grader_id: str
    submission_id: str
    criterion_id: str
    verdict: Verdict
    justification: str
    phase: str = PHASE_INITIAL
    timestamp: str = ""

    @property
    def cell(self) -> tuple[str, str]:
        return (self.submission_id, self.criterion_id)

    def as_dict(self) -> dict[str, Any]:
        return {
            "grader_id": self.grader_id,
            "submission_id": self.submission_id,
            "criterion_id": self.criterion_id,
            "verdict": self.verdict.value,
            "justification": self.justification,
            "phase": self.phase,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Judgment":
        return cls(
            grader_id=data["grader_id"],
            submission_id=data["submission_id"],
            criterion_id=data["criterion_id"],
            verdict=Verdict.from_string(data["verdict"]),
            justification=data.get("justification", ""),
            phase=data.get("phase", PHASE_INITIAL),
            timestamp=data.get("timestamp", ""),
        )
