"""The binary verdict value shared by rubric criteria and judgments."""

from __future__ import annotations

from enum import Enum

from .errors import FormatError


class Verdict(Enum):
    """A strictly binary yes/no judgment. There is no third state."""

    YES = "yes"
    NO = "no"

    @property
    def label(self) -> str:
        """Display form ("Yes"/"No")."""
        return self.value.capitalize()

    def flipped(self) -> "Verdict":
        return Verdict.NO if self is Verdict.YES else Verdict.YES

    @classmethod
    def from_string(cls, raw: str) -> "Verdict":
        """Parse a serialized verdict value ("yes"/"no", case-insensitive)."""
        normalized = raw.strip().lower()
        for member in cls:
            if member.value == normalized:
                return member
        raise FormatError(f"not a verdict value: {raw!r}", value=raw)
