"""Judge implementations: a remote chat-completion client and a scripted mock.

The contract is small: given the ordered script messages, return one reply
text. The remote judge posts an OpenAI-style chat body; the mock replays
canned replies from a fixture keyed by (task_id, submission_id), consuming
one per attempt, and is what every test uses.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path
from typing import Any, Mapping, Protocol, Sequence, runtime_checkable

import requests

from ..errors import FormatError, JudgeTransportError, JudgeUnavailableError, StoreIOError

JUDGE_URL_ENV = "RUBRICATE_JUDGE_URL"
JUDGE_KEY_ENV = "RUBRICATE_JUDGE_KEY"


@runtime_checkable
class Judge(Protocol):
    """Anything that can turn a grading script into one reply text."""

    name: str

    def complete(
        self,
        messages: Sequence[str],
        *,
        task_id: str | None = None,
        submission_id: str | None = None,
    ) -> str: ...


class HttpJudge:
    """Chat-completion HTTP client.

    Sends the script as sequential user messages; expects a standard
    ``choices[0].message.content`` reply. Endpoint and bearer token come
    from arguments or the RUBRICATE_JUDGE_URL / RUBRICATE_JUDGE_KEY
    environment variables. Temperature defaults to 0 for determinism.
    Instances are safe to share between workers.
    """

    def __init__(
        self,
        url: str | None = None,
        *,
        model: str = "",
        temperature: float = 0.0,
        timeout: float = 60.0,
        api_key: str | None = None,
        name: str = "ai-judge",
    ):
        self.url = url or os.environ.get(JUDGE_URL_ENV, "")
        if not self.url:
            raise JudgeUnavailableError(
                f"no judge endpoint configured (set {JUDGE_URL_ENV} or pass url=)"
            )
        self.model = model
        self.temperature = temperature
        self.timeout = timeout
        self.api_key = api_key if api_key is not None else os.environ.get(JUDGE_KEY_ENV, "")
        self.name = name

    def complete(
        self,
        messages: Sequence[str],
        *,
        task_id: str | None = None,
        submission_id: str | None = None,
    ) -> str:
        body: dict[str, Any] = {
            "temperature": self.temperature,
            "messages": [{"role": "user", "content": text} for text in messages],
        }
        if self.model:
            body["model"] = self.model
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = requests.post(self.url, json=body, headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise JudgeTransportError(f"judge request failed: {exc}") from exc
        if response.status_code >= 500:
            raise JudgeTransportError(f"judge returned HTTP {response.status_code}")
        if response.status_code >= 400:
            raise JudgeUnavailableError(
                f"judge rejected the request with HTTP {response.status_code}: "
                f"{response.text[:200]}"
            )
        try:
            payload = response.json()
            return payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise JudgeTransportError(f"judge reply is not a chat completion: {exc}") from exc


class MockJudge:
    """Deterministic judge replaying scripted replies.

    The fixture maps task_id -> submission_id -> ordered reply texts; each
    call for a cell consumes the next reply, which is how tests script
    retry behaviour. Thread-safe.
    """

    def __init__(self, fixture: Mapping[str, Mapping[str, Sequence[str]]], name: str = "mock-judge"):
        self._fixture = {
            task: {sub: list(replies) for sub, replies in subs.items()}
            for task, subs in fixture.items()
        }
        self._cursor: dict[tuple[str, str], int] = {}
        self._lock = threading.Lock()
        self.name = name

    def complete(
        self,
        messages: Sequence[str],
        *,
        task_id: str | None = None,
        submission_id: str | None = None,
    ) -> str:
        if task_id is None or submission_id is None:
            raise JudgeUnavailableError("the mock judge needs task_id and submission_id routing")
        replies = self._fixture.get(task_id, {}).get(submission_id)
        if replies is None:
            raise JudgeUnavailableError(
                f"no scripted replies for task {task_id!r}, submission {submission_id!r}"
            )
        with self._lock:
            index = self._cursor.get((task_id, submission_id), 0)
            if index >= len(replies):
                raise JudgeUnavailableError(
                    f"scripted replies exhausted for task {task_id!r}, "
                    f"submission {submission_id!r} (had {len(replies)})"
                )
            self._cursor[(task_id, submission_id)] = index + 1
        return replies[index]


def load_mock_fixture(path: str | Path) -> dict[str, dict[str, list[str]]]:
    """Read and shape-check a mock reply fixture file."""
    fixture_path = Path(path)
    if not fixture_path.exists():
        raise StoreIOError(f"mock fixture not found: {fixture_path}")
    try:
        data = json.loads(fixture_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{fixture_path.name}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{fixture_path.name}: fixture must map task ids to submissions")
    for task_id, subs in data.items():
        if not isinstance(subs, dict):
            raise FormatError(f"{fixture_path.name}: entry {task_id!r} must be an object")
        for submission_id, replies in subs.items():
            if not isinstance(replies, list) or not all(isinstance(r, str) for r in replies):
                raise FormatError(
                    f"{fixture_path.name}: replies for ({task_id!r}, {submission_id!r}) "
                    "must be a list of strings"
                )
    return data
