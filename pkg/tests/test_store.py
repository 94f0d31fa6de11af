from __future__ import annotations

import json
import os
import stat

import pytest

import rubricate.session.store as store_module
from rubricate.errors import (
    DuplicateJudgmentError,
    FrozenCellError,
    IntegrityError,
    SessionLockedError,
    StoreIOError,
)
from rubricate.judging.models import Judgment
from rubricate.reliability import DiscrepancyCategory, DiscrepancyTag
from rubricate.session.store import GradingSession, SessionStore
from rubricate.submissions import Submission
from rubricate.verdicts import Verdict

from conftest import load_fixture_task

YES, NO = Verdict.YES, Verdict.NO


def seeded_session() -> GradingSession:
    task = load_fixture_task("linearity-proof")
    session = GradingSession(session_name="workshop-1")
    session.tasks[task.id] = task
    session.add_submissions(
        [
            Submission(f"{task.id}__S{i}", task.id, f"S{i}", body=f"$x_{i}$")
            for i in (1, 2)
        ]
    )
    session.aliases.alias_for("raw-a")
    session.aliases.alias_for("raw-b")
    return session


def full_judgment_batch(session: GradingSession, grader: str, submission_id: str, verdict=YES):
    task = session.task_of(submission_id)
    return [
        Judgment(grader, submission_id, c.id, verdict, f"note {c.id}", timestamp="t0")
        for c in task.criteria
    ]


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path):
        session = seeded_session()
        session.add_initial_judgments(
            full_judgment_batch(session, "R1", "linearity-proof__S1")
        )
        session.consensus.resolve(
            session.matrix(), "linearity-proof__S1", "identify-linear", YES, "ok", ["R1"]
        )
        session.tags.append(
            DiscrepancyTag(
                "linearity-proof__S1",
                "identify-linear",
                "R1",
                DiscrepancyCategory.OTHER,
                note="n",
            )
        )
        session.needs_human.add("linearity-proof__S2")

        store = SessionStore(tmp_path / "sess")
        store.save(session)
        loaded = SessionStore(tmp_path / "sess").load()

        assert loaded.session_name == session.session_name
        assert loaded.tasks.keys() == session.tasks.keys()
        assert loaded.submissions == session.submissions
        assert sorted(loaded.judgments, key=lambda j: j.criterion_id) == sorted(
            session.judgments, key=lambda j: j.criterion_id
        )
        assert loaded.consensus.as_dict() == session.consensus.as_dict()
        assert loaded.tags == session.tags
        assert loaded.needs_human == session.needs_human
        assert loaded.aliases.as_dict() == session.aliases.as_dict()

    def test_saving_twice_is_byte_identical(self, tmp_path):
        session = seeded_session()
        session.add_initial_judgments(
            full_judgment_batch(session, "R1", "linearity-proof__S1")
        )
        store = SessionStore(tmp_path / "sess")
        store.save(session)

        snapshot = {
            p.relative_to(store.directory): p.read_bytes()
            for p in sorted(store.directory.rglob("*"))
            if p.is_file()
        }
        reloaded = store.load()
        store.save(reloaded)
        after = {
            p.relative_to(store.directory): p.read_bytes()
            for p in sorted(store.directory.rglob("*"))
            if p.is_file()
        }
        assert snapshot == after

    def test_alias_file_permissions_restrictive(self, tmp_path):
        store = SessionStore(tmp_path / "sess")
        store.save(seeded_session())
        mode = stat.S_IMODE(os.stat(store.directory / "aliases.private.json").st_mode)
        assert mode == 0o600

    def test_missing_session_is_io_error(self, tmp_path):
        with pytest.raises(StoreIOError):
            SessionStore(tmp_path / "nothing").load()

    def test_schema_version_checked(self, tmp_path):
        store = SessionStore(tmp_path / "sess")
        store.save(seeded_session())
        meta_path = store.directory / "session.json"
        meta = json.loads(meta_path.read_text())
        meta["schema_version"] = 99
        meta_path.write_text(json.dumps(meta))
        with pytest.raises(IntegrityError):
            store.load()

    def test_create_refuses_existing(self, tmp_path):
        store = SessionStore(tmp_path / "sess")
        store.create("one")
        with pytest.raises(StoreIOError):
            store.create("two")


class TestInvariants:
    def test_duplicate_initial_judgment_rejected(self):
        session = seeded_session()
        batch = full_judgment_batch(session, "R1", "linearity-proof__S1")
        session.add_initial_judgments(batch)
        with pytest.raises(DuplicateJudgmentError):
            session.add_initial_judgments([batch[0]])

    def test_frozen_submission_rejects_new_initials(self):
        session = seeded_session()
        session.add_initial_judgments(
            full_judgment_batch(session, "R1", "linearity-proof__S1")
        )
        session.consensus.resolve(
            session.matrix(), "linearity-proof__S1", "identify-linear", YES, "", ["R1"]
        )
        with pytest.raises(FrozenCellError):
            session.add_initial_judgments(
                full_judgment_batch(session, "R2", "linearity-proof__S1")
            )

    def test_unfrozen_submission_still_accepts(self):
        session = seeded_session()
        session.add_initial_judgments(
            full_judgment_batch(session, "R1", "linearity-proof__S1")
        )
        session.consensus.resolve(
            session.matrix(), "linearity-proof__S1", "identify-linear", YES, "", ["R1"]
        )
        session.add_initial_judgments(
            full_judgment_batch(session, "R2", "linearity-proof__S2")
        )

    def test_unknown_submission_is_integrity_error(self):
        session = seeded_session()
        with pytest.raises(IntegrityError):
            session.add_initial_judgments(
                [Judgment("R1", "ghost", "identify-linear", YES, "")]
            )

    def test_load_checks_integrity(self, tmp_path):
        session = seeded_session()
        session.add_initial_judgments(
            full_judgment_batch(session, "R1", "linearity-proof__S1")
        )
        store = SessionStore(tmp_path / "sess")
        store.save(session)
        judgments_path = store.directory / "judgments.json"
        data = json.loads(judgments_path.read_text())
        data["judgments"][0]["submission_id"] = "phantom"
        judgments_path.write_text(json.dumps(data))
        with pytest.raises(IntegrityError):
            store.load()


class TestAtomicity:
    def test_interrupted_write_preserves_original(self, tmp_path, monkeypatch):
        session = seeded_session()
        store = SessionStore(tmp_path / "sess")
        store.save(session)
        original = (store.directory / "judgments.json").read_bytes()

        session.add_initial_judgments(
            full_judgment_batch(session, "R1", "linearity-proof__S1")
        )

        real_replace = os.replace

        def exploding_replace(src, dst):
            if str(dst).endswith("judgments.json"):
                raise OSError("simulated crash")
            return real_replace(src, dst)

        monkeypatch.setattr(store_module.os, "replace", exploding_replace)
        with pytest.raises(OSError):
            store.save_judgments(session)
        monkeypatch.undo()

        assert (store.directory / "judgments.json").read_bytes() == original
        reloaded = store.load()
        assert reloaded.judgments == []

    def test_interrupted_grade_leaves_whole_batches(self, tmp_path):
        # commit per submission: a crash between submissions never leaves a
        # partially judged cell set
        session = seeded_session()
        store = SessionStore(tmp_path / "sess")
        store.save(session)

        session.add_initial_judgments(
            full_judgment_batch(session, "mock-judge", "linearity-proof__S1")
        )
        store.save_judgments(session)
        # crash here: second submission never graded

        reloaded = store.load()
        per_submission = {}
        for judgment in reloaded.judgments:
            per_submission.setdefault(judgment.submission_id, set()).add(
                judgment.criterion_id
            )
        task = reloaded.tasks["linearity-proof"]
        for criteria in per_submission.values():
            assert criteria == set(task.criterion_ids)


class TestLocking:
    def test_lock_excludes_second_writer(self, tmp_path):
        store = SessionStore(tmp_path / "sess")
        store.save(seeded_session())
        with store.lock():
            with pytest.raises(SessionLockedError):
                SessionStore(store.directory).lock().acquire()
        # released: can acquire again
        with store.lock():
            pass

    def test_stale_lock_from_dead_process_taken_over(self, tmp_path):
        store = SessionStore(tmp_path / "sess")
        store.save(seeded_session())
        (store.directory / ".lock").write_text("999999999")
        with store.lock():
            pass
