"""Subjective-study session management.

Playlists, round-robin assignment, two sessions per subject with a minimum
gap, single-stimulus no-replay delivery, append-only rating capture, and
opinion-matrix export. The clock is always injected so the gap rule is
testable.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateRating,
    EmptyStore,
    GapNotElapsed,
    IndivisibleGroups,
    NoPlaylistRemaining,
    OutOfRange,
    PendingRating,
    SessionComplete,
    SizeMismatch,
    WrongVideo,
)

RATING_LABELS = {"Bad": 0, "Poor": 25, "Fair": 50, "Good": 75, "Excellent": 100}


@dataclass
class StudyConfig:
    playlist_count: int = 4
    playlist_size: int = 150
    playlists_per_subject: int = 2
    group_count: int = 4
    min_session_gap_hours: float = 24.0
    training_video_ids: list[str] = field(default_factory=list)
    shuffle_per_subject: bool = False


def build_playlists(video_ids, config: StudyConfig, seed: int) -> list[list[str]]:
    """Seeded random partition into disjoint equal playlists."""
    ids = list(video_ids)
    expected = config.playlist_count * config.playlist_size
    if len(ids) != expected:
        raise SizeMismatch(f"need exactly {expected} videos, got {len(ids)}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ids))
    shuffled = [ids[i] for i in perm]
    return [
        shuffled[p * config.playlist_size : (p + 1) * config.playlist_size]
        for p in range(config.playlist_count)
    ]


def assign_subjects(subject_ids, config: StudyConfig) -> dict:
    """Round-robin: group g gets playlists (g, g+1 mod playlist_count)."""
    subjects = list(subject_ids)
    if len(subjects) % config.group_count != 0:
        raise IndivisibleGroups(f"{len(subjects)} subjects not divisible into {config.group_count} groups")
    per_group = len(subjects) // config.group_count
    assignment = {}
    for idx, subj in enumerate(subjects):
        g = idx // per_group
        assignment[subj] = tuple(
            (g + offset) % config.playlist_count for offset in range(config.playlists_per_subject)
        )
    return assignment


PHASE_TRAINING = "training"
PHASE_RATING = "rating"
PHASE_COMPLETE = "complete"


@dataclass
class Session:
    session_id: str
    subject_id: str
    playlist_id: int
    session_index: int  # 1 or 2
    items: list[str]  # training ids then playlist ids
    training_count: int
    cursor: int = 0
    pending: bool = False  # current item served but not yet rated
    started_at: float = 0.0
    completed_at: float | None = None

    @property
    def state(self):
        if self.cursor >= len(self.items):
            return PHASE_COMPLETE
        return PHASE_TRAINING if self.cursor < self.training_count else PHASE_RATING

    @property
    def current_video(self):
        return self.items[self.cursor] if self.cursor < len(self.items) else None


@dataclass
class RatingRecord:
    subject_id: str
    video_id: str
    session_index: int
    score: float
    submitted_at: float
    is_training: bool


class StudyService:
    """In-memory study state with an optional append-only record log."""

    def __init__(self, config: StudyConfig, playlists, assignment, log_path=None, seed: int = 0):
        self.config = config
        self.playlists = playlists
        self.assignment = assignment
        self.log_path = log_path
        self.seed = seed
        self.records: list[RatingRecord] = []
        self.sessions: dict[str, Session] = {}
        self._completed: dict[str, list[Session]] = {}
        self._rated: dict[str, set[str]] = {}
        self._session_counter = 0
        self.questionnaires: dict[str, dict] = {}

    # -- session lifecycle ------------------------------------------------

    def start_session(self, subject_id: str, now: float) -> Session:
        """now is epoch seconds. Enforces the minimum inter-session gap."""
        if subject_id not in self.assignment:
            raise WrongVideo(f"unknown subject {subject_id!r}")
        done = self._completed.get(subject_id, [])
        active = [s for s in self.sessions.values() if s.subject_id == subject_id and s.state != PHASE_COMPLETE]
        if active:
            return active[0]  # one active session per subject; resume it
        if len(done) >= self.config.playlists_per_subject:
            raise NoPlaylistRemaining(f"subject {subject_id} already attended both sessions")
        if done:
            gap_h = (now - done[-1].completed_at) / 3600.0
            if gap_h < self.config.min_session_gap_hours:
                raise GapNotElapsed(self.config.min_session_gap_hours - gap_h)
        playlist_id = self.assignment[subject_id][len(done)]
        items = list(self.playlists[playlist_id])
        if self.config.shuffle_per_subject:
            rng = np.random.default_rng(np.random.SeedSequence((self.seed, hashable_id(subject_id), playlist_id)))
            items = [items[i] for i in rng.permutation(len(items))]
        items = list(self.config.training_video_ids) + items
        self._session_counter += 1
        session = Session(
            session_id=f"s{self._session_counter}",
            subject_id=subject_id,
            playlist_id=playlist_id,
            session_index=len(done) + 1,
            items=items,
            training_count=len(self.config.training_video_ids),
            started_at=now,
        )
        self.sessions[session.session_id] = session
        return session

    def next_item(self, session_id: str):
        """Current cursor video; advancing requires rating it first."""
        session = self.sessions[session_id]
        if session.state == PHASE_COMPLETE:
            raise SessionComplete(session_id)
        if session.pending:
            raise PendingRating(f"rate {session.current_video} before requesting the next item")
        session.pending = True
        return {"video_id": session.current_video, "phase": session.state,
                "position": session.cursor, "total": len(session.items)}

    def record_rating(self, session_id: str, video_id: str, score: float, now: float) -> RatingRecord:
        session = self.sessions[session_id]
        if session.state == PHASE_COMPLETE:
            raise SessionComplete(session_id)
        if video_id != session.current_video:
            raise WrongVideo(f"expected {session.current_video}, got {video_id}")
        if not 0.0 <= score <= 100.0:
            raise OutOfRange(f"score {score} outside [0, 100]")
        is_training = session.state == PHASE_TRAINING
        rated = self._rated.setdefault(session.subject_id, set())
        if not is_training and video_id in rated:
            raise DuplicateRating(f"subject {session.subject_id} already rated {video_id}")
        record = RatingRecord(
            subject_id=session.subject_id,
            video_id=video_id,
            session_index=session.session_index,
            score=float(score),
            submitted_at=now,
            is_training=is_training,
        )
        self.records.append(record)
        self._append_log(record)
        if not is_training:
            rated.add(video_id)
        session.pending = False
        session.cursor += 1
        if session.state == PHASE_COMPLETE:
            session.completed_at = now
            self._completed.setdefault(session.subject_id, []).append(session)
        return record

    def _append_log(self, record: RatingRecord):
        if self.log_path is None:
            return
        with open(self.log_path, "a") as fh:
            fh.write(json.dumps(record.__dict__) + "\n")

    # -- export -----------------------------------------------------------

    def export_opinion_csv(self) -> str:
        """Non-training ratings as subject_id,video_id,session,score,timestamp."""
        rows = [r for r in self.records if not r.is_training]
        if not rows:
            raise EmptyStore("no non-training ratings recorded")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["subject_id", "video_id", "session", "score", "timestamp"])
        for r in rows:
            writer.writerow([r.subject_id, r.video_id, r.session_index, f"{r.score:g}", f"{r.submitted_at:g}"])
        return buf.getvalue()

    def record_questionnaire(self, subject_id: str, answers: dict):
        self.questionnaires[subject_id] = dict(answers)


def hashable_id(s: str) -> int:
    # stable per-string integer (unlike the salted builtin hash)
    return int.from_bytes(s.encode()[:8].ljust(8, b"\0"), "little")


def simulate_full_study(config: StudyConfig, playlists, assignment, score_fn, start_time: float = 0.0,
                        log_path=None, seed: int = 0) -> StudyService:
    """Scripted full-attendance run: every subject completes both sessions.

    score_fn(subject_id, video_id) -> score in [0, 100].
    """
    service = StudyService(config, playlists, assignment, log_path=log_path, seed=seed)
    now = start_time
    for session_round in range(config.playlists_per_subject):
        for subject in assignment:
            session = service.start_session(subject, now)
            while session.state != PHASE_COMPLETE:
                item = service.next_item(session.session_id)
                service.record_rating(session.session_id, item["video_id"],
                                      score_fn(subject, item["video_id"]), now)
                now += 1.0
        now += (config.min_session_gap_hours + 1.0) * 3600.0
    return service
