import json

import numpy as np
import pytest

from vqalab.errors import (
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
from vqalab.study import (
    StudyConfig,
    StudyService,
    assign_subjects,
    build_playlists,
    simulate_full_study,
)

HOUR = 3600.0


def small_config(**kw):
    defaults = dict(playlist_count=4, playlist_size=3, playlists_per_subject=2,
                    group_count=4, min_session_gap_hours=24.0,
                    training_video_ids=["t1", "t2"])
    defaults.update(kw)
    return StudyConfig(**defaults)


def make_service(config=None, subjects=8, log_path=None):
    config = config or small_config()
    videos = [f"v{i:02d}" for i in range(config.playlist_count * config.playlist_size)]
    playlists = build_playlists(videos, config, seed=0)
    names = [f"subj{i}" for i in range(subjects)]
    assignment = assign_subjects(names, config)
    return StudyService(config, playlists, assignment, log_path=log_path), playlists, assignment


# --- playlists and assignment --------------------------------------------

def test_build_playlists_partitions():
    config = small_config()
    videos = [f"v{i:02d}" for i in range(12)]
    playlists = build_playlists(videos, config, seed=1)
    assert len(playlists) == 4
    assert all(len(p) == 3 for p in playlists)
    flat = [v for p in playlists for v in p]
    assert sorted(flat) == sorted(videos)
    assert build_playlists(videos, config, seed=1) == playlists
    assert build_playlists(videos, config, seed=2) != playlists
    with pytest.raises(SizeMismatch):
        build_playlists(videos[:-1], config, seed=0)


def test_assign_subjects_round_robin():
    config = small_config()
    assignment = assign_subjects([f"s{i}" for i in range(8)], config)
    assert assignment["s0"] == (0, 1)
    assert assignment["s2"] == (1, 2)
    assert assignment["s6"] == (3, 0)
    # every playlist is covered by exactly two groups
    counts = {p: 0 for p in range(4)}
    for pls in assignment.values():
        for p in pls:
            counts[p] += 1
    assert all(c == 4 for c in counts.values())
    with pytest.raises(IndivisibleGroups):
        assign_subjects(["a", "b", "c"], config)


# --- session flow ---------------------------------------------------------

def test_training_then_rating_then_complete():
    service, playlists, assignment = make_service()
    session = service.start_session("subj0", now=0.0)
    assert session.state == "training"
    seen = []
    while True:
        try:
            item = service.next_item(session.session_id)
        except SessionComplete:
            break
        seen.append((item["video_id"], item["phase"]))
        service.record_rating(session.session_id, item["video_id"], 50.0, now=1.0)
    assert [v for v, ph in seen if ph == "training"] == ["t1", "t2"]
    assert [v for v, ph in seen if ph == "rating"] == playlists[assignment["subj0"][0]]
    assert session.state == "complete"


def test_pending_rating_blocks_second_fetch():
    service, *_ = make_service()
    session = service.start_session("subj0", now=0.0)
    item = service.next_item(session.session_id)
    with pytest.raises(PendingRating):
        service.next_item(session.session_id)
    service.record_rating(session.session_id, item["video_id"], 10.0, now=1.0)
    assert service.next_item(session.session_id)["video_id"] != item["video_id"]


def test_wrong_video_and_out_of_range():
    service, *_ = make_service()
    session = service.start_session("subj0", now=0.0)
    item = service.next_item(session.session_id)
    with pytest.raises(WrongVideo):
        service.record_rating(session.session_id, "nope", 50.0, now=1.0)
    with pytest.raises(OutOfRange):
        service.record_rating(session.session_id, item["video_id"], 101.0, now=1.0)
    with pytest.raises(OutOfRange):
        service.record_rating(session.session_id, item["video_id"], -0.5, now=1.0)
    # boundary scores are legal
    service.record_rating(session.session_id, item["video_id"], 0.0, now=1.0)


def test_duplicate_rating_across_sessions():
    # craft overlapping playlists so a video can reappear
    config = small_config(training_video_ids=[])
    service, playlists, assignment = make_service(config)
    shared = playlists[assignment["subj0"][0]][0]
    playlists[assignment["subj0"][1]][0] = shared

    s1 = service.start_session("subj0", now=0.0)
    while s1.state != "complete":
        item = service.next_item(s1.session_id)
        service.record_rating(s1.session_id, item["video_id"], 40.0, now=1.0)
    s2 = service.start_session("subj0", now=30 * HOUR)
    item = service.next_item(s2.session_id)
    assert item["video_id"] == shared
    with pytest.raises(DuplicateRating):
        service.record_rating(s2.session_id, shared, 40.0, now=30 * HOUR)


def _complete(service, session, now):
    while session.state != "complete":
        item = service.next_item(session.session_id)
        service.record_rating(session.session_id, item["video_id"], 50.0, now=now)


def test_session_gap_enforced():
    service, *_ = make_service()
    s1 = service.start_session("subj0", now=0.0)
    _complete(service, s1, now=100.0)
    with pytest.raises(GapNotElapsed) as exc:
        service.start_session("subj0", now=100.0 + 23 * HOUR)
    assert exc.value.remaining_hours == pytest.approx(1.0)
    s2 = service.start_session("subj0", now=100.0 + 25 * HOUR)
    assert s2.session_index == 2
    _complete(service, s2, now=100.0 + 25 * HOUR)
    with pytest.raises(NoPlaylistRemaining):
        service.start_session("subj0", now=100.0 + 100 * HOUR)


def test_active_session_resumes():
    service, *_ = make_service()
    s1 = service.start_session("subj0", now=0.0)
    item = service.next_item(s1.session_id)
    again = service.start_session("subj0", now=50.0)
    assert again.session_id == s1.session_id
    # the pending item survives the resume
    with pytest.raises(PendingRating):
        service.next_item(again.session_id)
    service.record_rating(again.session_id, item["video_id"], 20.0, now=60.0)


def test_unknown_subject_rejected():
    service, *_ = make_service()
    with pytest.raises(WrongVideo):
        service.start_session("ghost", now=0.0)


# --- export and logging ---------------------------------------------------

def test_export_excludes_training_and_formats_csv():
    service, *_ = make_service()
    s1 = service.start_session("subj0", now=0.0)
    item = service.next_item(s1.session_id)
    service.record_rating(s1.session_id, item["video_id"], 30.0, now=5.0)  # training
    with pytest.raises(EmptyStore):
        service.export_opinion_csv()
    _complete(service, s1, now=10.0)
    csv_text = service.export_opinion_csv()
    lines = csv_text.strip().split("\n")
    assert lines[0] == "subject_id,video_id,session,score,timestamp"
    assert len(lines) == 1 + 3  # playlist_size ratings, no training rows
    assert all(line.startswith("subj0,v") for line in lines[1:])


def test_append_only_log(tmp_path):
    log = tmp_path / "ratings.jsonl"
    service, *_ = make_service(log_path=str(log))
    s1 = service.start_session("subj0", now=0.0)
    _complete(service, s1, now=1.0)
    rows = [json.loads(line) for line in log.read_text().strip().split("\n")]
    assert len(rows) == 5  # 2 training + 3 rating
    assert rows[0]["is_training"] is True
    assert {"subject_id", "video_id", "session_index", "score", "submitted_at"} <= set(rows[0])


# --- full simulation ------------------------------------------------------

def test_simulate_full_study_counts():
    config = small_config()
    videos = [f"v{i:02d}" for i in range(12)]
    playlists = build_playlists(videos, config, seed=3)
    subjects = [f"s{i}" for i in range(8)]
    assignment = assign_subjects(subjects, config)
    service = simulate_full_study(config, playlists, assignment,
                                  score_fn=lambda subj, vid: 50.0)
    rows = [r for r in service.records if not r.is_training]
    assert len(rows) == 8 * 6  # each subject rates two playlists of 3
    per_video = {}
    for r in rows:
        per_video[r.video_id] = per_video.get(r.video_id, 0) + 1
    # each playlist is assigned to two groups of two subjects each
    assert set(per_video.values()) == {4}


def test_per_subject_shuffle_option():
    config = small_config(shuffle_per_subject=True, training_video_ids=[])
    service, playlists, assignment = make_service(config)
    s1 = service.start_session("subj0", now=0.0)
    assert sorted(s1.items) == sorted(playlists[assignment["subj0"][0]])
    # deterministic given the service seed
    service2, *_ = make_service(config)
    s2 = service2.start_session("subj0", now=0.0)
    assert s1.items == s2.items
