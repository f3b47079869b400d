import numpy as np
import pytest

from conftest import simulate_panel
from vqalab.errors import DegenerateSession, InsufficientData, UnratedVideo
from vqalab.sureal import (
    OpinionEntry,
    OpinionMatrix,
    ZScoreMatrix,
    compute_mos,
    consistency_analysis,
    flag_outlier_subjects,
    normalize_zscores,
    rescale_scores,
    solve_sureal,
)


def _entries(rows):
    return [OpinionEntry(subject=s, video=v, session=k, score=sc) for s, v, k, sc in rows]


# --- z-scoring and rescaling ---------------------------------------------

def test_normalize_zscores_hand_example():
    m = OpinionMatrix(entries=_entries([
        ("s1", "a", 1, 1.0), ("s1", "b", 1, 2.0), ("s1", "c", 1, 3.0),
    ]))
    z = normalize_zscores(m)
    assert [e.score for e in z.entries] == pytest.approx([-1.0, 0.0, 1.0])


def test_normalize_zscores_per_session():
    # two sessions of the same subject are normalized independently
    m = OpinionMatrix(entries=_entries([
        ("s1", "a", 1, 0.0), ("s1", "b", 1, 10.0),
        ("s1", "c", 2, 50.0), ("s1", "d", 2, 70.0),
    ]))
    z = {e.video: e.score for e in normalize_zscores(m).entries}
    assert z["a"] == pytest.approx(-np.sqrt(0.5))
    assert z["c"] == pytest.approx(-np.sqrt(0.5))


def test_degenerate_session_raises():
    with pytest.raises(DegenerateSession) as exc:
        normalize_zscores(OpinionMatrix(entries=_entries([("s1", "a", 1, 5.0)])))
    assert exc.value.subject == "s1" and exc.value.session == 1
    with pytest.raises(DegenerateSession):
        normalize_zscores(OpinionMatrix(entries=_entries(
            [("s2", "a", 1, 5.0), ("s2", "b", 1, 5.0)])))


def test_duplicate_rating_rejected():
    with pytest.raises(InsufficientData):
        OpinionMatrix(entries=_entries([("s1", "a", 1, 1.0), ("s1", "a", 2, 2.0)]))


def test_rescale_midpoint_and_clamping():
    z = ZScoreMatrix(entries=_entries([
        ("s1", "a", 1, 0.0), ("s1", "b", 1, 6.0), ("s1", "c", 1, -6.0), ("s1", "d", 1, 2.5),
    ]))
    out = rescale_scores(z)
    scores = {e.video: e.score for e in out.entries}
    assert scores["a"] == 50.0
    assert scores["b"] == 100.0
    assert scores["c"] == 0.0
    assert scores["d"] == 75.0
    assert out.clamped == 2


def test_compute_mos_hand_example():
    z = ZScoreMatrix(entries=_entries([
        ("s1", "a", 1, 40.0), ("s2", "a", 1, 60.0), ("s1", "b", 1, 70.0),
    ]))
    videos, mos, std, n = compute_mos(z)
    assert videos == ["a", "b"]
    assert mos == pytest.approx([50.0, 70.0])
    assert std == pytest.approx([np.std([40, 60], ddof=1), 0.0])
    assert n.tolist() == [2, 1]
    with pytest.raises(UnratedVideo):
        compute_mos(ZScoreMatrix(entries=[]))


def test_from_csv_skips_comments(tmp_path):
    path = tmp_path / "opinions.csv"
    path.write_text(
        "# vqalab config=deadbeef\n"
        "subject_id,video_id,session,score,timestamp\n"
        "s1,a,1,42.5,100\n"
        "s2,a,1,50,101\n"
    )
    m = OpinionMatrix.from_csv(path)
    assert len(m.entries) == 2
    assert m.entries[0].score == 42.5
    assert m.subjects == ["s1", "s2"]


# --- MLE decomposition ---------------------------------------------------

def test_solve_sureal_recovers_simulation():
    rng = np.random.default_rng(10)
    matrix, truth = simulate_panel(rng, n_videos=40, n_subjects=12)
    params = solve_sureal(matrix)
    assert np.corrcoef(params.x_e, truth["x"])[0, 1] > 0.99
    assert np.mean(np.abs(params.b_s - truth["b"])) < 0.4
    assert np.corrcoef(params.v_s, truth["v"])[0, 1] > 0.7
    assert params.converged


def test_loglik_monotone_and_bias_centered():
    rng = np.random.default_rng(11)
    matrix, _ = simulate_panel(rng, n_videos=25, n_subjects=8)
    params = solve_sureal(matrix)
    diffs = np.diff(params.loglik_trace)
    assert np.all(diffs >= -1e-9)
    assert abs(params.b_s.mean()) < 1e-9
    assert params.loglik == params.loglik_trace[-1]


def test_solve_sureal_with_missing_entries():
    rng = np.random.default_rng(12)
    matrix, truth = simulate_panel(rng, n_videos=30, n_subjects=10)
    kept = [e for e in matrix.entries if rng.random() > 0.3]
    sparse = OpinionMatrix(entries=kept)
    params = solve_sureal(sparse)
    idx = [int(v[1:]) for v in params.videos]
    assert np.corrcoef(params.x_e, truth["x"][idx])[0, 1] > 0.98


def test_solve_sureal_insufficient_data():
    with pytest.raises(InsufficientData):
        solve_sureal(OpinionMatrix(entries=_entries([
            ("s1", "a", 1, 1.0), ("s2", "a", 1, 2.0), ("s1", "b", 1, 3.0),
        ])))


def test_solve_sureal_deterministic():
    rng = np.random.default_rng(13)
    matrix, _ = simulate_panel(rng, n_videos=15, n_subjects=6)
    p1 = solve_sureal(matrix)
    p2 = solve_sureal(matrix)
    assert np.array_equal(p1.x_e, p2.x_e)
    assert np.array_equal(p1.v_s, p2.v_s)


# --- consistency and outliers --------------------------------------------

def _low_noise_matrix(seed=20, n_videos=30, n_subjects=16):
    rng = np.random.default_rng(seed)
    matrix, _ = simulate_panel(rng, n_videos=n_videos, n_subjects=n_subjects,
                               b_sigma=0.5, v_range=(0.3, 0.8), a_range=(0.1, 0.3))
    return matrix


def test_consistency_high_for_low_noise_panel():
    rep = consistency_analysis(_low_noise_matrix(), splits=20, seed=0)
    assert rep.inter_plcc > 0.95
    assert rep.inter_srocc > 0.9
    assert rep.intra_plcc > 0.9
    assert rep.intra_srocc > 0.85


def test_consistency_deterministic():
    m = _low_noise_matrix()
    r1 = consistency_analysis(m, splits=10, seed=3)
    r2 = consistency_analysis(m, splits=10, seed=3)
    assert r1 == r2


def test_flag_outlier_subjects():
    rng = np.random.default_rng(30)
    matrix, _ = simulate_panel(rng, n_videos=40, n_subjects=10,
                               b_sigma=0.3, v_range=(0.4, 0.7), a_range=(0.1, 0.2))
    # replace one subject's scores with heavy noise and another's with a
    # large constant offset
    entries = []
    for e in matrix.entries:
        if e.subject == "s000":
            e = OpinionEntry(e.subject, e.video, e.session, e.score + rng.normal(0, 15))
        elif e.subject == "s001":
            e = OpinionEntry(e.subject, e.video, e.session, e.score + 20.0)
        entries.append(e)
    params = solve_sureal(OpinionMatrix(entries=entries))
    flags = flag_outlier_subjects(params)
    assert "s000" in flags
    assert "s001" in flags
    assert len(flags) <= 4


def test_no_flags_for_tiny_panels():
    rng = np.random.default_rng(31)
    matrix, _ = simulate_panel(rng, n_videos=10, n_subjects=2)
    params = solve_sureal(matrix)
    assert flag_outlier_subjects(params) == []
