import numpy as np
import pytest

from conftest import random_rgb
from vqalab.errors import AttemptsExhausted, EmptyNegatives, Infeasible
from vqalab.moeva import Chunk, generate_pairs, make_chunk, ola_crop
from vqalab.moeva.pairing import CropPair, _overlap, crop


def test_make_chunk_structure(rng):
    frame = random_rgb(rng, 80, 80)
    chunk = make_chunk(frame, 4, rng)
    assert chunk.n == 4
    assert len(chunk.specs) == 4
    assert len({(s.kind, s.level) for s in chunk.specs}) == 4
    assert chunk.images[0] is chunk.source
    for dist in chunk.distorted:
        assert dist.r.shape == frame.r.shape


def test_make_chunk_bad_n(rng):
    frame = random_rgb(rng, 80, 80)
    with pytest.raises(EmptyNegatives):
        make_chunk(frame, 0, rng)
    with pytest.raises(EmptyNegatives):
        make_chunk(frame, 126, rng)


def test_overlap_hand_cases():
    assert _overlap((0, 0, 4), (0, 0, 4)) == 1.0
    assert _overlap((0, 0, 4), (0, 2, 4)) == 0.5
    assert _overlap((0, 0, 4), (2, 2, 4)) == 0.25
    assert _overlap((0, 0, 4), (4, 4, 4)) == 0.0


def test_ola_crop_bounds_hold_over_many_draws(rng):
    for _ in range(2000):
        pair = ola_crop((40, 50), 16, 0.25, 0.75, rng)
        assert 0.25 <= pair.ola <= 0.75
        assert pair.ola == pytest.approx(_overlap(pair.window1, pair.window2))
        for t, l, p in (pair.window1, pair.window2):
            assert 0 <= t <= 40 - p and 0 <= l <= 50 - p and p == 16


def test_ola_crop_errors(rng):
    with pytest.raises(Infeasible):
        ola_crop((10, 10), 16, 0.25, 0.75, rng)
    with pytest.raises(Infeasible):
        ola_crop((40, 40), 16, 0.75, 0.25, rng)
    with pytest.raises(AttemptsExhausted):
        # one-pixel slack can't reach an overlap below 1/2
        ola_crop((17, 16), 16, 0.0, 0.5, rng, max_attempts=200)


def test_ola_crop_full_frame_special_case(rng):
    pair = ola_crop((16, 16), 16, 0.5, 1.0, rng)
    assert pair.ola == 1.0
    with pytest.raises(Infeasible):
        ola_crop((16, 16), 16, 0.25, 0.75, rng)


def test_crop_extracts_window(rng):
    img = random_rgb(rng, 30, 30)
    c = crop(img, (5, 7, 10))
    assert c.r.shape == (10, 10)
    assert np.array_equal(c.r, img.r[5:15, 7:17])


def _brute_force_pairs(chunk, cp, cross):
    """Direct enumeration of the labeling rules for small chunks."""
    c1 = [crop(img, cp.window1) for img in chunk.images]
    c2 = [crop(img, cp.window2) for img in chunk.images]
    out = []
    for m in range(len(chunk.images)):
        negs = []
        for l in range(len(chunk.images)):
            if l == m:
                continue
            negs.append(c1[l])
            negs.append(c2[l])
        out.append((c1[m], c2[m], negs + list(cross)))
    return out


@pytest.mark.parametrize("n", [1, 2, 3])
def test_generate_pairs_matches_enumeration(n, rng):
    frame = random_rgb(rng, 80, 80)
    chunk = make_chunk(frame, n, rng)
    cp = ola_crop((80, 80), 32, 0.25, 0.75, rng)
    cross = [crop(random_rgb(rng, 80, 80), cp.window2) for _ in range(2)]
    batch = generate_pairs(chunk, cp, cross_content=cross, temperature=0.2)
    expected = _brute_force_pairs(chunk, cp, cross)
    assert len(batch) == n + 1
    assert batch.temperature == 0.2
    for i, (anchor, positive, negs) in enumerate(expected):
        assert np.array_equal(batch.anchors[i].stack(), anchor.stack())
        assert np.array_equal(batch.positives[i].stack(), positive.stack())
        assert len(batch.negatives[i]) == 2 * n + 2
        for got, want in zip(batch.negatives[i], negs):
            assert np.array_equal(got.stack(), want.stack())


def test_generate_pairs_empty_chunk_raises(rng):
    frame = random_rgb(rng, 80, 80)
    chunk = Chunk(source=frame, distorted=[], specs=[])
    cp = CropPair(window1=(0, 0, 32), window2=(10, 10, 32), ola=_overlap((0, 0, 32), (10, 10, 32)))
    with pytest.raises(EmptyNegatives):
        generate_pairs(chunk, cp)
