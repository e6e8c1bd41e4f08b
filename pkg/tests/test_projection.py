import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from csvel.ingest import FrameSequence, SyntheticSceneSpec, apply_mask, generate_synthetic, make_mask
from csvel.projection import project
from oracles import projection_bruteforce


def _scene(n=24, vx=3, **kw):
    spec = SyntheticSceneSpec(128, 16, n, object_size=(10, 6), initial_position=(5, 4),
                              velocity_profile=("constant", vx), **kw)
    return generate_synthetic(spec)[0]


def test_static_scene_is_zero():
    seq = _scene(vx=0)
    assert np.all(np.abs(project(seq).values) <= 1e-12)


def test_single_pixel_move():
    a = np.zeros((8, 8))
    b = np.zeros((8, 8))
    a[2, 3] = 1
    b[2, 4] = 1
    proj = project(FrameSequence(np.stack([a, b]), 2, [0, 1]))
    expected = np.zeros(8)
    expected[3], expected[4] = -1, 1
    np.testing.assert_array_equal(proj.values[:, 0], expected)
    np.testing.assert_array_equal(proj.pair_times, [0])


def test_matches_bruteforce_and_edge_support():
    seq = _scene()
    proj = project(seq)
    ref = projection_bruteforce(seq.frames, seq.available)
    np.testing.assert_allclose(proj.values, ref, atol=1e-12)
    x = 5
    for d in range(proj.n_pairs):
        support = np.flatnonzero(proj.values[:, d])
        # trailing edge loses, leading edge gains, 3 pixels each
        expected = np.r_[np.arange(x, x + 3), np.arange(x + 10, x + 13)]
        np.testing.assert_array_equal(support, expected)
        x += 3


def test_gapped_pairs_and_stamps():
    seq = apply_mask(_scene(), make_mask(24, 0.5, 3))
    proj = project(seq)
    assert proj.n_pairs == seq.n_available - 1
    np.testing.assert_array_equal(proj.pair_times, seq.available[:-1])
    np.testing.assert_allclose(proj.values, projection_bruteforce(seq.frames, seq.available), atol=1e-12)


def test_gap_normalization_flag():
    seq = apply_mask(_scene(), make_mask(24, 0.5, 3))
    raw = project(seq).values
    norm = project(seq, normalize_gap=True).values
    np.testing.assert_allclose(norm * np.diff(seq.available), raw)


def test_zero_sum_columns():
    proj = project(apply_mask(_scene(), make_mask(24, 0.6, 1)))
    np.testing.assert_allclose(proj.values.sum(axis=0), 0, atol=1e-9)


def test_too_few_frames():
    with pytest.raises(ValueError):
        project(FrameSequence(np.zeros((1, 4, 4)), 3, [1]))


frames_st = arrays(np.float64, (4, 5, 6), elements=st.floats(0, 1))


@given(frames=frames_st, c=st.floats(0.01, 10), bg=arrays(np.float64, (5, 6), elements=st.floats(-1, 1)))
@settings(max_examples=40, deadline=None)
def test_linearity_and_background_cancellation(frames, c, bg):
    seq = FrameSequence(frames, 6, [0, 2, 3, 5])
    base = project(seq).values
    scaled = project(FrameSequence(c * frames, 6, [0, 2, 3, 5])).values
    np.testing.assert_allclose(scaled, c * base, atol=1e-9)
    shifted = project(FrameSequence(frames + bg, 6, [0, 2, 3, 5])).values
    np.testing.assert_allclose(shifted, base, atol=1e-9)


def test_csv_dump(tmp_path):
    proj = project(_scene(n=5))
    proj.to_csv(tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "0,1,2,3"
    assert len(lines) == 1 + proj.width
