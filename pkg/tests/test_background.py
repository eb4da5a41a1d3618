"""Tests for the background restoration state machine."""

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from bgmatte.background import (
    BackgroundState,
    UpdateTrace,
    extract_bg_info,
    init_state,
    render_background,
    update,
    upsampled_background,
)
from bgmatte.core import Frame, SemanticMap

import oracles


def sem(values):
    return SemanticMap(np.asarray(values, dtype=np.float64))


class TestState:
    def test_init_all_zero(self):
        st = init_state(2, 2)
        assert_array_equal(st.content, np.zeros((2, 2, 3)))
        assert_array_equal(st.restored, np.zeros((2, 2)))

    def test_init_single_pixel(self):
        st = init_state(1, 1)
        assert st.content.shape == (1, 1, 3)
        assert st.restored.sum() == 0.0

    def test_init_rejects_bad_dims(self):
        with pytest.raises(ValueError, match=">= 1"):
            init_state(0, 4)

    def test_mask_must_be_binary(self):
        with pytest.raises(ValueError, match="exactly 0 or 1"):
            BackgroundState(np.zeros((2, 2, 3)), np.full((2, 2), 0.5))

    def test_content_may_exceed_unit_range(self):
        # Corrupted accumulations are representable; rendering clamps.
        st = BackgroundState(np.full((2, 2, 3), 1.3), np.ones((2, 2)))
        assert st.content[0, 0, 0] == 1.3

    def test_trace_masks_must_be_disjoint(self):
        with pytest.raises(ValueError, match="disjoint"):
            UpdateTrace(np.ones((2, 2)), np.ones((2, 2)))


class TestExtractBgInfo:
    def test_all_foreground_blanks_observation(self):
        frame = Frame(np.full((2, 2, 3), 0.8))
        assert_array_equal(extract_bg_info(frame, sem(np.ones((2, 2)))), np.zeros((2, 2, 3)))

    def test_all_background_passes_through(self):
        frame = Frame(np.full((2, 2, 3), 0.8))
        assert_array_equal(extract_bg_info(frame, sem(np.zeros((2, 2)))), frame.pixels)

    def test_partial_confidence_attenuates(self):
        frame = Frame(np.array([[[0.8, 0.4, 0.0]]]))
        out = extract_bg_info(frame, sem(np.array([[0.25]])))
        np.testing.assert_allclose(out, np.array([[[0.6, 0.3, 0.0]]]), rtol=0, atol=1e-15)

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            extract_bg_info(Frame(np.zeros((2, 2, 3))), sem(np.zeros((2, 3))))


class TestUpdate:
    def test_all_foreground_leaves_state_unchanged(self):
        st = init_state(2, 2)
        nxt, trace = update(st, np.zeros((2, 2, 3)), sem(np.ones((2, 2))))
        assert_array_equal(nxt.content, st.content)
        assert_array_equal(nxt.restored, st.restored)
        assert trace.newly_restored.sum() == 0.0
        assert trace.averaged.sum() == 0.0

    def test_first_frame_copy(self):
        st = init_state(2, 2)
        obs = np.full((2, 2, 3), 0.6)
        nxt, trace = update(st, obs, sem(np.zeros((2, 2))))
        assert_array_equal(nxt.content, obs)
        assert_array_equal(nxt.restored, np.ones((2, 2)))
        assert_array_equal(trace.newly_restored, np.ones((2, 2)))
        assert_array_equal(trace.averaged, np.zeros((2, 2)))

    def test_averaging_branch(self):
        st = BackgroundState(np.full((1, 1, 3), 0.2), np.ones((1, 1)))
        nxt, trace = update(st, np.full((1, 1, 3), 0.6), sem(np.zeros((1, 1))))
        assert_array_equal(nxt.content, np.full((1, 1, 3), 0.4))
        assert_array_equal(trace.averaged, np.ones((1, 1)))
        assert_array_equal(trace.newly_restored, np.zeros((1, 1)))

    def test_half_semantic_is_not_background(self):
        # The background condition is strict: s = 0.5 fails it.
        st = init_state(2, 2)
        nxt, _ = update(st, np.full((2, 2, 3), 0.9), sem(np.full((2, 2), 0.5)))
        assert nxt.restored.sum() == 0.0

    def test_just_below_half_is_background(self):
        st = init_state(1, 1)
        nxt, _ = update(st, np.full((1, 1, 3), 0.9), sem(np.full((1, 1), 0.4999999)))
        assert nxt.restored.sum() == 1.0

    def test_mask_monotone_and_binary_over_random_runs(self):
        rng = np.random.default_rng(31)
        st = init_state(6, 5)
        for _ in range(15):
            s = sem(rng.random((5, 6)))
            obs = rng.random((5, 6, 3))
            nxt, trace = update(st, obs, s)
            assert np.all(nxt.restored >= st.restored)
            assert set(np.unique(nxt.restored)) <= {0.0, 1.0}
            assert (trace.newly_restored * trace.averaged).sum() == 0.0
            st = nxt

    def test_averaging_stays_in_hull(self):
        # Averaged content lands between the stored value and the
        # incoming observation, channel-wise.
        rng = np.random.default_rng(32)
        st = BackgroundState(rng.random((4, 4, 3)), np.ones((4, 4)))
        obs = rng.random((4, 4, 3))
        nxt, _ = update(st, obs, sem(np.zeros((4, 4))))
        lo = np.minimum(st.content, obs)
        hi = np.maximum(st.content, obs)
        assert np.all(nxt.content >= lo - 1e-15)
        assert np.all(nxt.content <= hi + 1e-15)

    def test_static_background_converges_geometrically(self):
        st = BackgroundState(np.zeros((2, 2, 3)), np.ones((2, 2)))
        obs = np.full((2, 2, 3), 0.8)
        errs = []
        for _ in range(6):
            st, _ = update(st, obs, sem(np.zeros((2, 2))))
            errs.append(np.abs(st.content - obs).max())
        for prev, cur in zip(errs, errs[1:]):
            assert cur == pytest.approx(prev / 2.0, rel=1e-12)

    def test_matches_scalar_oracle_bit_exactly(self):
        rng = np.random.default_rng(33)
        st = init_state(8, 8)
        for _ in range(10):
            s_vals = rng.random((8, 8))
            snap = rng.random((8, 8)) < 0.3
            s_vals[snap] = rng.choice([0.0, 0.5, 1.0], size=int(snap.sum()))
            obs = rng.random((8, 8, 3))
            ref = oracles.background_update_loops(st.content, st.restored, obs, s_vals)
            nxt, trace = update(st, obs, sem(s_vals))
            assert_array_equal(nxt.content, ref[0])
            assert_array_equal(nxt.restored, ref[1])
            assert_array_equal(trace.newly_restored, ref[2])
            assert_array_equal(trace.averaged, ref[3])
            st = nxt

    def test_dim_mismatch_rejected(self):
        st = init_state(2, 2)
        with pytest.raises(ValueError, match="shape"):
            update(st, np.zeros((2, 2, 3)), sem(np.zeros((3, 3))))
        with pytest.raises(ValueError, match="shape"):
            update(st, np.zeros((3, 3, 3)), sem(np.zeros((2, 2))))


class TestRender:
    def test_init_renders_black_empty(self):
        out = render_background(init_state(3, 2))
        assert_array_equal(out.frame.pixels, np.zeros((2, 3, 3)))
        assert not out.restored.any()
        assert not out.clamped

    def test_unrestored_pixels_black_even_with_content(self):
        st = BackgroundState(np.full((1, 2, 3), 0.7), np.array([[1.0, 0.0]]))
        out = render_background(st)
        assert_array_equal(out.frame.pixels[0, 0], np.full(3, 0.7))
        assert_array_equal(out.frame.pixels[0, 1], np.zeros(3))

    def test_out_of_range_content_clamps_and_flags(self):
        st = BackgroundState(np.full((1, 1, 3), 1.3), np.ones((1, 1)))
        out = render_background(st)
        assert out.clamped
        assert_array_equal(out.frame.pixels, np.ones((1, 1, 3)))

    def test_upsampled_background_dims(self):
        st = BackgroundState(np.full((4, 4, 3), 0.25), np.ones((4, 4)))
        frame = upsampled_background(st, 16, 12)
        assert (frame.height, frame.width) == (12, 16)
        assert_array_equal(frame.pixels, np.full((12, 16, 3), 0.25))
