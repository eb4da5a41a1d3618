"""Tests for core value types and resampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from bgmatte.core import (
    AlphaMatte,
    Frame,
    SemanticMap,
    VideoSequence,
    block_reduce4,
    downsample4x,
    resize_bilinear,
    sample_bilinear,
    upsample,
)

import oracles


def rgb(h, w, value=0.5):
    return np.full((h, w, 3), value, dtype=np.float64)


class TestFrame:
    def test_valid_frame(self):
        f = Frame(rgb(4, 6), index=3)
        assert f.height == 4
        assert f.width == 6
        assert f.index == 3

    def test_pixels_are_read_only(self):
        f = Frame(rgb(4, 4))
        with pytest.raises(ValueError):
            f.pixels[0, 0, 0] = 0.0

    def test_constructor_copies_input(self):
        src = rgb(4, 4)
        f = Frame(src)
        src[0, 0, 0] = 0.9
        assert f.pixels[0, 0, 0] == 0.5

    def test_out_of_range_rejected(self):
        bad = rgb(4, 4)
        bad[1, 2, 0] = 1.5
        with pytest.raises(ValueError, match="must lie in"):
            Frame(bad)
        bad[1, 2, 0] = -0.1
        with pytest.raises(ValueError, match="must lie in"):
            Frame(bad)

    def test_nan_rejected(self):
        bad = rgb(4, 4)
        bad[0, 0, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            Frame(bad)

    def test_wrong_channel_count_rejected(self):
        with pytest.raises(ValueError, match="3 channels"):
            Frame(np.zeros((4, 4, 4)))

    def test_wrong_rank_rejected(self):
        with pytest.raises(ValueError):
            Frame(np.zeros((4, 4)))


class TestAlphaMatte:
    def test_resolution_tags(self):
        AlphaMatte(np.zeros((2, 2)), resolution_tag="coarse")
        AlphaMatte(np.zeros((2, 2)), resolution_tag="full")
        with pytest.raises(ValueError, match="resolution_tag"):
            AlphaMatte(np.zeros((2, 2)), resolution_tag="half")

    def test_range_validated(self):
        with pytest.raises(ValueError):
            AlphaMatte(np.full((2, 2), 1.01))


class TestVideoSequence:
    def test_indices_must_be_contiguous(self):
        frames = [Frame(rgb(4, 4), index=t) for t in (1, 2, 3)]
        seq = VideoSequence(tuple(frames))
        assert len(seq) == 3
        bad = [Frame(rgb(4, 4), index=t) for t in (1, 3)]
        with pytest.raises(ValueError, match="indices"):
            VideoSequence(tuple(bad))

    def test_mixed_resolutions_rejected(self):
        frames = (Frame(rgb(4, 4), index=1), Frame(rgb(4, 8), index=2))
        with pytest.raises(ValueError, match="one resolution"):
            VideoSequence(frames)

    def test_ground_truth_lengths_checked(self):
        frames = tuple(Frame(rgb(4, 4), index=t) for t in (1, 2))
        alphas = (AlphaMatte(np.zeros((4, 4))),)
        with pytest.raises(ValueError, match="alphas length"):
            VideoSequence(frames, alphas=alphas)

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            VideoSequence(())


class TestDownsample4x:
    def test_constant_block_mean(self):
        # A constant image stays constant, bit for bit.
        f = Frame(rgb(8, 8, 0.37))
        out = downsample4x(f)
        assert out.pixels.shape == (2, 2, 3)
        assert_array_equal(out.pixels, np.full((2, 2, 3), 0.37))

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(7)
        px = rng.random((12, 16, 3))
        out = downsample4x(Frame(px))
        assert_allclose(out.pixels, oracles.block_mean_4x(px), rtol=0, atol=1e-12)

    def test_trailing_remainder_dropped(self):
        rng = np.random.default_rng(8)
        px = rng.random((10, 13, 3))
        out = downsample4x(Frame(px))
        assert out.pixels.shape == (2, 3, 3)
        assert_allclose(out.pixels, oracles.block_mean_4x(px), rtol=0, atol=1e-12)

    def test_mean_conservation(self):
        # On block-aligned input the global mean is conserved.
        rng = np.random.default_rng(9)
        px = rng.random((16, 24, 3))
        out = downsample4x(Frame(px))
        assert abs(out.pixels.mean() - px.mean()) < 1e-9

    def test_checkerboard_averages_to_half(self):
        cells = np.indices((4, 4)).sum(axis=0) % 2
        px = np.repeat(cells[:, :, None], 3, axis=2).astype(np.float64)
        out = downsample4x(Frame(px))
        assert_array_equal(out.pixels, np.full((1, 1, 3), 0.5))

    def test_block_reduce4_single_channel(self):
        rng = np.random.default_rng(21)
        a = rng.random((8, 8))
        out = block_reduce4(a)
        ref = oracles.block_mean_4x(np.repeat(a[:, :, None], 3, axis=2))[:, :, 0]
        assert_allclose(out, ref, rtol=0, atol=1e-12)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError, match="too small"):
            downsample4x(Frame(rgb(3, 8)))

    def test_index_preserved(self):
        f = Frame(rgb(8, 8), index=5)
        assert downsample4x(f).index == 5


class TestBilinear:
    def test_identity_resize_is_exact(self):
        rng = np.random.default_rng(10)
        v = rng.random((7, 9))
        assert_array_equal(resize_bilinear(v, 7, 9), v)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(11)
        v = rng.random((6, 5))
        out = resize_bilinear(v, 17, 13)
        assert_allclose(out, oracles.resize_bilinear_loops(v, 17, 13), rtol=0, atol=1e-9)

    def test_matches_scalar_oracle_rgb(self):
        rng = np.random.default_rng(12)
        v = rng.random((5, 6, 3))
        out = resize_bilinear(v, 11, 9)
        assert_allclose(out, oracles.resize_bilinear_loops(v, 11, 9), rtol=0, atol=1e-9)

    def test_integer_coordinates_exact(self):
        rng = np.random.default_rng(13)
        v = rng.random((6, 6))
        rr, cc = np.meshgrid(np.arange(6.0), np.arange(6.0), indexing="ij")
        assert_array_equal(sample_bilinear(v, rr, cc), v)

    def test_constant_preserved_exactly(self):
        v = np.full((5, 5), 0.73)
        out = resize_bilinear(v, 23, 31)
        assert_array_equal(out, np.full((23, 31), 0.73))

    def test_linear_field_reconstructed_through_4x_round_trip(self):
        # A plane a + b*row + c*col block-averages to a plane on the
        # coarse grid and bilinear upsampling restores it exactly away
        # from the border (within float tolerance).
        h, w = 32, 48
        rr, cc = np.meshgrid(np.arange(h) + 0.5, np.arange(w) + 0.5, indexing="ij")
        plane = 0.1 + 0.004 * rr + 0.006 * cc
        coarse = plane[: h // 4 * 4, : w // 4 * 4].reshape(h // 4, 4, w // 4, 4).mean(axis=(1, 3))
        up = resize_bilinear(coarse, h, w)
        interior = (slice(2, -2), slice(2, -2))
        assert_allclose(up[interior], plane[interior], rtol=0, atol=1e-12)

    def test_range_never_exceeds_input(self):
        rng = np.random.default_rng(14)
        v = rng.random((4, 4))
        out = resize_bilinear(v, 9, 9)
        assert out.min() >= v.min() - 1e-12
        assert out.max() <= v.max() + 1e-12


class TestUpsample:
    def test_shrink_rejected(self):
        m = AlphaMatte(np.zeros((8, 8)), resolution_tag="coarse")
        with pytest.raises(ValueError, match="smaller than source"):
            upsample(m, 4, 16)

    def test_ramp_upsamples_monotonically(self):
        m = AlphaMatte(np.array([[0.0, 1.0]]), resolution_tag="coarse")
        out = upsample(m, 4, 1)
        assert out.values.shape == (1, 4)
        assert np.all(np.diff(out.values[0]) >= 0)

    def test_output_tagged_full(self):
        m = AlphaMatte(np.full((4, 4), 0.5), resolution_tag="coarse")
        out = upsample(m, 16, 16)
        assert out.resolution_tag == "full"
        assert out.values.shape == (16, 16)

    @settings(max_examples=25, deadline=None)
    @given(
        st.integers(min_value=2, max_value=6),
        st.integers(min_value=2, max_value=6),
        st.integers(min_value=1, max_value=4),
    )
    def test_upsample_stays_in_range(self, h, w, factor):
        rng = np.random.default_rng(h * 100 + w * 10 + factor)
        m = AlphaMatte(rng.random((h, w)), resolution_tag="coarse")
        out = upsample(m, w * factor, h * factor)
        assert out.values.min() >= 0.0
        assert out.values.max() <= 1.0
