"""Tests for the per-frame matting pipeline."""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy.special import expit

from bgmatte.background import BackgroundState, init_state
from bgmatte.core import AlphaMatte, Frame, SemanticMap, downsample4x, resize_bilinear
from bgmatte.matting import (
    Predictor,
    TransitionBand,
    available_predictors,
    band_from_alpha,
    build_band,
    create_predictor,
    detail_solve,
    fuse,
    make_classical_predictor,
    process_frame,
    register_predictor,
    semantic_estimate,
    solve_alpha,
    _nearest_feature_indices,
)

import oracles


def sem(values):
    return SemanticMap(np.asarray(values, dtype=np.float64))


def full_state(content):
    content = np.asarray(content, dtype=np.float64)
    return BackgroundState(content, np.ones(content.shape[:2]))


def nearest_brute(feature, qr, qc):
    """Row-major-tie nearest feature pixel, by exhaustive scan."""
    h, w = feature.shape
    rows, cols = [], []
    for r, c in zip(qr, qc):
        best = None
        for fr in range(h):
            for fc in range(w):
                if not feature[fr, fc]:
                    continue
                key = ((fr - r) ** 2 + (fc - c) ** 2, fr, fc)
                if best is None or key < best:
                    best = key
        rows.append(best[1])
        cols.append(best[2])
    return np.array(rows), np.array(cols)


class TestSemanticEstimate:
    def test_frame_equal_to_background_scores_low(self):
        content = np.full((4, 4, 3), 0.5)
        st = full_state(content)
        s = semantic_estimate(Frame(content), st)
        assert s.values.max() <= expit(-0.1 / 0.02) + 1e-12

    def test_large_difference_scores_high(self):
        st = full_state(np.zeros((2, 2, 3)))
        s = semantic_estimate(Frame(np.ones((2, 2, 3))), st)
        assert s.values.min() >= 0.99

    def test_unrestored_defaults_to_bootstrap(self):
        st = init_state(3, 3)
        s = semantic_estimate(Frame(np.full((3, 3, 3), 0.7)), st)
        assert_array_equal(s.values, np.full((3, 3), 0.5))

    def test_unrestored_takes_previous_estimate(self):
        st = init_state(2, 2)
        prev = sem(np.array([[0.1, 0.9], [0.2, 0.8]]))
        s = semantic_estimate(Frame(np.full((2, 2, 3), 0.7)), st, prev)
        assert_array_equal(s.values, prev.values)

    def test_mixed_restoration_uses_evidence_where_known(self):
        content = np.zeros((1, 2, 3))
        st = BackgroundState(content, np.array([[1.0, 0.0]]))
        frame = Frame(np.ones((1, 2, 3)))
        s = semantic_estimate(frame, st, bootstrap=0.25)
        assert s.values[0, 0] > 0.99
        assert s.values[0, 1] == 0.25

    def test_logistic_midpoint_at_theta(self):
        content = np.zeros((1, 1, 3))
        st = full_state(content)
        s = semantic_estimate(Frame(np.full((1, 1, 3), 0.1)), st, theta=0.1, sigma=0.02)
        assert s.values[0, 0] == pytest.approx(0.5, abs=1e-12)

    def test_parameter_validation(self):
        st = init_state(1, 1)
        frame = Frame(np.zeros((1, 1, 3)))
        with pytest.raises(ValueError, match="sigma"):
            semantic_estimate(frame, st, sigma=0.0)
        with pytest.raises(ValueError, match="bootstrap"):
            semantic_estimate(frame, st, bootstrap=1.5)
        with pytest.raises(ValueError, match="shape"):
            semantic_estimate(Frame(np.zeros((2, 2, 3))), st)


class TestTransitionBand:
    def test_band_covers_interior(self):
        vals = np.array([[0.0, 0.5, 1.0]])
        band = band_from_alpha(vals, radius=0)
        assert_array_equal(band.mask, np.array([[False, True, False]]))

    def test_dilation_widens_band(self):
        vals = np.zeros((7, 7))
        vals[3, 3] = 0.5
        band = band_from_alpha(vals, radius=2)
        assert band.mask.sum() == 25
        assert band.mask[1:6, 1:6].all()

    def test_constructor_rejects_uncovered_interior(self):
        vals = np.array([[0.5, 0.0]])
        with pytest.raises(ValueError, match="must cover"):
            TransitionBand(mask=np.array([[False, False]]), semantic_alpha=vals)

    def test_hard_map_gives_empty_band(self):
        band = band_from_alpha(np.array([[0.0, 1.0], [1.0, 0.0]]), radius=2)
        assert not band.mask.any()

    def test_build_band_upsamples(self):
        s = sem(np.full((2, 2), 0.5))
        band = build_band(s, 8, 8)
        assert band.mask.shape == (8, 8)
        assert band.mask.all()

    def test_threshold_validation(self):
        with pytest.raises(ValueError, match="lo < hi"):
            TransitionBand(np.zeros((1, 1), bool), np.zeros((1, 1)), lo=0.9, hi=0.1)


class TestNearestFeature:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        feature = rng.random((13, 11)) < 0.08
        feature[5, 7] = True  # never empty
        qr, qc = np.nonzero(rng.random((13, 11)) < 0.4)
        fr, fc = _nearest_feature_indices(feature, qr, qc)
        br, bc = nearest_brute(feature, qr, qc)
        assert_array_equal(fr, br)
        assert_array_equal(fc, bc)

    def test_row_major_tie_break(self):
        # Two features equidistant from the query: up-left wins over
        # down-right because its row is smaller.
        feature = np.zeros((5, 5), dtype=bool)
        feature[1, 2] = True
        feature[3, 2] = True
        fr, fc = _nearest_feature_indices(feature, np.array([2]), np.array([2]))
        assert (fr[0], fc[0]) == (1, 2)

    def test_distant_feature_found_by_fallback(self):
        # Far enough that every ring stage misses; exercises brute force.
        feature = np.zeros((300, 300), dtype=bool)
        feature[299, 299] = True
        fr, fc = _nearest_feature_indices(feature, np.array([0]), np.array([0]))
        assert (fr[0], fc[0]) == (299, 299)


class TestSolveAlpha:
    def test_image_equals_background(self):
        a, degen = solve_alpha([0.2, 0.2, 0.2], [1.0, 1.0, 1.0], [0.2, 0.2, 0.2])
        assert a == 0.0
        assert not degen

    def test_image_equals_foreground(self):
        a, _ = solve_alpha([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
        assert a == 1.0

    def test_midpoint_composite(self):
        a, _ = solve_alpha([0.5, 0.0, 0.5], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
        assert a == pytest.approx(0.5, abs=1e-12)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(41)
        img = rng.random((20, 3))
        fg = rng.random((20, 3))
        bg = rng.random((20, 3))
        a, _ = solve_alpha(img, fg, bg)
        ref = [oracles.solve_alpha_scalar(i, f, b) for i, f, b in zip(img, fg, bg)]
        assert_allclose(a, ref, rtol=0, atol=1e-12)

    def test_degenerate_colors_flagged_and_floored(self):
        a, degen = solve_alpha([0.5, 0.5, 0.5], [0.5, 0.5, 0.5], [0.5, 0.5, 0.5])
        assert degen
        assert a == 0.0

    def test_delta_validation(self):
        with pytest.raises(ValueError, match="delta"):
            solve_alpha([0.0] * 3, [1.0] * 3, [0.0] * 3, delta=0.0)


class TestDetailSolve:
    def _edge_scene(self):
        # Vertical soft edge: fg color red over blue background.
        h, w = 16, 16
        alpha = np.clip((np.arange(w) - 5.5) / 4.0, 0.0, 1.0)
        alpha = np.tile(alpha, (h, 1))
        fg = np.zeros((h, w, 3))
        fg[:, :, 0] = 1.0
        bg = np.zeros((h, w, 3))
        bg[:, :, 2] = 1.0
        img = alpha[:, :, None] * fg + (1.0 - alpha[:, :, None]) * bg
        return alpha, Frame(img), Frame(bg)

    def test_recovers_alpha_on_known_background(self):
        alpha, frame, bg = self._edge_scene()
        band = band_from_alpha(alpha, radius=2)
        result = detail_solve(frame, band, bg)
        assert not result.used_semantic_fallback
        assert_allclose(
            result.matte.values[band.mask], alpha[band.mask], rtol=0, atol=1e-9
        )

    def test_hard_semantic_outside_band(self):
        alpha, frame, bg = self._edge_scene()
        band = band_from_alpha(alpha, radius=2)
        result = detail_solve(frame, band, bg)
        outside = ~band.mask
        assert_array_equal(
            result.matte.values[outside], np.where(alpha[outside] >= 0.5, 1.0, 0.0)
        )

    def test_no_confident_foreground_falls_back(self):
        h, w = 8, 8
        semantic = np.full((h, w), 0.5)
        band = band_from_alpha(semantic, radius=0)
        frame = Frame(np.full((h, w, 3), 0.4))
        bg = Frame(np.zeros((h, w, 3)))
        result = detail_solve(frame, band, bg)
        assert result.used_semantic_fallback
        assert_array_equal(result.matte.values, semantic)

    def test_degenerate_pixels_reported(self):
        # Foreground and background the same color: projection floored.
        h, w = 8, 8
        alpha = np.tile(np.clip((np.arange(w) - 2.5) / 3.0, 0.0, 1.0), (h, 1))
        color = np.full((h, w, 3), 0.5)
        band = band_from_alpha(alpha, radius=1)
        result = detail_solve(Frame(color), band, Frame(color))
        assert result.degenerate[band.mask].all()
        assert not result.degenerate[~band.mask].any()

    def test_dim_mismatch_rejected(self):
        alpha, frame, bg = self._edge_scene()
        band = band_from_alpha(alpha[:8], radius=1)
        with pytest.raises(ValueError, match="band shape"):
            detail_solve(frame, band, bg)


class TestFuse:
    def test_empty_band_thresholds_semantic(self):
        s = sem(np.array([[0.1, 0.9]]))
        detail = AlphaMatte(np.full((4, 8), 0.5))
        band = TransitionBand(np.zeros((4, 8), bool), np.zeros((4, 8)))
        out = fuse(s, detail, band)
        up = np.clip(resize_bilinear(s.values, 4, 8), 0.0, 1.0)
        assert_array_equal(out.values, np.where(up >= 0.5, 1.0, 0.0))

    def test_full_band_returns_detail(self):
        s = sem(np.full((2, 2), 0.5))
        detail = AlphaMatte(np.random.default_rng(5).random((8, 8)))
        band = TransitionBand(np.ones((8, 8), bool), np.full((8, 8), 0.5))
        out = fuse(s, detail, band)
        assert_array_equal(out.values, detail.values)

    def test_mixed_assembly_matches_per_pixel_oracle(self):
        rng = np.random.default_rng(6)
        s = sem(rng.random((4, 4)))
        detail = AlphaMatte(rng.random((4, 4)))
        up = s.values  # same size, identity resize
        mask = rng.random((4, 4)) < 0.5
        mask |= (up > 0.05) & (up < 0.95)
        band = TransitionBand(mask, up)
        out = fuse(s, detail, band)
        for i in range(4):
            for j in range(4):
                if mask[i, j]:
                    assert out.values[i, j] == detail.values[i, j]
                else:
                    assert out.values[i, j] == (1.0 if up[i, j] >= 0.5 else 0.0)


class TestProcessFrame:
    def _scene(self):
        rng = np.random.default_rng(55)
        frame = Frame(rng.random((16, 16, 3)), index=1)
        return frame, init_state(4, 4)

    def test_stage_order_prior_before_update(self):
        # The semantic and detail stages must see the pre-update state.
        frame, state = self._scene()
        seen = []
        classical = make_classical_predictor()

        def spy_semantic(f4, st, prev=None):
            seen.append(("semantic", id(st)))
            return classical.semantic_fn(f4, st, prev)

        def spy_detail(f, s, st):
            seen.append(("detail", id(st)))
            return classical.detail_fn(f, s, st)

        spy = Predictor(spy_semantic, spy_detail, classical.fusion_fn)
        result = process_frame(frame, state, spy)
        assert seen == [("semantic", id(state)), ("detail", id(state))]
        assert result.state is not state

    def test_first_frame_marks_background_per_semantic(self):
        frame, state = self._scene()
        result = process_frame(frame, state, make_classical_predictor())
        # bootstrap 0 marks everything background on frame 1
        assert_array_equal(result.state.restored, np.ones((4, 4)))
        assert_array_equal(result.state.content, downsample4x(frame).pixels)

    def test_matte_range_and_shape(self):
        frame, state = self._scene()
        result = process_frame(frame, state, make_classical_predictor())
        assert result.matte.values.shape == (16, 16)
        assert result.matte.values.min() >= 0.0
        assert result.matte.values.max() <= 1.0

    def test_state_dim_mismatch_rejected(self):
        frame, _ = self._scene()
        with pytest.raises(ValueError, match="state shape"):
            process_frame(frame, init_state(5, 5), make_classical_predictor())

    def test_deterministic(self):
        frame, state = self._scene()
        p = make_classical_predictor()
        a = process_frame(frame, state, p)
        b = process_frame(frame, state, p)
        assert_array_equal(a.matte.values, b.matte.values)
        assert_array_equal(a.state.content, b.state.content)


class TestPredictorRegistry:
    def test_classical_registered(self):
        assert "classical" in available_predictors()
        p = create_predictor("classical")
        assert isinstance(p, Predictor)

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError, match="unknown predictor"):
            create_predictor("does-not-exist")

    def test_registration_roundtrip(self):
        marker = make_classical_predictor()
        register_predictor("test-dummy", lambda cfg: marker)
        try:
            assert create_predictor("test-dummy") is marker
        finally:
            from bgmatte.matting import _PREDICTOR_FACTORIES

            _PREDICTOR_FACTORIES.pop("test-dummy")

    def test_bad_registration_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            register_predictor("", lambda cfg: None)
        with pytest.raises(ValueError, match="callable"):
            register_predictor("x", None)
