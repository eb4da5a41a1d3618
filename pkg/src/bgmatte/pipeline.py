"""Sequence-level drivers: matting and background restoration runs.

These tie the per-frame stages together in the order the engine
requires: each frame is matted against the background restored from the
frames before it, then its own observation is folded into the state.
Patch refinement re-solves only the scheduled patches of each coarse
result, and the optional temporal deflicker runs once over the finished
matte sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .background import BackgroundState, extract_bg_info, init_state, update, upsampled_background
from .config import PipelineConfig
from .core import AlphaMatte, SemanticMap, VideoSequence, downsample4x
from .matting import create_predictor, process_frame, semantic_estimate
from .metrics import ofd_filter
from .patches import PatchSchedule, build_grid, compute_flaw_map, refine, select_patches

__all__ = ["MattingRun", "RestorationRun", "run_matting", "run_restoration"]


@dataclass(frozen=True, eq=False)
class MattingRun:
    """Everything a matting pass produces.

    ``states[t-1]`` is the background state after folding frame t in;
    it is only populated when the run keeps per-frame states.
    """

    mattes: tuple
    semantics: tuple
    schedules: tuple
    state: BackgroundState
    states: Optional[tuple] = None


@dataclass(frozen=True, eq=False)
class RestorationRun:
    """Background restoration over a sequence (no matting)."""

    state: BackgroundState
    semantics: tuple
    states: Optional[tuple] = None


def _coarse_dims(sequence: VideoSequence) -> tuple[int, int]:
    if sequence.width % 4 or sequence.height % 4:
        raise ValueError(
            f"frame size {sequence.width}x{sequence.height} must be a multiple of 4"
        )
    return sequence.width // 4, sequence.height // 4


def run_matting(
    sequence: VideoSequence,
    config: Optional[PipelineConfig] = None,
    *,
    keep_states: bool = False,
    threads: Optional[int] = None,
) -> MattingRun:
    """Matte a whole sequence: coarse pipeline plus patch refinement.

    Frames are processed strictly in order; frame t's matte uses only
    the background accumulated from frames 1..t-1.  Each coarse matte
    is then patch-refined against the same prior background.  When the
    config enables the deflicker pass it runs over the refined mattes
    at the end.

    Parameters
    ----------
    sequence : VideoSequence
        Input frames; dimensions must be multiples of 4.
    config : PipelineConfig, optional
        Tunables; defaults throughout when omitted.
    keep_states : bool
        Also record the state after every frame (for state dumps).
    threads : int, optional
        Patch solver parallelism (None: BGMATTE_THREADS or automatic).

    Returns
    -------
    MattingRun
    """
    config = config or PipelineConfig()
    cw, ch = _coarse_dims(sequence)
    predictor = create_predictor(config.predictor, config)
    grid = build_grid(
        sequence.width, sequence.height, force_k=config.prm_force_k or None
    )
    state = init_state(cw, ch)
    prev_semantic = None
    mattes, semantics, schedules, states = [], [], [], []
    for frame in sequence.frames:
        prior = state
        result = process_frame(frame, state, predictor, prev_semantic)
        schedule = _schedule_for(result.matte, grid, config)
        refined = refine(
            frame,
            result.matte,
            schedule,
            upsampled_background(prior, frame.width, frame.height),
            halo=config.prm_halo,
            band_lo=config.band_lo,
            band_hi=config.band_hi,
            band_radius=config.band_radius,
            fg_threshold=config.detail_fg_threshold,
            delta=config.detail_delta,
            threads=threads,
        )
        mattes.append(refined)
        semantics.append(result.semantic)
        schedules.append(schedule)
        state = result.state
        prev_semantic = result.semantic
        if keep_states:
            states.append(state)
    if config.ofd_enabled:
        mattes = ofd_filter(mattes, config.ofd_close_tol, config.ofd_flicker_tol)
    return MattingRun(
        mattes=tuple(mattes),
        semantics=tuple(semantics),
        schedules=tuple(schedules),
        state=state,
        states=tuple(states) if keep_states else None,
    )


def _schedule_for(coarse: AlphaMatte, grid, config: PipelineConfig) -> PatchSchedule:
    flaws = compute_flaw_map(coarse, grid)
    return select_patches(flaws, threshold=config.prm_xi, cap_fraction=config.prm_cap)


def run_restoration(
    sequence: VideoSequence,
    config: Optional[PipelineConfig] = None,
    semantic_maps: Optional[Sequence[SemanticMap]] = None,
    *,
    keep_states: bool = False,
) -> RestorationRun:
    """Restore the background only, without solving any mattes.

    Semantic maps may be supplied (one per frame, at quarter
    resolution); otherwise the classical estimator produces them from
    the accumulating state exactly as the matting run would.

    Raises
    ------
    ValueError
        If the supplied maps mismatch the frame count or the quarter
        resolution grid.
    """
    config = config or PipelineConfig()
    cw, ch = _coarse_dims(sequence)
    if semantic_maps is not None and len(semantic_maps) != len(sequence):
        raise ValueError(
            f"got {len(semantic_maps)} semantic maps for {len(sequence)} frames"
        )
    state = init_state(cw, ch)
    prev_semantic = None
    semantics, states = [], []
    for i, frame in enumerate(sequence.frames):
        frame_4x = downsample4x(frame)
        if semantic_maps is not None:
            s_p = semantic_maps[i]
            if (s_p.height, s_p.width) != (ch, cw):
                raise ValueError(
                    f"semantic map {i + 1} is {s_p.width}x{s_p.height}, "
                    f"expected {cw}x{ch}"
                )
        else:
            s_p = semantic_estimate(
                frame_4x,
                state,
                prev_semantic,
                theta=config.semantic_theta,
                sigma=config.semantic_sigma,
                bootstrap=config.semantic_bootstrap,
            )
        state, _ = update(state, extract_bg_info(frame_4x, s_p), s_p)
        semantics.append(s_p)
        prev_semantic = s_p
        if keep_states:
            states.append(state)
    return RestorationRun(
        state=state,
        semantics=tuple(semantics),
        states=tuple(states) if keep_states else None,
    )
