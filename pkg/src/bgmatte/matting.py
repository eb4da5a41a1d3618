"""Per-frame matting pipeline built on the restored-background prior.

A frame is matted in three stages.  A semantic stage estimates coarse
foreground probability from the disagreement between the frame and the
restored background.  A detail stage solves for alpha inside a narrow
transition band around the semantic edges, projecting each pixel color
onto the line between an estimated foreground color and the restored
background color.  A fusion stage assembles the final matte: detail
values inside the band, hard semantic decisions outside.

The three stages are pluggable through :class:`Predictor` so learned
replacements can be registered by name; the classical implementations
here are the reference predictors and the only built-in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import ndimage
from scipy.special import expit

from .background import BackgroundState, extract_bg_info, update, upsampled_background
from .background import UpdateTrace
from .core import AlphaMatte, Frame, SemanticMap, downsample4x, resize_bilinear

__all__ = [
    "TransitionBand",
    "DetailResult",
    "Predictor",
    "FrameResult",
    "band_from_alpha",
    "build_band",
    "semantic_estimate",
    "solve_alpha",
    "solve_detail_field",
    "detail_solve",
    "fuse",
    "process_frame",
    "make_classical_predictor",
    "register_predictor",
    "create_predictor",
    "available_predictors",
]


@dataclass(frozen=True, eq=False)
class TransitionBand:
    """Pixels whose alpha is genuinely fractional, plus a safety margin.

    ``mask`` marks the band at full resolution; ``semantic_alpha`` is the
    full-resolution semantic field the band was derived from.  The mask
    is always a superset of the strictly-inside pixels
    (``lo < semantic_alpha < hi``); construction adds a dilation margin.
    """

    mask: np.ndarray
    semantic_alpha: np.ndarray
    lo: float = 0.05
    hi: float = 0.95

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        sem = np.array(self.semantic_alpha, dtype=np.float64, order="C")
        if mask.shape != sem.shape or mask.ndim != 2:
            raise ValueError(
                f"mask shape {mask.shape} incompatible with semantic shape {sem.shape}"
            )
        if sem.min() < 0.0 or sem.max() > 1.0:
            raise ValueError("semantic_alpha values must lie in [0, 1]")
        if not (0.0 <= self.lo < self.hi <= 1.0):
            raise ValueError(f"thresholds must satisfy 0 <= lo < hi <= 1, got {self.lo}, {self.hi}")
        inner = (sem > self.lo) & (sem < self.hi)
        if (inner & ~mask).any():
            raise ValueError("mask must cover every pixel strictly inside the thresholds")
        mask = mask.copy()
        mask.setflags(write=False)
        sem.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "semantic_alpha", sem)

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def width(self) -> int:
        return self.mask.shape[1]


def band_from_alpha(
    semantic_alpha: np.ndarray, lo: float = 0.05, hi: float = 0.95, radius: int = 2
) -> TransitionBand:
    """Build a transition band from a full-resolution semantic field.

    The band is the set of pixels with ``lo < value < hi``, dilated by a
    square structuring element of side ``2 * radius + 1``.
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    sem = np.asarray(semantic_alpha, dtype=np.float64)
    inner = (sem > lo) & (sem < hi)
    if radius > 0 and inner.any():
        structure = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
        mask = ndimage.binary_dilation(inner, structure=structure)
    else:
        mask = inner
    return TransitionBand(mask=mask, semantic_alpha=sem, lo=lo, hi=hi)


def build_band(
    semantic: SemanticMap,
    target_w: int,
    target_h: int,
    lo: float = 0.05,
    hi: float = 0.95,
    radius: int = 2,
) -> TransitionBand:
    """Upsample a coarse semantic map and band it at full resolution."""
    up = np.clip(resize_bilinear(semantic.values, target_h, target_w), 0.0, 1.0)
    return band_from_alpha(up, lo=lo, hi=hi, radius=radius)


def semantic_estimate(
    frame_4x: Frame,
    state: BackgroundState,
    prev_semantic: Optional[SemanticMap] = None,
    *,
    theta: float = 0.1,
    sigma: float = 0.02,
    bootstrap: float = 0.5,
) -> SemanticMap:
    """Foreground probability from disagreement with the restored background.

    Where the background is restored, the per-pixel evidence is the
    channel-mean absolute difference ``d`` between the coarse frame and
    the stored background content, squashed through a logistic:
    ``s = expit((d - theta) / sigma)``.  Where the background is still
    unknown there is no evidence; those pixels take the previous frame's
    estimate, or ``bootstrap`` when none exists.

    Parameters
    ----------
    frame_4x : Frame
        Coarse frame at the state resolution.
    state : BackgroundState
        Prior state (from before this frame).
    prev_semantic : SemanticMap, optional
        Previous frame's estimate, used only where unrestored.
    theta : float
        Difference level mapped to probability 0.5.
    sigma : float
        Softness of the decision; smaller is harder.
    bootstrap : float
        Fill-in value on the first frame.  The neutral 0.5 makes no
        claim, but note it also never satisfies the strict background
        condition, so a pipeline that feeds this estimate back into
        restoration would never restore anything; pipeline wiring uses 0
        (assume unoccluded) instead.  See
        :func:`make_classical_predictor`.

    Returns
    -------
    SemanticMap
    """
    if sigma <= 0.0 or theta < 0.0:
        raise ValueError(f"need theta >= 0 and sigma > 0, got {theta}, {sigma}")
    if not 0.0 <= bootstrap <= 1.0:
        raise ValueError(f"bootstrap must lie in [0, 1], got {bootstrap}")
    if (frame_4x.height, frame_4x.width) != (state.height, state.width):
        raise ValueError(
            f"frame shape {(frame_4x.height, frame_4x.width)} != "
            f"state shape {(state.height, state.width)}"
        )
    diff = np.abs(frame_4x.pixels - state.content).mean(axis=2)
    scored = expit((diff - theta) / sigma)
    if prev_semantic is not None:
        if (prev_semantic.height, prev_semantic.width) != (state.height, state.width):
            raise ValueError("previous semantic map shape differs from state shape")
        fill = prev_semantic.values
    else:
        fill = np.full_like(scored, bootstrap)
    known = state.restored == 1.0
    return SemanticMap(np.where(known, scored, fill))


def solve_alpha(
    image: np.ndarray,
    foreground: np.ndarray,
    background: np.ndarray,
    delta: float = 1e-4,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel alpha from known foreground and background colors.

    Inverts the compositing relation ``I = a*F + (1-a)*B`` by projecting
    ``I - B`` onto ``F - B``:

        a = clamp( dot(I-B, F-B) / max(||F-B||^2, delta), 0, 1 )

    The ``delta`` floor guards the division where foreground and
    background colors coincide; such pixels are reported in the
    degenerate mask rather than silently trusted.

    Parameters
    ----------
    image, foreground, background : numpy.ndarray
        Broadcast-compatible (..., 3) color arrays.
    delta : float
        Denominator floor, > 0.

    Returns
    -------
    (alpha, degenerate)
        ``alpha`` has the broadcast shape minus the channel axis and lies
        in [0, 1]; ``degenerate`` is True where ``||F-B||^2 < delta``.
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be > 0, got {delta}")
    img = np.asarray(image, dtype=np.float64)
    fg = np.asarray(foreground, dtype=np.float64)
    bg = np.asarray(background, dtype=np.float64)
    axis_diff = fg - bg
    denom = (axis_diff * axis_diff).sum(axis=-1)
    numer = ((img - bg) * axis_diff).sum(axis=-1)
    alpha = np.clip(numer / np.maximum(denom, delta), 0.0, 1.0)
    return alpha, denom < delta


@lru_cache(maxsize=65536)
def _ring_offsets(d2: int) -> tuple[tuple[int, int], ...]:
    """All integer offsets (dr, dc) with dr^2 + dc^2 == d2, sorted.

    Ascending (dr, dc) order; for a fixed query pixel that is exactly
    row-major order of the offset targets.
    """
    radius = math.isqrt(d2)
    offsets = []
    for dr in range(-radius, radius + 1):
        rem = d2 - dr * dr
        dc = math.isqrt(rem)
        if dc * dc == rem:
            if dc == 0:
                offsets.append((dr, 0))
            else:
                offsets.append((dr, -dc))
                offsets.append((dr, dc))
    return tuple(sorted(offsets))


def _nearest_feature_indices(
    feature: np.ndarray, query_r: np.ndarray, query_c: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """For each query pixel, the nearest True pixel of ``feature``.

    Nearest by squared Euclidean pixel distance; ties broken by smallest
    row, then smallest column (row-major order), making the result
    independent of evaluation order.  ``feature`` must contain at least
    one True pixel.

    A distance transform gives every query its exact nearest squared
    distance; the matching feature pixel is then found by probing only
    the offsets on that distance ring, in row-major order, so the first
    hit is the tie-broken minimum.  Squared distances are integers well
    inside float64's exact range, so the round trip through the float
    transform is lossless.
    """
    h, w = feature.shape
    n = query_r.size
    out_r = np.empty(n, dtype=np.intp)
    out_c = np.empty(n, dtype=np.intp)
    if not n:
        return out_r, out_c
    distance = ndimage.distance_transform_edt(~feature)
    d2_all = np.rint(np.square(distance[query_r, query_c])).astype(np.int64)
    values, inverse = np.unique(d2_all, return_inverse=True)
    for vi, value in enumerate(values):
        idx = np.nonzero(inverse == vi)[0]
        for dr, dc in _ring_offsets(int(value)):
            if not idx.size:
                break
            rr = query_r[idx] + dr
            cc = query_c[idx] + dc
            ok = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
            hit = np.zeros(idx.size, dtype=bool)
            inside = np.nonzero(ok)[0]
            hit[inside] = feature[rr[inside], cc[inside]]
            found = idx[hit]
            out_r[found] = query_r[found] + dr
            out_c[found] = query_c[found] + dc
            idx = idx[~hit]
        if idx.size:
            raise AssertionError("no feature pixel on the computed distance ring")
    return out_r, out_c


@dataclass(frozen=True, eq=False)
class DetailResult:
    """Band-limited alpha solve output with quality flags.

    ``used_semantic_fallback`` is True when no confident foreground pixel
    existed and the band simply carries the semantic values.
    ``degenerate`` marks band pixels whose foreground/background colors
    nearly coincide (denominator floored); their alpha is a guess.
    """

    matte: AlphaMatte
    used_semantic_fallback: bool
    degenerate: np.ndarray


def solve_detail_field(
    image: np.ndarray,
    background: np.ndarray,
    semantic_alpha: np.ndarray,
    mask: np.ndarray,
    fg_threshold: float = 0.95,
    delta: float = 1e-4,
) -> tuple[np.ndarray, bool, np.ndarray]:
    """Array-level detail solve shared by the frame and patch paths.

    Outside ``mask`` the output is the hard semantic decision
    (``semantic_alpha >= 0.5``).  Inside, each pixel's foreground color
    is taken from the nearest pixel with ``semantic_alpha >=
    fg_threshold`` and alpha is solved by :func:`solve_alpha` against the
    supplied background.  Returns ``(alpha_field, used_fallback,
    degenerate_mask)``.
    """
    sem = np.asarray(semantic_alpha, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    out = np.where(sem >= 0.5, 1.0, 0.0)
    degenerate = np.zeros(mask.shape, dtype=bool)
    used_fallback = False
    if mask.any():
        confident = sem >= fg_threshold
        if not confident.any():
            out = np.where(mask, sem, out)
            used_fallback = True
        else:
            qr, qc = np.nonzero(mask)
            fr, fc = _nearest_feature_indices(confident, qr, qc)
            img = np.asarray(image, dtype=np.float64)
            bg = np.asarray(background, dtype=np.float64)
            alpha, degen = solve_alpha(img[qr, qc], img[fr, fc], bg[qr, qc], delta=delta)
            out[qr, qc] = alpha
            degenerate[qr, qc] = degen
    return out, used_fallback, degenerate


def detail_solve(
    frame: Frame,
    band: TransitionBand,
    bg_full: Frame,
    *,
    fg_threshold: float = 0.95,
    delta: float = 1e-4,
) -> DetailResult:
    """Solve alpha inside the transition band against a known background.

    Parameters
    ----------
    frame : Frame
        Full-resolution input frame.
    band : TransitionBand
        Band and semantic field at frame resolution.
    bg_full : Frame
        Restored background upsampled to frame resolution.
    fg_threshold : float
        Semantic level above which a pixel's color is trusted as pure
        foreground (source for nearest-foreground sampling).
    delta : float
        Denominator floor for :func:`solve_alpha`.

    Returns
    -------
    DetailResult
        Full-resolution matte (hard semantic outside the band), fallback
        flag, and per-pixel degeneracy mask.
    """
    if not 0.0 < fg_threshold <= 1.0:
        raise ValueError(f"fg_threshold must lie in (0, 1], got {fg_threshold}")
    shape = (frame.height, frame.width)
    if (band.height, band.width) != shape:
        raise ValueError(f"band shape {(band.height, band.width)} != frame shape {shape}")
    if (bg_full.height, bg_full.width) != shape:
        raise ValueError(f"background shape {(bg_full.height, bg_full.width)} != frame shape {shape}")
    out, used_fallback, degenerate = solve_detail_field(
        frame.pixels, bg_full.pixels, band.semantic_alpha, band.mask,
        fg_threshold=fg_threshold, delta=delta,
    )
    return DetailResult(
        matte=AlphaMatte(out, resolution_tag="full"),
        used_semantic_fallback=used_fallback,
        degenerate=degenerate,
    )


def fuse(s_p: SemanticMap, detail: AlphaMatte, band: TransitionBand) -> AlphaMatte:
    """Assemble the final matte from the semantic and detail branches.

    Inside the band the detail solve wins; outside, the upsampled
    semantic map is hard-thresholded at 0.5.
    """
    shape = (detail.height, detail.width)
    if (band.height, band.width) != shape:
        raise ValueError(f"band shape {(band.height, band.width)} != detail shape {shape}")
    up = np.clip(resize_bilinear(s_p.values, detail.height, detail.width), 0.0, 1.0)
    hard = np.where(up >= 0.5, 1.0, 0.0)
    return AlphaMatte(np.where(band.mask, detail.values, hard), resolution_tag="full")


@dataclass(frozen=True, eq=False)
class Predictor:
    """The three pluggable pipeline stages.

    ``semantic_fn(frame_4x, state, prev_semantic) -> SemanticMap`` where
    ``prev_semantic`` is the previous frame's map or None on frame 1;
    ``detail_fn(frame, semantic, state) -> AlphaMatte`` at full
    resolution; ``fusion_fn(semantic, detail) -> AlphaMatte``.  Each
    function must be pure: equal inputs give equal outputs, with no
    hidden per-call state.
    """

    semantic_fn: Callable[[Frame, BackgroundState, Optional[SemanticMap]], SemanticMap]
    detail_fn: Callable[[Frame, SemanticMap, BackgroundState], AlphaMatte]
    fusion_fn: Callable[[SemanticMap, AlphaMatte], AlphaMatte]


@dataclass(frozen=True, eq=False)
class FrameResult:
    """One pipeline step: the matte plus everything the next step needs."""

    matte: AlphaMatte
    state: BackgroundState
    semantic: SemanticMap
    trace: UpdateTrace


def process_frame(
    frame: Frame,
    state: BackgroundState,
    predictor: Predictor,
    prev_semantic: Optional[SemanticMap] = None,
) -> FrameResult:
    """Run one frame through the pipeline and advance the background.

    Stage order matters: the semantic and detail stages read the prior
    state (the background restored from frames 1..t-1), and only after
    fusion does this frame's observation update the state.  The returned
    ``semantic`` should be passed as ``prev_semantic`` on the next call.

    Parameters
    ----------
    frame : Frame
        Input frame; its 4x-reduced size must equal the state size.
    state : BackgroundState
        State after the previous frame.
    predictor : Predictor
        Stage implementations.
    prev_semantic : SemanticMap, optional
        Previous frame's semantic map (None on frame 1).

    Returns
    -------
    FrameResult
        Fused full-resolution matte, advanced state, this frame's
        semantic map, and the restoration trace.
    """
    frame_4x = downsample4x(frame)
    if (frame_4x.height, frame_4x.width) != (state.height, state.width):
        raise ValueError(
            f"state shape {(state.height, state.width)} != coarse frame shape "
            f"{(frame_4x.height, frame_4x.width)}"
        )
    s_p = predictor.semantic_fn(frame_4x, state, prev_semantic)
    detail = predictor.detail_fn(frame, s_p, state)
    matte = predictor.fusion_fn(s_p, detail)
    observation = extract_bg_info(frame_4x, s_p)
    next_state, trace = update(state, observation, s_p)
    return FrameResult(matte=matte, state=next_state, semantic=s_p, trace=trace)


def make_classical_predictor(
    *,
    theta: float = 0.1,
    sigma: float = 0.02,
    bootstrap: float = 0.0,
    band_lo: float = 0.05,
    band_hi: float = 0.95,
    band_radius: int = 2,
    fg_threshold: float = 0.95,
    delta: float = 1e-4,
) -> Predictor:
    """Reference predictor wiring the classical stages together.

    Note the ``bootstrap`` default differs from
    :func:`semantic_estimate`: a closed-loop pipeline must assume the
    first frame is unoccluded (bootstrap 0) or the strict background
    condition never fires and nothing is ever restored.  Supply 0.5 if a
    separate semantic source will seed restoration instead.
    """
    def semantic_fn(frame_4x, state, prev_semantic=None):
        return semantic_estimate(
            frame_4x, state, prev_semantic, theta=theta, sigma=sigma, bootstrap=bootstrap
        )

    def detail_fn(frame, s_p, state):
        band = build_band(s_p, frame.width, frame.height, lo=band_lo, hi=band_hi, radius=band_radius)
        bg_full = upsampled_background(state, frame.width, frame.height)
        return detail_solve(frame, band, bg_full, fg_threshold=fg_threshold, delta=delta).matte

    def fusion_fn(s_p, detail):
        band = build_band(s_p, detail.width, detail.height, lo=band_lo, hi=band_hi, radius=band_radius)
        return fuse(s_p, detail, band)

    return Predictor(semantic_fn=semantic_fn, detail_fn=detail_fn, fusion_fn=fusion_fn)


_PREDICTOR_FACTORIES: dict[str, Callable] = {}


def register_predictor(name: str, factory: Callable) -> None:
    """Register a predictor factory under a config-selectable name.

    ``factory(config) -> Predictor`` receives the pipeline configuration
    object.  Registering an existing name replaces it.
    """
    if not name:
        raise ValueError("predictor name must be non-empty")
    if not callable(factory):
        raise ValueError("factory must be callable")
    _PREDICTOR_FACTORIES[name] = factory


def available_predictors() -> tuple[str, ...]:
    return tuple(sorted(_PREDICTOR_FACTORIES))


def create_predictor(name: str, config=None) -> Predictor:
    """Instantiate a registered predictor by name."""
    try:
        factory = _PREDICTOR_FACTORIES[name]
    except KeyError:
        raise ValueError(
            f"unknown predictor {name!r}; available: {', '.join(available_predictors())}"
        ) from None
    return factory(config)


def _classical_factory(config) -> Predictor:
    if config is None:
        return make_classical_predictor()
    return make_classical_predictor(
        theta=config.semantic_theta,
        sigma=config.semantic_sigma,
        bootstrap=config.semantic_bootstrap,
        band_lo=config.band_lo,
        band_hi=config.band_hi,
        band_radius=config.band_radius,
        fg_threshold=config.detail_fg_threshold,
        delta=config.detail_delta,
    )


register_predictor("classical", _classical_factory)
