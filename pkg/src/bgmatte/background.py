"""Incremental background restoration from a video stream.

The engine keeps a per-pixel pair (content, restored) at the coarse
working resolution: ``content`` accumulates background color and
``restored`` marks pixels whose background has been observed at least
once.  Each frame contributes an observation masked by the semantic
foreground probability; pixels seen as background for the first time are
copied in, pixels seen again are blended 50/50 with the stored value so
the model tracks slow background change.

The update rule is deliberately branch-free arithmetic over {0, 1}
masks in float64.  Given the previous mask m, semantic s and observation
o, with ``b = (1 - s) > 0.5`` the background condition:

    new      = (m == 0) and b
    again    = (m == 1) and b
    tmp      = content + new * o
    content' = (1 - again) * tmp + again * (tmp + o) / 2
    m'       = m + new

Every operation above is an exact IEEE-754 step with no reductions, so
the vectorized implementation is bit-identical to a per-pixel scalar
evaluation; tests rely on that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Frame, SemanticMap, resize_bilinear

__all__ = [
    "BackgroundState",
    "UpdateTrace",
    "RenderedBackground",
    "init_state",
    "extract_bg_info",
    "update",
    "render_background",
    "upsampled_background",
]


def _checked_mask(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, order="C")
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not ((arr == 0.0) | (arr == 1.0)).all():
        raise ValueError(f"{name} values must be exactly 0 or 1")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BackgroundState:
    """Restored-background accumulator at the coarse resolution.

    ``content`` is an (h, w, 3) float64 field holding accumulated
    background color; ``restored`` is an (h, w) float64 mask in {0, 1}
    marking pixels whose background has been observed.  Content is only
    required to be finite: a mid-stream state may hold values outside
    [0, 1] if fed corrupted observations, and rendering clamps.
    """

    content: np.ndarray
    restored: np.ndarray

    def __post_init__(self):
        content = np.array(self.content, dtype=np.float64, order="C")
        if content.ndim != 3 or content.shape[2] != 3:
            raise ValueError(f"content must have shape (h, w, 3), got {content.shape}")
        if not np.isfinite(content).all():
            raise ValueError("content contains non-finite values")
        content.setflags(write=False)
        object.__setattr__(self, "content", content)
        restored = _checked_mask(self.restored, "restored")
        if restored.shape != content.shape[:2]:
            raise ValueError(
                f"restored shape {restored.shape} != content shape {content.shape[:2]}"
            )
        object.__setattr__(self, "restored", restored)

    @property
    def height(self) -> int:
        return self.restored.shape[0]

    @property
    def width(self) -> int:
        return self.restored.shape[1]


@dataclass(frozen=True, eq=False)
class UpdateTrace:
    """Per-step masks: pixels restored for the first time vs refreshed."""

    newly_restored: np.ndarray
    averaged: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "newly_restored", _checked_mask(self.newly_restored, "newly_restored")
        )
        object.__setattr__(self, "averaged", _checked_mask(self.averaged, "averaged"))
        if self.newly_restored.shape != self.averaged.shape:
            raise ValueError("trace masks must share one shape")
        if (self.newly_restored * self.averaged).any():
            raise ValueError("newly_restored and averaged must be disjoint")


@dataclass(frozen=True, eq=False)
class RenderedBackground:
    """Displayable view of a state: clamped RGB frame plus the mask."""

    frame: Frame
    restored: np.ndarray
    clamped: bool


def init_state(width: int, height: int) -> BackgroundState:
    """Empty state: nothing restored, black content.

    Parameters
    ----------
    width, height : int
        Coarse working resolution, both >= 1.
    """
    if width < 1 or height < 1:
        raise ValueError(f"state dims must be >= 1, got {width}x{height}")
    return BackgroundState(
        content=np.zeros((height, width, 3)), restored=np.zeros((height, width))
    )


def _check_dims(state: BackgroundState, shape, what: str):
    if shape != (state.height, state.width):
        raise ValueError(f"{what} shape {shape} != state shape {(state.height, state.width)}")


def extract_bg_info(frame_4x: Frame, s_p: SemanticMap) -> np.ndarray:
    """Mask a coarse frame down to its likely-background content.

    Per pixel and channel the observation is ``(1 - s) * color``: fully
    foreground pixels contribute nothing, fully background pixels pass
    through unchanged, and partial confidence attenuates.

    Parameters
    ----------
    frame_4x : Frame
        Coarse frame (already downsampled 4x).
    s_p : SemanticMap
        Foreground probability at the same resolution.

    Returns
    -------
    numpy.ndarray
        (h, w, 3) observation field.
    """
    if (frame_4x.height, frame_4x.width) != (s_p.height, s_p.width):
        raise ValueError(
            f"frame shape {(frame_4x.height, frame_4x.width)} != "
            f"semantic shape {(s_p.height, s_p.width)}"
        )
    return (1.0 - s_p.values)[:, :, None] * frame_4x.pixels


def update(
    state: BackgroundState, bg_info: np.ndarray, s_p: SemanticMap
) -> tuple[BackgroundState, UpdateTrace]:
    """Advance the state by one frame's observation.

    A pixel qualifies as background this step when ``(1 - s) > 0.5``
    holds strictly; s exactly 0.5 does not qualify.  Qualifying pixels
    never seen before copy the observation in; qualifying pixels seen
    before average the stored content with the observation, which makes
    the stored value converge geometrically under a static background.

    Parameters
    ----------
    state : BackgroundState
        State before this frame.
    bg_info : numpy.ndarray
        (h, w, 3) observation from :func:`extract_bg_info`.
    s_p : SemanticMap
        The same semantic map used to build the observation.

    Returns
    -------
    (BackgroundState, UpdateTrace)
        Advanced state and the step's first-copy/averaged masks.
    """
    _check_dims(state, (s_p.height, s_p.width), "semantic")
    obs = np.asarray(bg_info, dtype=np.float64)
    if obs.shape != state.content.shape:
        raise ValueError(f"observation shape {obs.shape} != state shape {state.content.shape}")

    background = (1.0 - s_p.values) > 0.5
    mask = state.restored
    new = ((mask == 0.0) & background).astype(np.float64)
    again = ((mask == 1.0) & background).astype(np.float64)

    new3 = new[:, :, None]
    again3 = again[:, :, None]
    tmp = state.content + new3 * obs
    content = (1.0 - again3) * tmp + again3 * ((tmp + obs) / 2.0)
    restored = mask + new

    return (
        BackgroundState(content=content, restored=restored),
        UpdateTrace(newly_restored=new, averaged=again),
    )


def render_background(state: BackgroundState) -> RenderedBackground:
    """Expose the state as a displayable frame.

    Unrestored pixels render black; content outside [0, 1] (possible
    only via corrupted observations) clamps and raises the ``clamped``
    flag instead of failing.
    """
    content = state.content
    clamped = bool((content < 0.0).any() or (content > 1.0).any())
    pixels = np.clip(content, 0.0, 1.0) * state.restored[:, :, None]
    return RenderedBackground(frame=Frame(pixels), restored=state.restored > 0.0, clamped=clamped)


def upsampled_background(state: BackgroundState, target_w: int, target_h: int) -> Frame:
    """Render the state and resize it to frame resolution.

    The rendered coarse background (unrestored pixels black) is
    bilinearly interpolated with the shared half-pixel-center kernel.
    """
    rendered = render_background(state)
    out = np.clip(resize_bilinear(rendered.frame.pixels, target_h, target_w), 0.0, 1.0)
    return Frame(out)
