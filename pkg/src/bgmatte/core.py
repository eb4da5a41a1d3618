"""Core value types and resampling primitives.

Images are numpy float64 arrays in [0, 1].  Color frames have shape
(height, width, 3); mattes and semantic maps have shape (height, width).
The wrapper types below validate on construction and freeze their arrays,
so downstream code can rely on the invariants without re-checking.

All coordinate mapping in this package uses the half-pixel-center
convention: pixel (i, j) covers the unit square centered at
(i + 0.5, j + 0.5).  ``resize_bilinear`` and ``sample_bilinear`` are the
only interpolation kernels; every resampling step routes through them so
that coarse/full coordinate frames stay mutually consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Frame",
    "AlphaMatte",
    "SemanticMap",
    "VideoSequence",
    "block_reduce4",
    "downsample4x",
    "upsample",
    "resize_bilinear",
    "sample_bilinear",
]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _checked_image(values, ndim: int, name: str) -> np.ndarray:
    """Copy ``values`` to a read-only float64 array and validate it.

    Parameters
    ----------
    values : array_like
        Pixel data, shape (h, w) for ``ndim == 2`` or (h, w, 3) for
        ``ndim == 3``.
    ndim : int
        Required dimensionality.
    name : str
        Label used in error messages.

    Returns
    -------
    numpy.ndarray
        C-contiguous, read-only float64 array.
    """
    arr = np.array(values, dtype=np.float64, order="C")
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if ndim == 3 and arr.shape[2] != 3:
        raise ValueError(f"{name} must have 3 channels, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    lo = arr.min()
    hi = arr.max()
    if lo < 0.0 or hi > 1.0:
        raise ValueError(f"{name} values must lie in [0, 1], got range [{lo}, {hi}]")
    return _freeze(arr)


@dataclass(frozen=True, eq=False)
class Frame:
    """A single RGB video frame.

    Parameters
    ----------
    pixels : array_like
        Shape (height, width, 3), values in [0, 1].
    index : int, optional
        1-based position within a sequence; 0 means unattached.
    """

    pixels: np.ndarray
    index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pixels", _checked_image(self.pixels, 3, "pixels"))
        if self.index < 0:
            raise ValueError(f"frame index must be >= 0, got {self.index}")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True, eq=False)
class AlphaMatte:
    """A single-channel opacity map in [0, 1].

    ``resolution_tag`` records which coordinate frame the matte lives in:
    ``"full"`` for the input frame resolution, ``"coarse"`` for the
    4x-downsampled working resolution.  The tag is bookkeeping only; it
    does not change any computation.
    """

    values: np.ndarray
    resolution_tag: str = "full"

    def __post_init__(self):
        object.__setattr__(self, "values", _checked_image(self.values, 2, "values"))
        if self.resolution_tag not in ("coarse", "full"):
            raise ValueError(
                f"resolution_tag must be 'coarse' or 'full', got {self.resolution_tag!r}"
            )

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class SemanticMap:
    """Coarse foreground probability map, one value per coarse pixel."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _checked_image(self.values, 2, "values"))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _as_frame_tuple(frames, name: str) -> tuple:
    frames = tuple(frames)
    if not frames:
        raise ValueError(f"{name} must contain at least one element")
    return frames


@dataclass(frozen=True, eq=False)
class VideoSequence:
    """An ordered clip of frames with optional per-frame ground truth.

    Frame indices must run 1..N in order.  When ground-truth channels are
    present they must match the clip length; ``alphas`` holds full
    resolution mattes, ``backgrounds`` and ``foregrounds`` hold clean
    plates at frame resolution.
    """

    frames: tuple
    alphas: tuple | None = None
    backgrounds: tuple | None = None
    foregrounds: tuple | None = None

    def __post_init__(self):
        frames = _as_frame_tuple(self.frames, "frames")
        object.__setattr__(self, "frames", frames)
        h, w = frames[0].height, frames[0].width
        for t, frame in enumerate(frames, start=1):
            if frame.index != t:
                raise ValueError(
                    f"frame indices must run 1..{len(frames)}, position {t} has index {frame.index}"
                )
            if (frame.height, frame.width) != (h, w):
                raise ValueError("all frames must share one resolution")
        for attr in ("alphas", "backgrounds", "foregrounds"):
            chan = getattr(self, attr)
            if chan is None:
                continue
            chan = tuple(chan)
            object.__setattr__(self, attr, chan)
            if len(chan) != len(frames):
                raise ValueError(f"{attr} length {len(chan)} != clip length {len(frames)}")
            for item in chan:
                ih, iw = (item.height, item.width)
                if (ih, iw) != (h, w):
                    raise ValueError(f"{attr} resolution {(ih, iw)} != frame resolution {(h, w)}")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def width(self) -> int:
        return self.frames[0].width


def downsample4x(frame: Frame) -> Frame:
    """Reduce a frame to quarter resolution by 4x4 block averaging.

    Each output pixel is the exact mean of a 4x4 input block, so a
    constant region stays bit-identical and the global mean is conserved
    up to float rounding.  Trailing rows/columns that do not fill a full
    block are dropped.

    Parameters
    ----------
    frame : Frame
        Input frame with height and width of at least 4.

    Returns
    -------
    Frame
        Block-averaged frame of shape (h // 4, w // 4, 3), same index.
    """
    return Frame(block_reduce4(frame.pixels), index=frame.index)


def block_reduce4(values: np.ndarray) -> np.ndarray:
    """4x4 block average of a raw (h, w) or (h, w, c) array.

    Array-level kernel behind :func:`downsample4x`, exposed so that
    single-channel fields (alpha, semantic) can be reduced to the coarse
    grid with identical numerics.
    """
    v = np.asarray(values, dtype=np.float64)
    h, w = v.shape[:2]
    if h < 4 or w < 4:
        raise ValueError(f"frame too small to downsample, got {h}x{w}")
    h4, w4 = h // 4, w // 4
    out = v[: h4 * 4, : w4 * 4]
    # Pairwise halving keeps the sum of a constant block exact (x + x is
    # exact in binary floating point), so constant regions survive bit
    # for bit.  A straight .mean() would not guarantee that.
    for _ in range(2):
        out = out[0::2] + out[1::2]
    for _ in range(2):
        out = out[:, 0::2] + out[:, 1::2]
    return out / 16.0


def sample_bilinear(values: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Bilinearly sample an image at fractional index coordinates.

    Coordinates are array indices (pixel centers at integers), already in
    the half-pixel-center frame used throughout the package.  Out-of-range
    coordinates clamp to the edge pixels.  Interpolation uses the lerp
    form ``a + (b - a) * t``, so integer coordinates return stored pixel
    values exactly.

    Parameters
    ----------
    values : numpy.ndarray
        Source image, shape (h, w) or (h, w, c).
    rows, cols : numpy.ndarray
        Broadcastable arrays of fractional row/column indices.

    Returns
    -------
    numpy.ndarray
        Sampled values with the broadcast coordinate shape (plus the
        channel axis for 3-d input).
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim not in (2, 3):
        raise ValueError(f"values must be 2-d or 3-d, got shape {v.shape}")
    in_h, in_w = v.shape[:2]
    rows, cols = np.broadcast_arrays(np.asarray(rows, dtype=np.float64), np.asarray(cols, dtype=np.float64))

    r0 = np.floor(rows)
    c0 = np.floor(cols)
    fr = rows - r0
    fc = cols - c0
    r0 = r0.astype(np.intp)
    c0 = c0.astype(np.intp)
    r0c = np.clip(r0, 0, in_h - 1)
    r1c = np.clip(r0 + 1, 0, in_h - 1)
    c0c = np.clip(c0, 0, in_w - 1)
    c1c = np.clip(c0 + 1, 0, in_w - 1)

    if v.ndim == 3:
        fr = fr[..., None]
        fc = fc[..., None]

    v00 = v[r0c, c0c]
    v01 = v[r0c, c1c]
    v10 = v[r1c, c0c]
    v11 = v[r1c, c1c]
    top = v00 + (v01 - v00) * fc
    bottom = v10 + (v11 - v10) * fc
    return top + (bottom - top) * fr


def resize_bilinear(values: np.ndarray, out_height: int, out_width: int) -> np.ndarray:
    """Resize an image with bilinear interpolation, half-pixel centers.

    Output pixel (i, j) samples the source at
    ``((i + 0.5) * h_in / h_out - 0.5, (j + 0.5) * w_in / w_out - 0.5)``,
    which keeps the image content aligned under any scale ratio and makes
    a round trip at identical size an exact copy.

    Parameters
    ----------
    values : numpy.ndarray
        Source image, shape (h, w) or (h, w, c).
    out_height, out_width : int
        Target dimensions, both >= 1.

    Returns
    -------
    numpy.ndarray
        Resized float64 image.
    """
    if out_height < 1 or out_width < 1:
        raise ValueError(f"target size must be positive, got {out_height}x{out_width}")
    v = np.asarray(values, dtype=np.float64)
    if v.ndim not in (2, 3):
        raise ValueError(f"values must be 2-d or 3-d, got shape {v.shape}")
    in_h, in_w = v.shape[:2]
    rows = (np.arange(out_height, dtype=np.float64) + 0.5) * (in_h / out_height) - 0.5
    cols = (np.arange(out_width, dtype=np.float64) + 0.5) * (in_w / out_width) - 0.5
    # The sample grid is an outer product of 1-d coordinates, so the
    # two lerps separate into a column pass over source rows and a row
    # pass over the result.  Each output pixel sees exactly the same
    # operands and operation order as sample_bilinear on the full mesh,
    # so the result is bit-identical while the gathers stay axis-aligned.
    r0 = np.floor(rows)
    c0 = np.floor(cols)
    fr = rows - r0
    fc = cols - c0
    r0 = r0.astype(np.intp)
    c0 = c0.astype(np.intp)
    r0c = np.clip(r0, 0, in_h - 1)
    r1c = np.clip(r0 + 1, 0, in_h - 1)
    c0c = np.clip(c0, 0, in_w - 1)
    c1c = np.clip(c0 + 1, 0, in_w - 1)
    if v.ndim == 3:
        fc = fc[None, :, None]
        fr = fr[:, None, None]
    else:
        fc = fc[None, :]
        fr = fr[:, None]
    left = np.take(v, c0c, axis=1)
    right = np.take(v, c1c, axis=1)
    tmp = left + (right - left) * fc
    top = np.take(tmp, r0c, axis=0)
    bottom = np.take(tmp, r1c, axis=0)
    return top + (bottom - top) * fr


def upsample(matte: AlphaMatte, target_w: int, target_h: int) -> AlphaMatte:
    """Upsample a matte to full resolution.

    Parameters
    ----------
    matte : AlphaMatte
        Source matte.
    target_w, target_h : int
        Target size; must not shrink either axis.

    Returns
    -------
    AlphaMatte
        Bilinearly interpolated matte tagged ``"full"``, values clamped
        to [0, 1].
    """
    if target_h < matte.height or target_w < matte.width:
        raise ValueError(
            f"upsample target {target_w}x{target_h} smaller than source "
            f"{matte.width}x{matte.height}"
        )
    out = np.clip(resize_bilinear(matte.values, target_h, target_w), 0.0, 1.0)
    return AlphaMatte(out, resolution_tag="full")
