"""PNG sequence I/O: frames, mattes, masks, and restoration state dumps.

Frames are 8-bit RGB mapped to [0, 1] by /255.  Mattes are written as
16-bit grayscale (value*65535, rounded half to even) so they can carry
tolerances far below one 8-bit step.  Restored-pixel masks are 8-bit
{0, 255}.  Sequences are named ``%06d.png`` counting from 000001 with
no gaps.  All writers go through a temp name and an atomic rename, so a
crash never leaves a half-written file behind.
"""

from __future__ import annotations

import os
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .background import BackgroundState, render_background
from .core import AlphaMatte, Frame, VideoSequence

__all__ = [
    "frame_name",
    "read_frame",
    "read_mask",
    "read_matte",
    "read_matte_sequence",
    "read_sequence",
    "write_frame",
    "write_mask",
    "write_matte",
    "write_state",
]

_SEQ_RE = re.compile(r"^(\d{6})\.png$")


def frame_name(index: int) -> str:
    """Canonical file name for a 1-based frame index."""
    if index < 1:
        raise ValueError(f"frame index must be >= 1, got {index}")
    return f"{index:06d}.png"


def _atomic_save(image: Image.Image, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.parent / f".tmp-{os.getpid()}-{path.name}"
    try:
        image.save(tmp, format="PNG")
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def write_frame(frame: Frame, path) -> None:
    """Write a frame as 8-bit RGB (values scaled by 255, half-even)."""
    data = np.rint(frame.pixels * 255.0).astype(np.uint8)
    _atomic_save(Image.fromarray(data), path)


def read_frame(path, index: int = 0) -> Frame:
    """Read an 8-bit RGB PNG into a [0, 1] frame.

    Raises
    ------
    ValueError
        If the image is not 8-bit RGB.
    """
    with Image.open(path) as img:
        if img.mode != "RGB":
            raise ValueError(f"{path}: expected an RGB image, got mode {img.mode!r}")
        data = np.asarray(img, dtype=np.float64)
    return Frame(data / 255.0, index=index)


def write_matte(matte: AlphaMatte, path) -> None:
    """Write a matte as 16-bit grayscale (value*65535, half-even)."""
    data = np.rint(matte.values * 65535.0).astype(np.uint16)
    _atomic_save(Image.fromarray(data), path)


def read_matte(path, resolution_tag: str = "full") -> AlphaMatte:
    """Read a grayscale PNG matte, 16-bit (/65535) or 8-bit (/255)."""
    with Image.open(path) as img:
        if img.mode in ("I;16", "I"):
            data = np.asarray(img, dtype=np.float64) / 65535.0
        elif img.mode == "L":
            data = np.asarray(img, dtype=np.float64) / 255.0
        else:
            raise ValueError(f"{path}: expected a grayscale matte, got mode {img.mode!r}")
    return AlphaMatte(data, resolution_tag=resolution_tag)


def write_mask(mask: np.ndarray, path) -> None:
    """Write a binary mask as 8-bit {0, 255}."""
    data = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    _atomic_save(Image.fromarray(data), path)


def read_mask(path) -> np.ndarray:
    """Read a {0, 255} mask back to boolean; other values are an error."""
    with Image.open(path) as img:
        if img.mode != "L":
            raise ValueError(f"{path}: expected an 8-bit mask, got mode {img.mode!r}")
        data = np.asarray(img)
    stray = set(np.unique(data)) - {0, 255}
    if stray:
        raise ValueError(f"{path}: mask holds values other than 0 and 255: {sorted(stray)}")
    return data == 255


def write_state(state: BackgroundState, directory, t: int) -> None:
    """Dump the restoration state after frame t.

    Writes ``background_%06d.png`` (the rendered accumulated content,
    8-bit RGB) and ``mask_%06d.png`` (restored pixels, {0, 255}).
    """
    directory = Path(directory)
    rendered = render_background(state)
    write_frame(rendered.frame, directory / f"background_{t:06d}.png")
    write_mask(rendered.restored, directory / f"mask_{t:06d}.png")


def _scan_sequence(directory) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"sequence directory not found: {directory}")
    found = {}
    for entry in directory.iterdir():
        match = _SEQ_RE.match(entry.name)
        if match:
            found[int(match.group(1))] = entry
    if not found:
        raise ValueError(f"{directory}: no %06d.png frames found")
    count = max(found)
    missing = sorted(set(range(1, count + 1)) - set(found))
    if missing:
        raise ValueError(f"{directory}: missing frame {missing[0]:06d}.png")
    return [found[i] for i in range(1, count + 1)]


def read_sequence(directory) -> VideoSequence:
    """Read a contiguous %06d.png frame directory as a video sequence.

    Raises
    ------
    ValueError
        If no frames are present or the numbering has a gap (the first
        missing index is named).
    """
    paths = _scan_sequence(directory)
    frames = tuple(read_frame(path, index=i) for i, path in enumerate(paths, start=1))
    return VideoSequence(frames)


def read_matte_sequence(directory, resolution_tag: str = "full") -> list[AlphaMatte]:
    """Read a contiguous %06d.png matte directory."""
    paths = _scan_sequence(directory)
    return [read_matte(path, resolution_tag=resolution_tag) for path in paths]
