"""Evaluation functionals: boundary-weighted losses, MAD/MSE, deflicker.

The two loss functionals share one robust penalty,
``sqrt((p - g)^2 + eps^2)``, averaged per pixel and weighted by a
boundary mask that emphasizes the edge region of the ground-truth matte
(weight 4 there, 1 elsewhere).  Averaging rather than summing over
pixels keeps values comparable across resolutions; the raw sum is
available through ``reduction="sum"`` for auditing.

MAD and MSE are the plain benchmark means; reporting layers multiply by
1e4 for conventional units.  The deflicker filter repairs single-frame
temporal flickers by replacing a pixel with the average of its two
temporal neighbors when the neighbors agree and the pixel disagrees
with both.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import ndimage

from .core import AlphaMatte, Frame

__all__ = [
    "boundary_mask",
    "loss_bg",
    "loss_alpha_hr",
    "mad",
    "mse",
    "ofd_filter",
]


def boundary_mask(alpha_g: AlphaMatte, radius: int = 2) -> np.ndarray:
    """Per-pixel loss weights: 4 on the matte boundary, 1 elsewhere.

    The boundary band is ``dilate(alpha > 0.05, r) and not
    erode(alpha > 0.95, r)`` with a square (2r+1) element.  Outside the
    image counts as background for the dilation and as foreground for
    the erosion, so a constant matte has no band at all.

    Parameters
    ----------
    alpha_g : AlphaMatte
        Ground-truth matte.
    radius : int
        Structuring-element radius, >= 1.

    Returns
    -------
    numpy.ndarray
        (h, w) float64 array with values in {1, 4}.
    """
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    a = alpha_g.values
    structure = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    some_fg = ndimage.binary_dilation(a > 0.05, structure=structure, border_value=0)
    all_fg = ndimage.binary_erosion(a > 0.95, structure=structure, border_value=1)
    return np.where(some_fg & ~all_fg, 4.0, 1.0)


def _checked_weights(weights, shape) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != shape:
        raise ValueError(f"weights shape {w.shape} != image shape {shape}")
    if not np.isfinite(w).all() or (w < 0).any():
        raise ValueError("weights must be finite and >= 0")
    return w


def _penalty(pred: np.ndarray, gt: np.ndarray, weights: np.ndarray, eps: float,
             reduction: str) -> float:
    if reduction not in ("mean", "sum"):
        raise ValueError(f"reduction must be 'mean' or 'sum', got {reduction!r}")
    diff = pred - gt
    pen = np.sqrt(diff * diff + eps * eps)
    if pen.ndim == 3:
        weights = weights[:, :, None]
    weighted = weights * pen
    return float(weighted.mean() if reduction == "mean" else weighted.sum())


def loss_alpha_hr(
    pred: AlphaMatte,
    gt: AlphaMatte,
    weights: np.ndarray,
    eps: float = 1e-6,
    reduction: str = "mean",
) -> float:
    """Boundary-weighted robust penalty between two mattes.

    Per pixel the penalty is ``w * sqrt((p - g)^2 + eps^2)``; the result
    is its mean over pixels (or raw sum with ``reduction="sum"``).  The
    floor value for a perfect prediction is ``mean(w) * eps``, not 0.

    Parameters
    ----------
    pred, gt : AlphaMatte
        Predicted and ground-truth mattes, same size.
    weights : numpy.ndarray
        (h, w) weight field, typically from :func:`boundary_mask`.
    eps : float
        Smoothing constant, > 0.
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if pred.values.shape != gt.values.shape:
        raise ValueError(f"matte shapes differ: {pred.values.shape} vs {gt.values.shape}")
    w = _checked_weights(weights, gt.values.shape)
    return _penalty(pred.values, gt.values, w, eps, reduction)


def loss_bg(
    bg_p,
    bg_g,
    weights,
    eps: float = 1e-6,
    reduction: str = "mean",
) -> float:
    """Summed per-frame robust penalty between two background sequences.

    Each frame contributes the weighted per-pixel-and-channel mean of
    ``sqrt((p - g)^2 + eps^2)``; frames are then summed, so a clip twice
    as long scores twice as high at equal quality.

    Parameters
    ----------
    bg_p, bg_g : sequence of Frame
        Predicted and ground-truth backgrounds, aligned by position.
    weights : numpy.ndarray or sequence of numpy.ndarray
        One (h, w) weight field for all frames, or one per frame.
    eps : float
        Smoothing constant, > 0.
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be > 0, got {eps}")
    preds = list(bg_p)
    gts = list(bg_g)
    if len(preds) != len(gts):
        raise ValueError(f"sequence lengths differ: {len(preds)} vs {len(gts)}")
    if not preds:
        raise ValueError("sequences must be non-empty")
    if isinstance(weights, np.ndarray) or (
        hasattr(weights, "__len__") and len(weights) != len(preds)
    ):
        weight_list = [weights] * len(preds)
    else:
        weight_list = list(weights)
    total = 0.0
    for p, g, w in zip(preds, gts, weight_list):
        if (p.height, p.width) != (g.height, g.width):
            raise ValueError(f"frame sizes differ: {(p.height, p.width)} vs {(g.height, g.width)}")
        wts = _checked_weights(w, (g.height, g.width))
        total += _penalty(p.pixels, g.pixels, wts, eps, reduction)
    return total


def _paired(pred: AlphaMatte, gt: AlphaMatte) -> tuple[np.ndarray, np.ndarray]:
    if pred.values.shape != gt.values.shape:
        raise ValueError(f"matte shapes differ: {pred.values.shape} vs {gt.values.shape}")
    return pred.values, gt.values


def mad(pred: AlphaMatte, gt: AlphaMatte) -> float:
    """Mean absolute difference.  Reporting conventionally scales by 1e4."""
    p, g = _paired(pred, gt)
    return float(np.abs(p - g).mean())


def mse(pred: AlphaMatte, gt: AlphaMatte) -> float:
    """Mean squared difference.  Reporting conventionally scales by 1e4."""
    p, g = _paired(pred, gt)
    d = p - g
    return float((d * d).mean())


def ofd_filter(mattes, close_tol: float = 0.1, flicker_tol: float = 0.3) -> list[AlphaMatte]:
    """Repair single-frame flickers by one-frame-delayed neighbor voting.

    A pixel at frame t (1 < t < N) flickers when its two temporal
    neighbors agree (``|a[t-1] - a[t+1]| <= close_tol``) while the pixel
    disagrees with both (``|a[t] - a[t+-1]| > flicker_tol``); it is
    replaced by the neighbor average.  Neighbor values are always read
    from the original input, not from repaired frames, and the first and
    last frames pass through untouched.

    Parameters
    ----------
    mattes : sequence of AlphaMatte
        Temporally ordered mattes of one size.
    close_tol, flicker_tol : float
        Agreement and disagreement thresholds, both >= 0.

    Returns
    -------
    list of AlphaMatte
        Same length as the input.  Fewer than 3 frames: returned
        unchanged with a warning (no neighbors to vote).
    """
    if close_tol < 0.0 or flicker_tol < 0.0:
        raise ValueError("tolerances must be >= 0")
    mattes = list(mattes)
    shapes = {m.values.shape for m in mattes}
    if len(shapes) > 1:
        raise ValueError(f"mattes must share one shape, got {sorted(shapes)}")
    if len(mattes) < 3:
        warnings.warn("deflicker needs at least 3 frames; returning input unchanged")
        return mattes
    out = [mattes[0]]
    for t in range(1, len(mattes) - 1):
        prev = mattes[t - 1].values
        cur = mattes[t].values
        nxt = mattes[t + 1].values
        flicker = (
            (np.abs(prev - nxt) <= close_tol)
            & (np.abs(cur - prev) > flicker_tol)
            & (np.abs(cur - nxt) > flicker_tol)
        )
        if flicker.any():
            repaired = np.where(flicker, (prev + nxt) / 2.0, cur)
            out.append(AlphaMatte(repaired, mattes[t].resolution_tag))
        else:
            out.append(mattes[t])
    out.append(mattes[-1])
    return out
