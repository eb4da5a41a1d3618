"""
Matting a clip end to end
=========================

The full pipeline mattes each frame in three stages: a coarse semantic
score against the restored background, an alpha solve inside the
transition band, and a fusion of the two.  This demo runs it on a
synthetic clip with known ground truth and tracks the error per frame.

"""

# %%

from pathlib import Path

import numpy as np

from bgmatte import SynthConfig, build_clip, mad, run_matting, write_matte

out_dir = Path(__file__).resolve().parent / "output" / "matting_pipeline"
out_dir.mkdir(parents=True, exist_ok=True)

# %%
# A clip in the pipeline's comfortable regime
# -------------------------------------------
#
# The classical semantic stage scores a coarse cell by how far its color
# sits from the restored background, squashed through a logistic with
# threshold 0.1.  Foreground/background separation of about twice that
# threshold keeps the score an honest estimate of how much of the cell
# the subject covers, which in turn keeps the detail stage sampling pure
# foreground colors.  The subject enters after a few clean frames so the
# background prior has content from the start, and it moves at least its
# own diameter per frame: a slow subject leaves half-covered cells
# behind it, and those mixed colors would be folded into the restored
# background it is matted against on later frames.

config = SynthConfig(
    width=320,
    height=160,
    clip_length=12,
    seed=9,
    bg_color_a=(0.3, 0.4, 0.5),
    bg_color_b=(0.34, 0.44, 0.54),
    bg_velocity=(0.0, 0.0),
    bg_jitter=0.0,
    bg_rotation=0.0,
    fg_radius=12.0,
    fg_feather=1.5,
    fg_color=(0.55, 0.65, 0.75),
    fg_start=(0.15, 0.5),
    fg_velocity=(27.0, 0.0),
    fg_enter_frame=3,
)
clip = build_clip(config)

# %%
# Running the pipeline
# --------------------
#
# ``run_matting`` with no config uses the classical predictor and the
# default patch scheduler.  The run returns one matte per frame plus the
# semantic maps, patch schedules, and the final background state.

run = run_matting(clip)

print("frame   MAD(x1e4)   band px   patches refined")
for t, (pred, truth, sched) in enumerate(
    zip(run.mattes, clip.alphas, run.schedules), start=1
):
    band = (truth.values > 0) & (truth.values < 1)
    print(
        f"{t:5d}   {mad(pred, truth) * 1e4:9.2f}   {int(band.sum()):7d}"
        f"   {len(sched.selected):15d}"
    )

# %%
# Error inside the transition band
# --------------------------------
#
# Full-frame MAD is dominated by the easy interior pixels.  The honest
# test of a matting pipeline is the band of genuinely fractional alpha.

worst = 0.0
for pred, truth in zip(run.mattes, clip.alphas):
    band = (truth.values > 0) & (truth.values < 1)
    if band.any():
        worst = max(worst, np.abs(pred.values - truth.values)[band].mean())
print(f"worst per-frame band MAD: {worst:.4f}")

# %%
# Saving the mattes
# -----------------
#
# Mattes are written as 16-bit grayscale PNGs, the same format the
# ``bgmatte matte`` command emits.

for t, pred in enumerate(run.mattes, start=1):
    write_matte(pred, out_dir / f"{t:06d}.png")
print(f"wrote {len(run.mattes)} mattes to {out_dir}")
