"""Portrait video matting with a self-restored background prior.

The package mattes a frame sequence in three coupled pieces.  A
background state machine accumulates the unoccluded parts of every
frame into a coarse restored background.  A per-frame matting pipeline
scores foreground probability against that restored background, solves
alpha in the transition band, and fuses the two into a full-resolution
matte.  A fixed-grid patch scheduler then re-solves only the patches
whose coarse matte looks flawed.

Most callers want :func:`run_matting` (or the ``bgmatte`` command line)
plus the synthetic-clip generator and the evaluation metrics.  The
stage-level operations are exported for composing custom pipelines.
"""

from .background import (
    BackgroundState,
    RenderedBackground,
    UpdateTrace,
    extract_bg_info,
    init_state,
    render_background,
    update,
    upsampled_background,
)
from .config import (
    ConfigError,
    PipelineConfig,
    load_config,
    parse_config,
    replace,
    save_config,
    to_synth_config,
)
from .core import (
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
from .matting import (
    DetailResult,
    FrameResult,
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
)
from .metrics import boundary_mask, loss_alpha_hr, loss_bg, mad, mse, ofd_filter
from .patches import (
    FlawMap,
    PatchGrid,
    PatchSchedule,
    build_grid,
    compute_flaw_map,
    refine,
    select_patches,
)
from .pipeline import MattingRun, RestorationRun, run_matting, run_restoration
from .pngio import (
    read_frame,
    read_matte,
    read_matte_sequence,
    read_sequence,
    write_frame,
    write_matte,
    write_state,
)
from .synth import SynthConfig, background_coverage, build_clip, composite

__version__ = "0.1.0"

__all__ = [
    "AlphaMatte",
    "BackgroundState",
    "ConfigError",
    "DetailResult",
    "FlawMap",
    "Frame",
    "FrameResult",
    "MattingRun",
    "PatchGrid",
    "PatchSchedule",
    "PipelineConfig",
    "Predictor",
    "RenderedBackground",
    "RestorationRun",
    "SemanticMap",
    "SynthConfig",
    "TransitionBand",
    "UpdateTrace",
    "VideoSequence",
    "available_predictors",
    "background_coverage",
    "band_from_alpha",
    "block_reduce4",
    "boundary_mask",
    "build_band",
    "build_clip",
    "build_grid",
    "composite",
    "compute_flaw_map",
    "create_predictor",
    "detail_solve",
    "downsample4x",
    "extract_bg_info",
    "fuse",
    "init_state",
    "load_config",
    "loss_alpha_hr",
    "loss_bg",
    "mad",
    "make_classical_predictor",
    "mse",
    "ofd_filter",
    "parse_config",
    "process_frame",
    "read_frame",
    "read_matte",
    "read_matte_sequence",
    "read_sequence",
    "refine",
    "register_predictor",
    "render_background",
    "replace",
    "resize_bilinear",
    "run_matting",
    "run_restoration",
    "sample_bilinear",
    "save_config",
    "select_patches",
    "semantic_estimate",
    "solve_alpha",
    "to_synth_config",
    "update",
    "upsample",
    "upsampled_background",
    "write_frame",
    "write_matte",
    "write_state",
]
