"""Projection pooling: fuse street-level feature stripes onto a top-view grid.

The pipeline: compute which wall pieces each camera sees
(:mod:`projpool.geometry`), rasterize the building outline into grid cells
(:mod:`projpool.grid`), compile cells + visibility into a sparse projection
operator (:mod:`projpool.projection`), and apply it to feature tensors with
masked max fusion (:mod:`projpool.fusion`).  File formats live in
:mod:`projpool.sceneio`, synthetic scenes in :mod:`projpool.synth`, and the
batch interface in :mod:`projpool.cli`.
"""

from . import errors
from .fusion import (
    PooledGrid,
    concat_topview,
    cutout_mask,
    image_dropout_mask,
    pca_rgb,
    pool_scene,
    stripe_from_featmap,
)
from .geometry import (
    CameraPose,
    Polygon,
    VisibleSegment,
    broaden_fov,
    cone_contains,
    in_image_angle,
    min_fov_for_polygon,
    segments_match,
    validate_polygon,
    visible_segments_naive,
    visible_segments_sweep,
)
from .grid import BoundaryCell, GridSpec, rasterize_boundary, scene_to_cell, thicken
from .projection import (
    ProjectionOperator,
    SamplingStrategy,
    StripeRange,
    build_operator,
    load_operator,
    pixel_to_stripe_range,
    sample_weights_avg,
    sample_weights_nearest,
    sample_weights_sum,
    save_operator,
)
from .sceneio import (
    SceneDoc,
    load_scene,
    load_tensor,
    meters_per_pixel,
    save_scene,
    save_tensor,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
