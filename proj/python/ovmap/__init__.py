"""Open-vocabulary 3D instance mapping: Python bindings of the C++ core."""

from ._ovmap import (  # noqa: F401
    CameraIntrinsics,
    DataError,
    InvariantError,
    UsageError,
    back_project,
    dbscan,
    evaluate,
    felzenszwalb_segment,
    generate_scene,
    hierarchical_merge,
    instance_iou,
    mask_score,
    overlap_ratio,
    project,
    read_features,
    render_synthetic_depth,
    run_pipeline,
    select_frames,
    set_thread_limit,
    supplement_depth,
    voxel_downsample,
    write_features,
)

__all__ = [name for name in dir() if not name.startswith("_")]
