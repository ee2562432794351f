"""Simulated datasets, the tensor container format and image export."""

from .container import decode_tensor, encode_tensor, load_tensor, save_tensor
from .dataset import (
    SPLITS,
    DatasetManifest,
    Sample,
    build_dataset,
    find_sample,
    iter_samples,
    load_manifest,
    load_sample,
)
from .export import write_ppm
from .simulation import degrade_ms, gen_scene, pan_from_gt, upsample_bicubic

__all__ = [
    "SPLITS",
    "DatasetManifest",
    "Sample",
    "build_dataset",
    "decode_tensor",
    "degrade_ms",
    "encode_tensor",
    "find_sample",
    "gen_scene",
    "iter_samples",
    "load_manifest",
    "load_sample",
    "load_tensor",
    "pan_from_gt",
    "save_tensor",
    "upsample_bicubic",
    "write_ppm",
]
