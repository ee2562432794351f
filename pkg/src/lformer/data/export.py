"""Binary PPM (P6, 8-bit) export for quick visual inspection"""

import logging
from pathlib import Path

import numpy as np

from lformer.core.errors import DimensionError
from lformer.core.tensor import Tensor

logger = logging.getLogger(__name__)


def minmax_normalize(image: np.ndarray) -> np.ndarray:
    """Rescale to [0, 1]; a constant image maps to zeros"""
    lo, hi = float(image.min()), float(image.max())
    if hi == lo:
        return np.zeros_like(image, dtype=np.float64)
    return (image - lo) / (hi - lo)


def to_rgb8(image: Tensor | np.ndarray) -> np.ndarray:
    """`(H, W)`, `(H, W, 1)` or `(H, W, 3)` values in [0, 1] to `(H, W, 3)` uint8"""
    array = np.asarray(image.data if isinstance(image, Tensor) else image, dtype=np.float64)
    if array.ndim == 2:
        array = array[..., None]
    if array.ndim != 3 or array.shape[2] not in (1, 3):
        raise DimensionError("PPM export needs a 1- or 3-band image", array.shape)
    if array.shape[2] == 1:
        array = np.repeat(array, 3, axis=2)
    return np.round(np.clip(array, 0.0, 1.0) * 255).astype(np.uint8)


def write_ppm(path: str | Path, image: Tensor | np.ndarray, normalize: bool = False) -> Path:
    """Write a P6 PPM; `normalize` min-max scales the image first"""
    array = np.asarray(image.data if isinstance(image, Tensor) else image, dtype=np.float64)
    if normalize:
        array = minmax_normalize(array)
    pixels = to_rgb8(array)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f"P6\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii")
    path.write_bytes(header + pixels.tobytes())
    logger.debug(f"Wrote {path}")
    return path


def read_ppm(path: str | Path) -> np.ndarray:
    """Read a P6 PPM written by `write_ppm` back to `(H, W, 3)` uint8"""
    blob = Path(path).read_bytes()
    magic, dims, maxval, payload = blob.split(b"\n", 3)
    if magic != b"P6" or maxval != b"255":
        raise DimensionError(f"{path} is not an 8-bit P6 file")
    width, height = (int(v) for v in dims.split())
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
