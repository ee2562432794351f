"""Synthetic multispectral scenes and reduced-resolution simulation.

Everything here works on NumPy arrays laid out `(H, W, C)` with values in [0, 1].
"""

import logging

import numpy as np
from scipy import ndimage

from lformer.core.errors import ConfigurationError, DimensionError

logger = logging.getLogger(__name__)

CUBIC_A = -0.5


def gen_scene(seed: int, height: int, width: int, bands: int, n_blobs: int = 12) -> np.ndarray:
    """Random scene of anisotropic Gaussian blobs over linear ramps, clipped to [0, 1].

    Every blob has its own spectrum scaled by a luminance factor shared across bands, which
    keeps the bands strongly correlated the way natural imagery is.

    Args:
        seed: Generator seed; equal seeds give identical scenes.
        height: Rows, at least 16.
        width: Columns, at least 16.
        bands: Spectral band count.
        n_blobs: Number of Gaussian blobs.

    Returns:
        `(height, width, bands)` float64 scene.
    """
    if height < 16 or width < 16:
        raise ConfigurationError(f"scenes need at least 16x16 pixels, got {height}x{width}")
    if bands < 1:
        raise ConfigurationError(f"bands must be >= 1, got {bands}")
    rng = np.random.default_rng(seed)
    rows, cols = np.meshgrid(np.arange(height) / height, np.arange(width) / width, indexing="ij")
    base_spectrum = rng.uniform(0.5, 1.0, size=bands)
    scene = np.zeros((height, width, bands))

    for _ in range(2):
        direction = rng.uniform(0, 2 * np.pi)
        ramp = np.cos(direction) * rows + np.sin(direction) * cols
        scene += 0.15 * ramp[..., None] * base_spectrum * rng.uniform(0.8, 1.2, size=bands)

    for _ in range(n_blobs):
        cy, cx = rng.uniform(0, 1, size=2)
        sy, sx = rng.uniform(0.03, 0.2, size=2)
        theta = rng.uniform(0, np.pi)
        dy, dx = rows - cy, cols - cx
        u = np.cos(theta) * dy + np.sin(theta) * dx
        v = -np.sin(theta) * dy + np.cos(theta) * dx
        blob = np.exp(-0.5 * ((u / sy) ** 2 + (v / sx) ** 2))
        luminance = rng.uniform(0.2, 0.6)
        spectrum = luminance * base_spectrum * rng.uniform(0.7, 1.3, size=bands)
        scene += blob[..., None] * spectrum

    return np.clip(scene + 0.1, 0.0, 1.0)


def pan_from_gt(gt: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Panchromatic image as a per-pixel weighted band sum, shape `(H, W, 1)`"""
    bands = gt.shape[2]
    weights = np.full(bands, 1.0 / bands) if weights is None else np.asarray(weights, dtype=np.float64)
    if weights.shape != (bands,) or np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-6:
        raise ConfigurationError(f"PAN weights must be {bands} nonnegative values summing to 1")
    return (gt @ weights)[..., None]


def gaussian_taps(ratio: int) -> np.ndarray:
    """Normalized 1-D Gaussian with sigma = ratio / 2 truncated at radius 2 * ratio"""
    sigma = ratio / 2.0
    x = np.arange(-2 * ratio, 2 * ratio + 1, dtype=np.float64)
    taps = np.exp(-0.5 * (x / sigma) ** 2)
    return taps / taps.sum()


def blur(image: np.ndarray, ratio: int) -> np.ndarray:
    """Separable Gaussian MTF approximation with replicated borders"""
    taps = gaussian_taps(ratio)
    out = ndimage.correlate1d(image, taps, axis=0, mode="nearest")
    return ndimage.correlate1d(out, taps, axis=1, mode="nearest")


def degrade_ms(gt: np.ndarray, ratio: int) -> np.ndarray:
    """Blur then keep every `ratio`-th pixel starting at the top-left corner"""
    if ratio < 1:
        raise ConfigurationError(f"ratio must be >= 1, got {ratio}")
    height, width = gt.shape[:2]
    if height % ratio or width % ratio:
        raise DimensionError(f"image size is not divisible by ratio {ratio}", gt.shape)
    return blur(gt, ratio)[::ratio, ::ratio]


def cubic_weight(x: np.ndarray, a: float = CUBIC_A) -> np.ndarray:
    x = np.abs(x)
    near = (a + 2) * x**3 - (a + 3) * x**2 + 1
    far = a * x**3 - 5 * a * x**2 + 8 * a * x - 4 * a
    return np.where(x <= 1, near, np.where(x < 2, far, 0.0))


def bicubic_matrix(size: int, ratio: int) -> np.ndarray:
    """`(size * ratio, size)` interpolation matrix; output j samples the input at j / ratio"""
    out = np.zeros((size * ratio, size))
    for j in range(size * ratio):
        x = j / ratio
        base = int(np.floor(x))
        t = x - base
        for offset in range(-1, 3):
            index = min(max(base + offset, 0), size - 1)
            out[j, index] += cubic_weight(np.array(t - offset))
    return out


def upsample_bicubic(ms: np.ndarray, ratio: int) -> np.ndarray:
    """Separable bicubic interpolation (a = -0.5) with clamped borders"""
    if ratio < 1:
        raise ConfigurationError(f"ratio must be >= 1, got {ratio}")
    rows = bicubic_matrix(ms.shape[0], ratio)
    cols = bicubic_matrix(ms.shape[1], ratio)
    return np.einsum("ih,hwc,jw->ijc", rows, ms, cols)
