"""Differentiable training losses: L1 and structural similarity"""

import numpy as np

from lformer.core import ops
from lformer.core.errors import DimensionError
from lformer.core.tensor import Tensor

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_RANGE = 1.0


def _check_pair(x: Tensor, y: Tensor) -> None:
    if x.shape != y.shape:
        raise DimensionError("loss operands differ in shape", x.shape, y.shape)


def l1_loss(x: Tensor, y: Tensor) -> Tensor:
    """Mean absolute difference"""
    _check_pair(x, y)
    return ops.mean(ops.abs(x - y))


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2
    taps = np.exp(-0.5 * (x / sigma) ** 2)
    return taps / taps.sum()


def filter_matrix(length: int, taps: np.ndarray) -> np.ndarray:
    """Banded `(length - k + 1, length)` matrix applying `taps` as a valid correlation"""
    k = taps.shape[0]
    out = np.zeros((length - k + 1, length))
    for i in range(length - k + 1):
        out[i, i : i + k] = taps
    return out


def gaussian_filter_valid(image: Tensor, rows: Tensor, cols: Tensor) -> Tensor:
    """Separable valid Gaussian filtering of every band of an `(H, W, C)` image via matmul"""
    h, w, c = image.shape
    hv, wv = rows.shape[0], cols.shape[0]
    out = (rows @ image.reshape(h, w * c)).reshape(hv, w, c)
    out = (cols @ out.transpose((1, 0, 2)).reshape(w, hv * c)).reshape(wv, hv, c)
    return out.transpose((1, 0, 2))


def ssim_map(x: Tensor, y: Tensor) -> Tensor:
    """Per-pixel SSIM over the valid region, shape `(H - 10, W - 10, C)`"""
    _check_pair(x, y)
    if x.ndim != 3:
        raise DimensionError("ssim expects (H, W, C) images", x.shape)
    h, w, _ = x.shape
    if h < SSIM_WINDOW or w < SSIM_WINDOW:
        raise DimensionError(f"image is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window", x.shape)
    taps = gaussian_window()
    rows = Tensor(filter_matrix(h, taps), dtype=x.dtype)
    cols = Tensor(filter_matrix(w, taps), dtype=x.dtype)

    def blur(t: Tensor) -> Tensor:
        return gaussian_filter_valid(t, rows, cols)

    c1 = (SSIM_K1 * SSIM_RANGE) ** 2
    c2 = (SSIM_K2 * SSIM_RANGE) ** 2
    mu_x, mu_y = blur(x), blur(y)
    mu_xx, mu_yy, mu_xy = mu_x * mu_x, mu_y * mu_y, mu_x * mu_y
    var_x = blur(x * x) - mu_xx
    var_y = blur(y * y) - mu_yy
    cov = blur(x * y) - mu_xy
    numerator = (2.0 * mu_xy + c1) * (2.0 * cov + c2)
    denominator = (mu_xx + mu_yy + c1) * (var_x + var_y + c2)
    return numerator / denominator


def ssim(x: Tensor, y: Tensor) -> Tensor:
    """Structural similarity averaged over the valid region of each band, then over bands"""
    return ops.mean(ssim_map(x, y))


def ssim_loss(x: Tensor, y: Tensor) -> Tensor:
    return 1.0 - ssim(x, y)


def total_loss(x: Tensor, y: Tensor, alpha: float = 0.1) -> Tensor:
    """L1 + alpha * (1 - SSIM)"""
    loss = l1_loss(x, y)
    if alpha:
        loss = loss + alpha * ssim_loss(x, y)
    return loss
