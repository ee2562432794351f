"""Reduced- and full-resolution quality indexes for fused multispectral images.

All functions take NumPy arrays (or Tensors) laid out `(H, W, C)` and return Python floats.
Windowed indexes slide a square window with stride 1 over every complete position.
"""

import logging
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from lformer.core import no_grad
from lformer.core.errors import DimensionError, NumericError
from lformer.core.tensor import Tensor

from .losses import ssim

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 32
DEGENERATE_TOL = 1e-12


def _array(value: Tensor | np.ndarray) -> np.ndarray:
    return np.asarray(value.data if isinstance(value, Tensor) else value, dtype=np.float64)


def _pair(x: Tensor | np.ndarray, y: Tensor | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b = _array(x), _array(y)
    if a.shape != b.shape:
        raise DimensionError("metric operands differ in shape", a.shape, b.shape)
    return a, b


def sam(x: Tensor | np.ndarray, y: Tensor | np.ndarray) -> float:
    """Mean spectral angle in degrees; pixels where either spectrum is zero count as 0"""
    a, b = _pair(x, y)
    a, b = a.reshape(-1, a.shape[-1]), b.reshape(-1, b.shape[-1])
    norms = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    valid = norms > 0
    cosine = np.ones(len(a))
    cosine[valid] = np.clip((a[valid] * b[valid]).sum(axis=1) / norms[valid], -1.0, 1.0)
    return float(np.degrees(np.arccos(cosine)).mean())


def ergas(x: Tensor | np.ndarray, reference: Tensor | np.ndarray, ratio: int) -> float:
    """100 / ratio * sqrt(mean over bands of (RMSE_b / mean_b)^2), means taken on the reference"""
    a, b = _pair(x, reference)
    a, b = a.reshape(-1, a.shape[-1]), b.reshape(-1, b.shape[-1])
    means = b.mean(axis=0)
    if np.any(means == 0):
        raise NumericError("ERGAS reference has a zero-mean band")
    rmse = np.sqrt(((a - b) ** 2).mean(axis=0))
    return float(100.0 / ratio * np.sqrt(np.mean((rmse / means) ** 2)))


def psnr(x: Tensor | np.ndarray, y: Tensor | np.ndarray, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; identical images give +inf"""
    a, b = _pair(x, y)
    mse = float(((a - b) ** 2).mean())
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak**2 / mse)


def ssim_index(x: Tensor | np.ndarray, y: Tensor | np.ndarray) -> float:
    a, b = _pair(x, y)
    if a.ndim == 2:
        a, b = a[..., None], b[..., None]
    with no_grad():
        return ssim(Tensor(a), Tensor(b)).item()


def cd_conjugate(z: np.ndarray) -> np.ndarray:
    """Hypercomplex conjugate along the last axis (negate every non-real component)"""
    out = -z
    out[..., 0] = z[..., 0]
    return out


def cd_multiply(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Cayley-Dickson product along the last axis, whose length must be a power of two.

    (a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))
    """
    n = p.shape[-1]
    if n == 1:
        return p * q
    half = n // 2
    a, b = p[..., :half], p[..., half:]
    c, d = q[..., :half], q[..., half:]
    first = cd_multiply(a, c) - cd_multiply(cd_conjugate(d), b)
    second = cd_multiply(d, a) + cd_multiply(b, cd_conjugate(c))
    return np.concatenate([first, second], axis=-1)


def structure_constants(n: int) -> np.ndarray:
    """`T[k, i, j]`: component k of e_i * conj(e_j) in the n-dimensional algebra"""
    basis = np.eye(n)
    table = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            table[:, i, j] = cd_multiply(basis[i], cd_conjugate(basis[j]))
    return table


def _window_stats(a: np.ndarray, b: np.ndarray, window: int) -> tuple[np.ndarray, ...]:
    """Per-window means `(nh, nw, n)` and cross second moments `(nh, nw, n, n)`"""
    h, w = a.shape[:2]
    if window < 1 or window > h or window > w:
        raise DimensionError(f"window {window} does not fit the image", a.shape)
    va = sliding_window_view(a, (window, window), axis=(0, 1))
    vb = sliding_window_view(b, (window, window), axis=(0, 1))
    mean_a = va.mean(axis=(-2, -1))
    mean_b = vb.mean(axis=(-2, -1))
    pixels = window * window
    da = va - mean_a[..., None, None]
    db = vb - mean_b[..., None, None]
    cov_ab = np.einsum("xyiuv,xyjuv->xyij", da, db) / pixels
    var_a = np.einsum("xyiuv,xyiuv->xy", da, da) / pixels
    var_b = np.einsum("xyiuv,xyiuv->xy", db, db) / pixels
    return mean_a, mean_b, var_a, var_b, cov_ab


def _combine(
    covariance: np.ndarray, var_sum: np.ndarray, mean_product: np.ndarray, mean_sq_sum: np.ndarray, same: bool
) -> float:
    keep = var_sum > DEGENERATE_TOL
    if not np.any(keep):
        logger.debug("Every window is degenerate")
        return 1.0 if same else 0.0
    luminance = np.ones_like(mean_product)
    nonzero = mean_sq_sum > 0
    luminance[nonzero] = 2.0 * mean_product[nonzero] / mean_sq_sum[nonzero]
    values = 2.0 * covariance[keep] / var_sum[keep] * luminance[keep]
    return float(values.mean())


def q_index(x: Tensor | np.ndarray, y: Tensor | np.ndarray, window: int = DEFAULT_WINDOW) -> float:
    """Universal image quality index of two single-band images, averaged over windows.

    Per window Q = 2 cov / (var_x + var_y) * 2 mean_x mean_y / (mean_x^2 + mean_y^2). Windows
    with zero total variance are skipped; the luminance factor is 1 when both means are 0.
    """
    a, b = _pair(x, y)
    if a.ndim == 3 and a.shape[2] == 1:
        a, b = a[..., 0], b[..., 0]
    if a.ndim != 2:
        raise DimensionError("q_index expects single-band images", a.shape)
    mean_a, mean_b, var_a, var_b, cov = _window_stats(a[..., None], b[..., None], window)
    ma, mb = mean_a[..., 0], mean_b[..., 0]
    return _combine(cov[..., 0, 0], var_a + var_b, ma * mb, ma**2 + mb**2, bool(np.array_equal(a, b)))


def q2n(x: Tensor | np.ndarray, y: Tensor | np.ndarray, window: int = DEFAULT_WINDOW) -> float:
    """Hypercomplex Q index over all bands, zero-padded to a power-of-two band count.

    Pixels are elements of the 2^n-dimensional Cayley-Dickson algebra; the window statistic
    uses the modulus of the hypercomplex covariance E[(x - mean_x) conj(y - mean_y)].
    """
    a, b = _pair(x, y)
    if a.ndim != 3:
        raise DimensionError("q2n expects (H, W, C) images", a.shape)
    bands = a.shape[2]
    if bands == 1:
        return q_index(a[..., 0], b[..., 0], window)
    n = 1 << (bands - 1).bit_length()
    pad = ((0, 0), (0, 0), (0, n - bands))
    a, b = np.pad(a, pad), np.pad(b, pad)
    mean_a, mean_b, var_a, var_b, cross = _window_stats(a, b, window)
    covariance = np.linalg.norm(np.einsum("kij,xyij->xyk", structure_constants(n), cross), axis=-1)
    norm_a = np.linalg.norm(mean_a, axis=-1)
    norm_b = np.linalg.norm(mean_b, axis=-1)
    return _combine(covariance, var_a + var_b, norm_a * norm_b, norm_a**2 + norm_b**2, bool(np.array_equal(a, b)))


def q2n_label(bands: int) -> str:
    """Column name used for q2n in reports: Q4 for 3-4 bands, Q8 for 5-8, and so on"""
    return "Q" if bands == 1 else f"Q{1 << (bands - 1).bit_length()}"


def _infer_ratio(high: np.ndarray, low: np.ndarray) -> int:
    ratio = high.shape[0] // low.shape[0]
    if ratio < 1 or high.shape[0] != ratio * low.shape[0] or high.shape[1] != ratio * low.shape[1]:
        raise DimensionError("high resolution is not an integer multiple of the low one", high.shape, low.shape)
    return ratio


def d_lambda(fused: Tensor | np.ndarray, ms: Tensor | np.ndarray, window: int = DEFAULT_WINDOW) -> float:
    """Spectral distortion: mean |Q(F_i, F_j) - Q(M_i, M_j)| over ordered band pairs i != j"""
    f, m = _array(fused), _array(ms)
    bands = f.shape[2]
    if bands < 2 or m.shape[2] != bands:
        raise DimensionError("D_lambda needs at least two matching bands", f.shape, m.shape)
    low_window = max(2, window // _infer_ratio(f, m))
    total = 0.0
    for i in range(bands):
        for j in range(bands):
            if i != j:
                q_high = q_index(f[..., i], f[..., j], window)
                q_low = q_index(m[..., i], m[..., j], low_window)
                total += abs(q_high - q_low)
    return total / (bands * (bands - 1))


def d_s(
    fused: Tensor | np.ndarray,
    ms: Tensor | np.ndarray,
    pan: Tensor | np.ndarray,
    pan_degraded: Tensor | np.ndarray,
    window: int = DEFAULT_WINDOW,
) -> float:
    """Spatial distortion: mean |Q(F_i, P) - Q(M_i, P_low)| over bands"""
    f, m, p, pl = _array(fused), _array(ms), _array(pan), _array(pan_degraded)
    p = p[..., 0] if p.ndim == 3 else p
    pl = pl[..., 0] if pl.ndim == 3 else pl
    if f.shape[:2] != p.shape or m.shape[:2] != pl.shape or f.shape[2] != m.shape[2]:
        raise DimensionError("D_s operands are inconsistent", f.shape, m.shape, p.shape, pl.shape)
    low_window = max(2, window // _infer_ratio(f, m))
    bands = f.shape[2]
    total = sum(abs(q_index(f[..., i], p, window) - q_index(m[..., i], pl, low_window)) for i in range(bands))
    return total / bands


def hqnr(d_lambda_value: float, d_s_value: float) -> float:
    return (1.0 - d_lambda_value) * (1.0 - d_s_value)
