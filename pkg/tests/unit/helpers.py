"""Shared numerical helpers: central finite differences and naive-loop reference implementations.

The oracles below are deliberately written as plain loops so they share no code with the
vectorized library functions they check.
"""

import math
from collections.abc import Callable

import numpy as np

from lformer.core import no_grad, ops
from lformer.core.tensor import Tensor

FD_EPS = 1e-6


def make_inputs(size: int = 8, bands: int = 2, seed: int = 0, dtype: str = "float32") -> tuple[Tensor, Tensor]:
    """Random `(ms_up, pan)` pair of a square image"""
    rng = np.random.default_rng(seed)
    ms_up = Tensor(rng.random((size, size, bands)), dtype=dtype)
    pan = Tensor(rng.random((size, size, 1)), dtype=dtype)
    return ms_up, pan


def gradcheck(fn: Callable[..., Tensor], *arrays: np.ndarray, eps: float = FD_EPS, seed: int = 0) -> float:
    """Largest relative gap between analytic and central-difference gradients over all inputs.

    The output of `fn` is contracted with fixed random weights so every output element
    contributes to the scalar being differentiated.
    """
    arrays = tuple(np.asarray(a, dtype=np.float64) for a in arrays)
    tensors = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    out = fn(*tensors)
    weights = np.asarray(np.random.default_rng(seed).standard_normal(out.shape))
    loss = ops.sum(out * Tensor(weights))
    loss.backward()

    def evaluate(values: list[np.ndarray]) -> float:
        with no_grad():
            return float((fn(*[Tensor(v) for v in values]).data * weights).sum())

    worst = 0.0
    for position, (tensor, array) in enumerate(zip(tensors, arrays, strict=True)):
        numeric = np.zeros_like(array)
        for index in np.ndindex(array.shape):
            values = [a.copy() for a in arrays]
            values[position][index] += eps
            plus = evaluate(values)
            values[position][index] -= 2 * eps
            minus = evaluate(values)
            numeric[index] = (plus - minus) / (2 * eps)
        analytic = np.zeros_like(array) if tensor.grad is None else tensor.grad.data
        scale = max(float(np.max(np.abs(numeric))), 1e-8)
        worst = max(worst, float(np.max(np.abs(analytic - numeric))) / scale)
    return worst


def naive_conv2d(x: np.ndarray, w: np.ndarray, bias: np.ndarray | None = None, padding: str = "same") -> np.ndarray:
    kh, kw, cin, cout = w.shape
    if padding == "same":
        top, left = (kh - 1) // 2, (kw - 1) // 2
        xp = np.zeros((x.shape[0] + kh - 1, x.shape[1] + kw - 1, cin))
        xp[top : top + x.shape[0], left : left + x.shape[1]] = x
    else:
        xp = x
    hout, wout = xp.shape[0] - kh + 1, xp.shape[1] - kw + 1
    out = np.zeros((hout, wout, cout))
    for i in range(hout):
        for j in range(wout):
            for o in range(cout):
                total = 0.0
                for u in range(kh):
                    for v in range(kw):
                        for c in range(cin):
                            total += xp[i + u, j + v, c] * w[u, v, c, o]
                out[i, j, o] = total + (0.0 if bias is None else bias[o])
    return out


def naive_softmax_rows(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=np.float64)
    for r in range(x.shape[0]):
        top = max(x[r])
        exps = [math.exp(v - top) for v in x[r]]
        total = sum(exps)
        out[r] = [e / total for e in exps]
    return out


def naive_conv1d_rows(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    half = len(taps) // 2
    out = np.zeros_like(x, dtype=np.float64)
    for r in range(x.shape[0]):
        for j in range(x.shape[1]):
            for t, tap in enumerate(taps):
                src = j + t - half
                if 0 <= src < x.shape[1]:
                    out[r, j] += tap * x[r, src]
    return out


def naive_sam(x: np.ndarray, y: np.ndarray) -> float:
    angles = []
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            a, b = x[i, j], y[i, j]
            na = math.sqrt(sum(v * v for v in a))
            nb = math.sqrt(sum(v * v for v in b))
            if na == 0 or nb == 0:
                angles.append(0.0)
                continue
            cosine = min(1.0, max(-1.0, sum(p * q for p, q in zip(a, b, strict=True)) / (na * nb)))
            angles.append(math.degrees(math.acos(cosine)))
    return sum(angles) / len(angles)


def naive_ergas(x: np.ndarray, y: np.ndarray, ratio: int) -> float:
    bands = x.shape[2]
    total = 0.0
    for b in range(bands):
        diff = [(x[i, j, b] - y[i, j, b]) ** 2 for i in range(x.shape[0]) for j in range(x.shape[1])]
        mean_ref = sum(y[i, j, b] for i in range(x.shape[0]) for j in range(x.shape[1])) / len(diff)
        total += (math.sqrt(sum(diff) / len(diff)) / mean_ref) ** 2
    return 100.0 / ratio * math.sqrt(total / bands)


def naive_psnr(x: np.ndarray, y: np.ndarray) -> float:
    mse = float(np.sum((x - y) ** 2)) / x.size
    return math.inf if mse == 0 else 10.0 * math.log10(1.0 / mse)


def naive_ssim(x: np.ndarray, y: np.ndarray, size: int = 11, sigma: float = 1.5) -> float:
    taps = [math.exp(-0.5 * ((i - (size - 1) / 2) / sigma) ** 2) for i in range(size)]
    norm = sum(taps)
    taps = [t / norm for t in taps]
    c1, c2 = 0.01**2, 0.03**2
    values = []
    for b in range(x.shape[2]):
        for i in range(x.shape[0] - size + 1):
            for j in range(x.shape[1] - size + 1):
                mx = my = sxx = syy = sxy = 0.0
                for u in range(size):
                    for v in range(size):
                        weight = taps[u] * taps[v]
                        p, q = x[i + u, j + v, b], y[i + u, j + v, b]
                        mx += weight * p
                        my += weight * q
                        sxx += weight * p * p
                        syy += weight * q * q
                        sxy += weight * p * q
                vx, vy, cov = sxx - mx * mx, syy - my * my, sxy - mx * my
                values.append(((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2)))
    return sum(values) / len(values)


def _window_q(
    a_window: list[np.ndarray], b_window: list[np.ndarray], product: Callable[[np.ndarray, np.ndarray], np.ndarray]
) -> float | None:
    """Q of one window of hypercomplex pixels; None when the window has no variance"""
    count = len(a_window)
    mean_a = sum(a_window) / count
    mean_b = sum(b_window) / count
    var_a = sum(float(np.sum((p - mean_a) ** 2)) for p in a_window) / count
    var_b = sum(float(np.sum((q - mean_b) ** 2)) for q in b_window) / count
    if var_a + var_b <= 1e-12:
        return None
    cov = sum(product(p - mean_a, conjugate(q - mean_b)) for p, q in zip(a_window, b_window, strict=True)) / count
    cov_value = cov[0] if len(cov) == 1 else float(np.linalg.norm(cov))
    na, nb = float(np.linalg.norm(mean_a)), float(np.linalg.norm(mean_b))
    if len(cov) == 1:
        na, nb = float(mean_a[0]), float(mean_b[0])
    luminance = 1.0 if na * na + nb * nb == 0 else 2 * na * nb / (na * na + nb * nb)
    return 2 * cov_value / (var_a + var_b) * luminance


def conjugate(z: np.ndarray) -> np.ndarray:
    out = -z.copy()
    out[0] = z[0]
    return out


def real_product(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return p * q


def complex_product(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.array([p[0] * q[0] - p[1] * q[1], p[0] * q[1] + p[1] * q[0]])


def hamilton_product(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ]
    )


def naive_q(x: np.ndarray, y: np.ndarray, window: int) -> float:
    """Windowed Q over images of 1, 2 or 4 components per pixel (3 bands are padded to 4)"""
    if x.ndim == 2:
        x, y = x[..., None], y[..., None]
    bands = x.shape[2]
    n = {1: 1, 2: 2, 3: 4, 4: 4}[bands]
    product = {1: real_product, 2: complex_product, 4: hamilton_product}[n]
    if n != bands:
        pad = np.zeros(x.shape[:2] + (n - bands,))
        x, y = np.concatenate([x, pad], axis=2), np.concatenate([y, pad], axis=2)
    values = []
    for i in range(x.shape[0] - window + 1):
        for j in range(x.shape[1] - window + 1):
            a_window = [x[i + u, j + v] for u in range(window) for v in range(window)]
            b_window = [y[i + u, j + v] for u in range(window) for v in range(window)]
            q = _window_q(a_window, b_window, product)
            if q is not None:
                values.append(q)
    if not values:
        return 1.0 if np.array_equal(x, y) else 0.0
    return sum(values) / len(values)


def naive_d_lambda(fused: np.ndarray, ms: np.ndarray, window: int) -> float:
    ratio = fused.shape[0] // ms.shape[0]
    low = max(2, window // ratio)
    bands = fused.shape[2]
    total = 0.0
    for i in range(bands):
        for j in range(bands):
            if i != j:
                total += abs(
                    naive_q(fused[..., i], fused[..., j], window) - naive_q(ms[..., i], ms[..., j], low)
                )
    return total / (bands * (bands - 1))


def naive_d_s(fused: np.ndarray, ms: np.ndarray, pan: np.ndarray, pan_low: np.ndarray, window: int) -> float:
    ratio = fused.shape[0] // ms.shape[0]
    low = max(2, window // ratio)
    bands = fused.shape[2]
    total = 0.0
    for i in range(bands):
        total += abs(naive_q(fused[..., i], pan[..., 0], window) - naive_q(ms[..., i], pan_low[..., 0], low))
    return total / bands
