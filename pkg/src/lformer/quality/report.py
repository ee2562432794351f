"""Per-image metric collection and CSV reporting.

Reduced-resolution reports compare a fused image with its ground truth; full-resolution
reports use the no-reference distortion indexes.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd

from lformer.core.tensor import Tensor
from lformer.data.simulation import degrade_ms

from .metrics import DEFAULT_WINDOW, d_lambda, d_s, ergas, hqnr, psnr, q2n, q2n_label, sam, ssim_index

logger = logging.getLogger(__name__)

Mode = Literal["reduced", "full"]
FULL_COLUMNS = ["D_lambda", "D_s", "HQNR"]


def reduced_columns(bands: int) -> list[str]:
    return ["SAM", "ERGAS", "PSNR", "SSIM", q2n_label(bands)]


@dataclass
class ImageMetrics:
    """Metric values of one image.

    Attributes:
        sample_id: Id of the evaluated sample.
        values: Metric name to value.
    """

    sample_id: str
    values: dict[str, float]


@dataclass
class MetricReport:
    """Metric values for every image of a split, with mean and std aggregates.

    Attributes:
        mode: "reduced" (with ground truth) or "full" (no reference).
        columns: Metric columns in report order.
        images: Per-image values in evaluation order.
    """

    mode: Mode
    columns: list[str]
    images: list[ImageMetrics] = field(default_factory=list)

    def add(self, sample_id: str, values: dict[str, float]) -> None:
        self.images.append(ImageMetrics(sample_id, {c: values[c] for c in self.columns}))

    def mean(self) -> dict[str, float]:
        return {c: float(np.mean([img.values[c] for img in self.images])) for c in self.columns}

    def std(self) -> dict[str, float]:
        return {c: _std([img.values[c] for img in self.images]) for c in self.columns}

    def to_frame(self) -> pd.DataFrame:
        """One row per image followed by a `mean` row and a `std` row"""
        rows = [{"id": img.sample_id, **img.values} for img in self.images]
        rows.append({"id": "mean", **self.mean()})
        rows.append({"id": "std", **self.std()})
        return pd.DataFrame(rows, columns=["id", *self.columns])

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False)
        logger.info(f"Wrote {self.mode}-resolution report with {len(self.images)} images to {path}")
        return path


def _std(values: list[float]) -> float:
    if any(math.isinf(v) for v in values):
        return math.nan
    return float(np.std(values))


def assess_reduced(
    fused: Tensor | np.ndarray, gt: Tensor | np.ndarray, ratio: int, window: int = DEFAULT_WINDOW
) -> dict[str, float]:
    """SAM, ERGAS, PSNR, SSIM and Q2n of a fused image against its ground truth.

    The Q2n window shrinks to the image size for images smaller than `window`.
    """
    f = np.asarray(fused.data if isinstance(fused, Tensor) else fused, dtype=np.float64)
    g = np.asarray(gt.data if isinstance(gt, Tensor) else gt, dtype=np.float64)
    window = min(window, *g.shape[:2])
    return {
        "SAM": sam(f, g),
        "ERGAS": ergas(f, g, ratio),
        "PSNR": psnr(f, g),
        "SSIM": ssim_index(f, g),
        q2n_label(g.shape[2]): q2n(f, g, window),
    }


def assess_full(
    fused: Tensor | np.ndarray,
    ms: Tensor | np.ndarray,
    pan: Tensor | np.ndarray,
    ratio: int,
    window: int = DEFAULT_WINDOW,
) -> dict[str, float]:
    """D_lambda, D_s and HQNR without a reference; PAN is degraded with the MS simulation blur"""
    f = np.asarray(fused.data if isinstance(fused, Tensor) else fused, dtype=np.float64)
    p = np.asarray(pan.data if isinstance(pan, Tensor) else pan, dtype=np.float64)
    window = min(window, *f.shape[:2])
    spectral = d_lambda(f, ms, window)
    spatial = d_s(f, ms, p, degrade_ms(p, ratio), window)
    return {"D_lambda": spectral, "D_s": spatial, "HQNR": hqnr(spectral, spatial)}
