"""Parameter and FLOP accounting, forward timing and attention-similarity analysis.

FLOPs follow one convention everywhere: a multiply-accumulate is 2 FLOPs, so conv2d costs
`2 * H * W * kh * kw * Cin * Cout`, a matrix product `2 * m * k * n`, a row convolution of a
`(T, T)` map `2 * T * T * k`, and softmax 5 FLOPs per element. Elementwise work (activations,
residual adds, scaling, the Sobel magnitude) and biases are not counted. The analytic counter
and the runtime tally in `lformer.core.tensor` agree exactly under this convention.

Attention cost is quadratic in the token count T = H * W for every variant, evolved included:
convolving a `(T, T)` map is itself `O(T^2)`.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from lformer.core.errors import ConfigurationError
from lformer.core.tensor import FlopTally, Tensor, benchmark_mode, flop_tally
from lformer.data.dataset import Sample, sample_seed, simulate_sample
from lformer.models.attention import attention_cosine_similarity
from lformer.models.blocks import Module
from lformer.models.config import VARIANTS, LFormerConfig
from lformer.models.lformer import ForwardTrace, LFormerModel, build
from lformer.quality.metrics import q2n_label

logger = logging.getLogger(__name__)

BICUBIC = "bicubic"
PROFILE_COLUMNS = ["Params", "FLOPs", "time_mean", "time_std", "peak_bytes"]


def count_params(model: Module) -> int:
    """Total element count of every trainable tensor"""
    return sum(p.size for p in model.parameters())


def _conv_params(cin: int, cout: int, kernel: int = 3) -> int:
    return kernel * kernel * cin * cout + cout


def analytic_param_count(config: LFormerConfig) -> int:
    """Closed-form parameter count of the network described by `config`"""
    c, d = config.bands, config.width

    def projection(cin: int) -> int:
        return _conv_params(cin, d) + _conv_params(d, d)

    total = projection(1) + projection(c) + projection(c + 1)
    total += config.rcb_blocks * 2 * _conv_params(d, d)
    block = projection(2 * d) + _conv_params(2 * d, d, 1)
    if config.variant == "evolved":
        block += config.heads * config.kernel_size
    elif config.variant == "recompute":
        block += 3 * _conv_params(d, d, 1)
    total += (config.blocks - 1) * block
    return total + _conv_params(d, c)


@dataclass
class FlopBreakdown(FlopTally):
    """Analytic FLOPs per operation category, plus the contribution of each network part"""

    parts: dict[str, int] = field(default_factory=dict)

    def charge(self, part: str, category: str, count: int) -> None:
        setattr(self, category, getattr(self, category) + count)
        self.parts[part] = self.parts.get(part, 0) + count


def _conv_flops(tokens: int, cin: int, cout: int, kernel: int = 3) -> int:
    return 2 * tokens * kernel * kernel * cin * cout


def _attention_flops(fb: FlopBreakdown, part: str, tokens: int, width: int, heads: int) -> None:
    """Scores, softmax and weighted sum of `heads` heads splitting `width` channels"""
    fb.charge(part, "matmul", 2 * tokens * tokens * width)
    fb.charge(part, "softmax", 5 * tokens * tokens * heads)
    fb.charge(part, "matmul", 2 * tokens * tokens * width)


def flop_breakdown(config: LFormerConfig, height: int, width: int) -> FlopBreakdown:
    """Analytic FLOPs of one forward pass on an `height x width` image"""
    if height < 1 or width < 1:
        raise ConfigurationError(f"image size must be positive, got {height}x{width}")
    c, d, h, k = config.bands, config.width, config.heads, config.kernel_size
    t = height * width
    fb = FlopBreakdown()
    fb.charge("proj_pan", "conv2d", _conv_flops(t, 1, d) + _conv_flops(t, d, d))
    fb.charge("proj_ms", "conv2d", _conv_flops(t, c, d) + _conv_flops(t, d, d))
    _attention_flops(fb, "cross_attention", t, d, h)
    fb.charge("sobel", "conv2d", (c + 1) * _conv_flops(t, 1, 2))
    fb.charge("proj_detail", "conv2d", _conv_flops(t, c + 1, d) + _conv_flops(t, d, d))
    fb.charge("detail_rcb", "conv2d", config.rcb_blocks * 2 * _conv_flops(t, d, d))
    for i in range(1, config.blocks):
        part = f"blocks.{i}"
        fb.charge(part, "conv2d", _conv_flops(t, 2 * d, d) + _conv_flops(t, d, d))
        fb.charge(part, "conv2d", _conv_flops(t, 2 * d, d, 1))
        if config.variant == "evolved":
            fb.charge(part, "conv1d", h * 2 * t * t * k)
            fb.charge(part, "softmax", h * 5 * t * t)
            fb.charge(part, "matmul", 2 * t * t * d)
        elif config.variant == "recompute":
            fb.charge(part, "conv2d", 3 * _conv_flops(t, d, d, 1))
            _attention_flops(fb, part, t, d, h)
        else:
            fb.charge(part, "matmul", 2 * t * t * d)
    fb.charge("head", "conv2d", _conv_flops(t, d, c))
    return fb


def count_flops(config: LFormerConfig, height: int, width: int) -> int:
    return flop_breakdown(config, height, width).total


def measure_flops(model: LFormerModel, ms_up: Tensor, pan: Tensor, variant: str | None = None) -> FlopTally:
    """FLOPs tallied at runtime while `model` fuses one image pair"""
    with benchmark_mode(), flop_tally() as tally:
        model.forward(ms_up, pan, variant)
    return tally


def peak_memory_bytes(config: LFormerConfig, height: int, width: int) -> int:
    """Analytic peak of live tensor bytes over the forward schedule, parameters included.

    Each stage lists the tensors alive while it runs; the estimate is the largest stage.
    """
    c, d, h = config.bands, config.width, config.heads
    t = height * width
    inputs = t * (c + 1)
    first = inputs + 2 * t * d + 2 * h * t * t + t * d
    # the shallow projections stay alive until the head
    shallow = 2 * t * d
    detail = inputs + shallow + t * d + h * t * t + 2 * (c + 1) * t + 2 * t * d
    block = inputs + shallow + 2 * t * d + 3 * t * d + 2 * t * d + t * d
    if config.variant == "evolved":
        block += 3 * h * t * t
    elif config.variant == "recompute":
        block += 3 * t * d + 2 * h * t * t
    else:
        block += h * t * t
    stages = [first, detail] + ([block] if config.blocks > 1 else [])
    itemsize = np.dtype(config.dtype).itemsize
    return (max(stages) + analytic_param_count(config)) * itemsize


@dataclass
class TimingStats:
    """Wall-clock forward times in seconds"""

    times: list[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.times))

    @property
    def std(self) -> float:
        return float(np.std(self.times))

    @property
    def min(self) -> float:
        return float(np.min(self.times))

    @property
    def median(self) -> float:
        return float(np.median(self.times))


def bench_forward(
    model: LFormerModel, sample: Sample, n_warm: int = 1, n_runs: int = 5, variant: str | None = None
) -> TimingStats:
    """Time `n_runs` forward passes after `n_warm` untimed ones, with gradients and guards off"""
    if n_runs < 3:
        raise ConfigurationError(f"n_runs must be >= 3, got {n_runs}")
    times = []
    with benchmark_mode():
        for _ in range(n_warm):
            model.forward(sample.ms_up, sample.pan, variant)
        for _ in range(n_runs):
            start = time.perf_counter()
            model.forward(sample.ms_up, sample.pan, variant)
            times.append(time.perf_counter() - start)
    stats = TimingStats(times)
    logger.debug(f"Forward {stats.mean * 1e3:.2f} +/- {stats.std * 1e3:.2f} ms over {n_runs} runs")
    return stats


def similarity_report(trace: ForwardTrace, head: int = 0) -> pd.DataFrame:
    """Pairwise cosine similarity of the attention maps of one head, labelled A1..AN"""
    maps = trace.head_maps(head)
    labels = [f"A{i + 1}" for i in range(len(maps))]
    matrix = np.eye(len(maps))
    for i in range(len(maps)):
        for j in range(i + 1, len(maps)):
            matrix[i, j] = matrix[j, i] = attention_cosine_similarity(maps[i], maps[j])
    return pd.DataFrame(matrix, index=labels, columns=labels)


def write_similarity_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index_label="map")
    return path


@dataclass
class ProfileReport:
    """Cost profile of one variant and, when supplied, its quality metrics.

    Attributes:
        variant: Variant name, or "bicubic" for the interpolation baseline.
        params: Exact parameter count.
        flops: Analytic FLOPs at the profiled size.
        time_mean: Mean forward time in seconds; NaN when not measured.
        time_std: Standard deviation of the forward time; NaN when not measured.
        peak_bytes: Analytic peak of live tensor bytes.
        metrics: Quality metric means, e.g. from an evaluation report.
    """

    variant: str
    params: int
    flops: int
    time_mean: float = math.nan
    time_std: float = math.nan
    peak_bytes: int = 0
    metrics: dict[str, float] = field(default_factory=dict)

    def to_row(self, metric_columns: list[str]) -> dict[str, object]:
        row: dict[str, object] = {"variant": self.variant}
        row.update({name: self.metrics.get(name, math.nan) for name in metric_columns})
        row.update(
            {
                "Params": self.params,
                "FLOPs": self.flops,
                "time_mean": self.time_mean,
                "time_std": self.time_std,
                "peak_bytes": self.peak_bytes,
            }
        )
        return row


def profile_variant(
    config: LFormerConfig, height: int, width: int, sample: Sample | None = None, n_warm: int = 1, n_runs: int = 0
) -> ProfileReport:
    """Build the network for `config` and report its costs; timing runs only when `n_runs > 0`"""
    model = build(config)
    params = count_params(model)
    if params != analytic_param_count(config):
        logger.warning(f"{config.variant}: introspected {params} params, closed form {analytic_param_count(config)}")
    report = ProfileReport(config.variant, params, count_flops(config, height, width))
    report.peak_bytes = peak_memory_bytes(config, height, width)
    if n_runs > 0 and sample is not None:
        stats = bench_forward(model, sample, n_warm, n_runs)
        report.time_mean, report.time_std = stats.mean, stats.std
    return report


def synthetic_sample(config: LFormerConfig, height: int, width: int, seed: int = 0) -> Sample:
    """A simulated image pair of the profiled size for timing runs"""
    if height % config.ratio or width % config.ratio:
        raise ConfigurationError(f"size {height}x{width} is not divisible by ratio {config.ratio}")
    weights = np.full(config.bands, 1.0 / config.bands)
    arrays = simulate_sample(sample_seed(seed, "test", 0), height, width, config.bands, config.ratio, weights)
    sample = Sample(
        "bench",
        Tensor(arrays["pan"]),
        Tensor(arrays["ms"]),
        Tensor(arrays["ms_up"]),
        Tensor(arrays["gt"]),
    )
    return sample.astype(config.dtype)


def compare_variants(
    config: LFormerConfig,
    height: int,
    width: int,
    variants: list[str] | None = None,
    metrics: dict[str, dict[str, float]] | None = None,
    include_bicubic: bool = False,
    n_warm: int = 1,
    n_runs: int = 0,
) -> pd.DataFrame:
    """One row per variant at identical network settings and image size.

    Args:
        config: Shared settings; only `variant` changes between rows.
        height: Image height used for FLOPs, memory and timing.
        width: Image width.
        variants: Variants to profile, in row order; defaults to recompute, shared, evolved.
        metrics: Quality metric means per variant; adds SAM, ERGAS, Q2n and PSNR columns.
        include_bicubic: Append the interpolation baseline (no parameters, no FLOPs).
        n_warm: Untimed warm-up passes per variant.
        n_runs: Timed passes per variant; 0 skips timing.

    Returns:
        The comparison table with columns `variant`, the metric columns if any, then
        Params, FLOPs, time_mean, time_std, peak_bytes.

    Raises:
        ConfigurationError: On an unknown variant name.
    """
    variants = list(variants or ["recompute", "shared", "evolved"])
    unknown = [v for v in variants if v not in VARIANTS]
    if unknown:
        raise ConfigurationError(f"unknown variant(s): {', '.join(unknown)} (choose from {', '.join(VARIANTS)})")
    metric_columns = ["SAM", "ERGAS", q2n_label(config.bands), "PSNR"] if metrics else []
    sample = synthetic_sample(config, height, width, config.seed) if n_runs > 0 else None

    reports = []
    for variant in variants:
        report = profile_variant(config.with_variant(variant), height, width, sample, n_warm, n_runs)
        report.metrics = (metrics or {}).get(variant, {})
        reports.append(report)
        logger.info(f"{variant}: {report.params} params, {report.flops} FLOPs")
    if include_bicubic:
        bicubic = ProfileReport(BICUBIC, 0, 0, metrics=(metrics or {}).get(BICUBIC, {}))
        bicubic.peak_bytes = height * width * (config.bands + 1) * np.dtype(config.dtype).itemsize
        reports.append(bicubic)
    rows = [r.to_row(metric_columns) for r in reports]
    return pd.DataFrame(rows, columns=["variant", *metric_columns, *PROFILE_COLUMNS])
