"""Losses, quality indexes, metric reports and dashboards."""

from .losses import l1_loss, ssim, ssim_loss, total_loss
from .metrics import d_lambda, d_s, ergas, hqnr, psnr, q2n, q_index, sam
from .report import MetricReport, assess_full, assess_reduced

__all__ = [
    "MetricReport",
    "assess_full",
    "assess_reduced",
    "d_lambda",
    "d_s",
    "ergas",
    "hqnr",
    "l1_loss",
    "psnr",
    "q2n",
    "q_index",
    "sam",
    "ssim",
    "ssim_loss",
    "total_loss",
]
