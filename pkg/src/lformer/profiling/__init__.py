"""Parameter, FLOP, memory and timing profiles of the network variants."""

from .profiler import (
    FlopBreakdown,
    ProfileReport,
    TimingStats,
    analytic_param_count,
    bench_forward,
    compare_variants,
    count_flops,
    count_params,
    flop_breakdown,
    measure_flops,
    peak_memory_bytes,
    similarity_report,
)

__all__ = [
    "FlopBreakdown",
    "ProfileReport",
    "TimingStats",
    "analytic_param_count",
    "bench_forward",
    "compare_variants",
    "count_flops",
    "count_params",
    "flop_breakdown",
    "measure_flops",
    "peak_memory_bytes",
    "similarity_report",
]
