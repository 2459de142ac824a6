"""Scalable time-domain speech separation with analytical cost modeling.

The separator is a stack of dilated depthwise-separable convolution blocks
between a learned encoder and an overlap-add decoder.  Three knobs (block
count, repeat count, depthwise channels) plus the dilation base scale the
model; the cost model prices any configuration in parameters, MACs,
receptive field and memory; the device-fit planner checks configurations
against embedded RAM/MIPS budgets.
"""

from .config import ScalingConfig, dilation_schedule
from .costmodel import (
    CostReport,
    ReceptiveField,
    cost_report,
    count_macs,
    count_minor_ops,
    count_params,
    frames_per_duration,
    params_kilo,
    peak_memory,
)
from .devicefit import (
    FitVerdict,
    PlatformSpec,
    ReferencePoint,
    REFERENCE_POINTS,
    builtin_platforms,
    check_fit,
    find_platform,
    load_platforms_file,
    reference_for,
    search_configs,
)
from .io import read_wav, read_weights, write_wav, write_weights
from .metrics import EvalResult, pit_si_sdr, si_sdr
from .model import (
    SeparationModel,
    WeightStore,
    build_model,
    config_from_store,
    count_store_params,
    estimate_masks,
    init_random,
    separate,
    tensor_shapes,
)

__version__ = "0.1.0"

__all__ = [
    "CostReport",
    "EvalResult",
    "FitVerdict",
    "PlatformSpec",
    "REFERENCE_POINTS",
    "ReceptiveField",
    "ReferencePoint",
    "ScalingConfig",
    "SeparationModel",
    "WeightStore",
    "build_model",
    "builtin_platforms",
    "check_fit",
    "config_from_store",
    "cost_report",
    "count_macs",
    "count_minor_ops",
    "count_params",
    "count_store_params",
    "dilation_schedule",
    "estimate_masks",
    "find_platform",
    "frames_per_duration",
    "init_random",
    "load_platforms_file",
    "params_kilo",
    "peak_memory",
    "pit_si_sdr",
    "read_wav",
    "read_weights",
    "reference_for",
    "search_configs",
    "separate",
    "si_sdr",
    "tensor_shapes",
    "write_wav",
    "write_weights",
]
