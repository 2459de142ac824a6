"""Closed-form cost accounting for any scaling configuration.

Everything here is pure integer/float algebra over a :class:`ScalingConfig`;
no tensors are materialized.  The parameter count is exact (it equals the
scalar count of a materialized weight store), MAC counts follow the
1 MAC = 1 multiply-accumulate convention with "same" padding (so dilation
never changes the count), and the receptive field is the closed form for a
stack of dilated kernel-P blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import ScalingConfig
from .errors import ConfigError

_INT64_MAX = 2**63 - 1

QUANT_BITS = (8, 16, 32)


@dataclass(frozen=True)
class ReceptiveField:
    frames: int
    samples: int
    milliseconds: float


@dataclass(frozen=True)
class CostReport:
    """Analytical costs of one configuration.

    ``gflops_per_second`` counts 1 MAC as ``flops_per_mac`` FLOPs (default 1,
    the convention under which the shipped reference calibration holds; pass
    2 for the multiply+add convention).  Normalization and activation work is
    excluded from MACs and reported as ``minor_ops_per_second``.
    """

    params: int
    params_k: int
    macs_per_second: int
    gflops_per_second: float
    receptive_field_frames: int
    receptive_field_samples: int
    receptive_field_ms: float
    model_bytes: int
    peak_activation_bytes: int
    minor_ops_per_second: int


def params_kilo(params: int) -> int:
    """Round a parameter count to kilo-parameters, half up."""
    return (params + 500) // 1000


def count_params(config: ScalingConfig) -> int:
    """Exact scalar parameter count of the assembled model.

    Sums, per component: encoder (no bias), the post-encoder normalization,
    the bottleneck 1x1, each dilated block (expansion 1x1, two norms, two
    single-slope PReLUs, depthwise conv, residual 1x1, skip 1x1, all with
    bias), the mask head (PReLU + biased 1x1), and the decoder (no bias).
    """
    n = config.encoder_filters
    ell = config.encoder_kernel
    btl = config.bottleneck_channels
    skip = config.skip_channels
    c = config.depthwise_channels
    p = config.conv_kernel
    ns = config.num_sources

    per_block = (
        (c * btl + c)  # expansion 1x1
        + 1  # prelu after expansion
        + 2 * c  # norm after expansion
        + (c * p + c)  # depthwise conv
        + 1  # prelu after depthwise
        + 2 * c  # norm after depthwise
        + (btl * c + btl)  # residual 1x1
        + (skip * c + skip)  # skip 1x1
    )
    fixed = (
        n * ell  # encoder
        + 2 * n  # input norm
        + (btl * n + btl)  # bottleneck 1x1
        + 1  # mask-head prelu
        + (ns * n * skip + ns * n)  # mask 1x1
        + n * ell  # decoder
    )
    return config.total_blocks * per_block + fixed


def frames_per_duration(config: ScalingConfig, seconds: float) -> int:
    if seconds <= 0:
        raise ConfigError(f"seconds must be > 0, got {seconds}")
    return math.ceil(seconds * config.sample_rate / config.encoder_stride)


def _macs_per_frame(config: ScalingConfig) -> int:
    n = config.encoder_filters
    ell = config.encoder_kernel
    btl = config.bottleneck_channels
    skip = config.skip_channels
    c = config.depthwise_channels
    p = config.conv_kernel
    ns = config.num_sources

    per_block = c * btl + c * p + btl * c + skip * c
    return (
        n * ell  # encoder
        + btl * n  # bottleneck
        + config.total_blocks * per_block
        + ns * n * skip  # mask head
        + ns * n * ell  # decoder, once per source
    )


def count_macs(config: ScalingConfig, seconds: float = 1.0) -> int:
    """Multiply-accumulates needed to separate ``seconds`` of audio.

    Per-frame conv costs are summed and multiplied by the frame count
    ceil(seconds * sample_rate / stride).  Under "same" padding the dilation
    factor does not change the count.  Normalization and activations are
    excluded (see :func:`count_minor_ops`).
    """
    return _macs_per_frame(config) * frames_per_duration(config, seconds)


def count_minor_ops(config: ScalingConfig, seconds: float = 1.0) -> int:
    """Rough estimate of non-MAC work (norms, activations, adds).

    Counted per frame: ~8 ops per normalized element (two statistics passes
    plus scale/shift), 2 per PReLU element, 1 per residual/skip-accumulate
    add, ~5 per mask-activation element, 1 per mask multiply, 1 per encoder
    ReLU element.  Only used for reporting; excluded from the MAC model.
    """
    n = config.encoder_filters
    btl = config.bottleneck_channels
    skip = config.skip_channels
    c = config.depthwise_channels
    ns = config.num_sources
    nb = config.total_blocks

    per_frame = (
        8 * (n + 2 * c * nb)  # input norm + two norms per block
        + 2 * (2 * c * nb + skip)  # prelus, incl. the mask-head prelu
        + (btl + skip) * nb  # residual adds and skip accumulation
        + 5 * ns * n  # mask activation
        + ns * n  # mask multiply
        + n  # encoder relu
    )
    return per_frame * frames_per_duration(config, seconds)


def receptive_field(config: ScalingConfig) -> ReceptiveField:
    """Temporal context of one output frame, in frames, samples and ms.

    frames = 1 + R * (P - 1) * sum_{i=1..B} base**(i-1); the encoder framing
    then maps frames to samples via (frames - 1) * stride + kernel.
    """
    geo = sum(config.dilation_base**i for i in range(config.num_blocks))
    frames = 1 + config.num_repeats * (config.conv_kernel - 1) * geo
    if frames > _INT64_MAX:
        raise ConfigError("receptive field overflows a 64-bit integer")
    samples = (frames - 1) * config.encoder_stride + config.encoder_kernel
    if samples > _INT64_MAX:
        raise ConfigError("receptive field overflows a 64-bit integer")
    ms = 1000.0 * samples / config.sample_rate
    return ReceptiveField(frames=frames, samples=samples, milliseconds=ms)


def peak_memory(
    config: ScalingConfig,
    quant_bits: int = 32,
    chunk_seconds: float = 1.0,
) -> tuple[int, int]:
    """(model_bytes, activation_bytes) for one processing chunk.

    Weights are stored at ``quant_bits`` per scalar.  Activations assume
    32-bit buffers: two ping-pong buffers at the widest channel count the
    forward pass materializes, plus the skip accumulator and the residual
    carry, each spanning the chunk's frame count.
    """
    if quant_bits not in QUANT_BITS:
        raise ConfigError(f"quant_bits must be one of {QUANT_BITS}, got {quant_bits}")
    model_bytes = count_params(config) * quant_bits // 8
    widest = max(
        config.encoder_filters,
        config.bottleneck_channels,
        config.depthwise_channels,
        config.skip_channels,
        config.num_sources * config.encoder_filters,
    )
    frames = frames_per_duration(config, chunk_seconds)
    activation_bytes = (
        2 * widest + config.skip_channels + config.bottleneck_channels
    ) * frames * 4
    return model_bytes, activation_bytes


def cost_report(
    config: ScalingConfig,
    seconds: float = 1.0,
    quant_bits: int = 32,
    chunk_seconds: float = 1.0,
    flops_per_mac: int = 1,
) -> CostReport:
    """Assemble the full analytical cost report for one configuration."""
    if flops_per_mac not in (1, 2):
        raise ConfigError(f"flops_per_mac must be 1 or 2, got {flops_per_mac}")
    params = count_params(config)
    macs = count_macs(config, seconds)
    rf = receptive_field(config)
    model_bytes, activation_bytes = peak_memory(config, quant_bits, chunk_seconds)
    return CostReport(
        params=params,
        params_k=params_kilo(params),
        macs_per_second=macs,
        gflops_per_second=macs * flops_per_mac / 1e9,
        receptive_field_frames=rf.frames,
        receptive_field_samples=rf.samples,
        receptive_field_ms=rf.milliseconds,
        model_bytes=model_bytes,
        peak_activation_bytes=activation_bytes,
        minor_ops_per_second=count_minor_ops(config, seconds),
    )
