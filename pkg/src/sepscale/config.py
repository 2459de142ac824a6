"""Scaling configuration for the separation model family.

A :class:`ScalingConfig` fully determines one member of the model family.
Three knobs scale the separator (number of dilated blocks, number of repeats
of the block sequence, depthwise channel width), a fourth sets the base of
the exponential dilation schedule.  The remaining hyperparameters are fixed
architecture constants whose defaults reproduce the reference model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

MASK_ACTIVATIONS = ("relu", "sigmoid", "softmax")

_INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class ScalingConfig:
    """Knobs plus fixed hyperparameters of one separation model.

    The defaults are the baseline: 8 dilated blocks, repeated 3 times, 512
    depthwise channels, dilation doubling per block.
    """

    num_blocks: int = 8
    num_repeats: int = 3
    depthwise_channels: int = 512
    dilation_base: int = 2
    encoder_filters: int = 512
    encoder_kernel: int = 16
    encoder_stride: int = 8
    bottleneck_channels: int = 128
    skip_channels: int = 128
    conv_kernel: int = 3
    num_sources: int = 2
    sample_rate: int = 8000
    mask_activation: str = "relu"

    def __post_init__(self):
        if not 1 <= self.num_blocks <= 12:
            raise ConfigError(f"num_blocks must be in 1..12, got {self.num_blocks}")
        if not 1 <= self.num_repeats <= 4:
            raise ConfigError(f"num_repeats must be in 1..4, got {self.num_repeats}")
        if self.dilation_base < 2:
            raise ConfigError(f"dilation_base must be >= 2, got {self.dilation_base}")
        for name in (
            "depthwise_channels",
            "encoder_filters",
            "encoder_kernel",
            "encoder_stride",
            "bottleneck_channels",
            "skip_channels",
            "conv_kernel",
            "num_sources",
            "sample_rate",
        ):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.encoder_stride > self.encoder_kernel:
            raise ConfigError(
                f"encoder_stride ({self.encoder_stride}) must not exceed "
                f"encoder_kernel ({self.encoder_kernel}); larger strides leave "
                "gaps in the resynthesis"
            )
        if self.mask_activation not in MASK_ACTIVATIONS:
            raise ConfigError(
                f"mask_activation must be one of {MASK_ACTIVATIONS}, "
                f"got {self.mask_activation!r}"
            )
        if self.dilation_base ** (self.num_blocks - 1) > _INT64_MAX:
            raise ConfigError(
                f"dilation_base**{self.num_blocks - 1} overflows a 64-bit integer"
            )

    @property
    def total_blocks(self) -> int:
        return self.num_blocks * self.num_repeats


def dilation_schedule(config: ScalingConfig) -> list[int]:
    """Per-block dilation factors, in execution order.

    Within one repeat the dilation grows exponentially: block i (1-based)
    uses base**(i-1).  The whole sequence is repeated ``num_repeats`` times,
    so the result has ``num_blocks * num_repeats`` entries.
    """
    one_repeat = [config.dilation_base**b for b in range(config.num_blocks)]
    if one_repeat[-1] > _INT64_MAX:
        raise ConfigError("dilation schedule overflows a 64-bit integer")
    return one_repeat * config.num_repeats
