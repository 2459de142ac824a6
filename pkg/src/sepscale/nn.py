"""Inference-only 1-D neural primitives.

Signals are 2-D numpy arrays laid out as (channels, frames), stored as
float32.  Every operation here is a pure function: inputs are never mutated,
no state is kept, and concurrent calls are safe.  Reductions accumulate in
float64 and results are cast back to float32, which keeps the primitives
within tight tolerance of their brute-force definitions even at long frame
counts.

Padding convention: "same" pads symmetrically with zeros so that a stride-1
convolution preserves the frame count ((kernel-1)*dilation total, split
left-biased-down).  "valid" applies no padding; it is what strided framing
convolutions (the encoder) use after explicit tail padding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ShapeError


@dataclass(frozen=True)
class ConvSpec:
    """Static description of a 1-D convolution.

    ``groups == in_channels`` makes the convolution depthwise.  The weight
    layout is (out_channels, in_channels // groups, kernel), flattened
    row-major.
    """

    in_channels: int
    out_channels: int
    kernel: int
    dilation: int = 1
    stride: int = 1
    groups: int = 1
    bias: bool = True

    def __post_init__(self):
        for name in ("in_channels", "out_channels", "kernel", "dilation", "stride", "groups"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.in_channels % self.groups != 0 or self.out_channels % self.groups != 0:
            raise ConfigError(
                f"groups ({self.groups}) must divide in_channels "
                f"({self.in_channels}) and out_channels ({self.out_channels})"
            )

    @property
    def weight_size(self) -> int:
        return self.out_channels * (self.in_channels // self.groups) * self.kernel


def _as_2d(x, what: str) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 2:
        raise ShapeError(f"{what} must be 2-D (channels, frames), got {x.ndim} dims")
    return x


def _check_bias(bias, out_channels: int) -> np.ndarray | None:
    if bias is None:
        return None
    b = np.asarray(bias, dtype=np.float64).reshape(-1)
    if b.size != out_channels:
        raise ShapeError(
            f"bias has {b.size} entries, expected {out_channels} (channels axis)"
        )
    return b


def _same_padding(kernel: int, dilation: int) -> int:
    return (kernel - 1) * dilation


def conv1d(x, spec: ConvSpec, weights, bias=None, padding: str = "same") -> np.ndarray:
    """General 1-D convolution over a (channels, frames) array.

    Numerically equal to the direct definition: each output sample is the
    dot product of the kernel taps with input samples spaced ``dilation``
    frames apart, over the channels of its group.
    """
    x = _as_2d(x, "input")
    if x.shape[0] != spec.in_channels:
        raise ShapeError(
            f"input has {x.shape[0]} channels, spec expects {spec.in_channels} "
            "(channels axis)"
        )
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.size != spec.weight_size:
        raise ShapeError(
            f"weights have {w.size} values, spec expects {spec.weight_size} "
            f"(= out*in/groups*kernel = {spec.out_channels}*"
            f"{spec.in_channels // spec.groups}*{spec.kernel})"
        )
    b = _check_bias(bias, spec.out_channels)
    if padding not in ("same", "valid"):
        raise ConfigError(f"padding must be 'same' or 'valid', got {padding!r}")

    frames = x.shape[1]
    eff_kernel = (spec.kernel - 1) * spec.dilation + 1
    pad = _same_padding(spec.kernel, spec.dilation) if padding == "same" else 0
    out_frames = (frames + pad - eff_kernel) // spec.stride + 1
    if out_frames < 1:
        raise ShapeError(
            f"input of {frames} frames is too short for effective kernel "
            f"{eff_kernel} with padding {padding!r} (frames axis)"
        )

    x64 = x.astype(np.float64, copy=False)
    if pad:
        left = pad // 2
        xp = np.zeros((spec.in_channels, frames + pad), dtype=np.float64)
        xp[:, left : left + frames] = x64
    else:
        xp = x64

    g = spec.groups
    og = spec.out_channels // g
    ig = spec.in_channels // g

    if spec.kernel == 1 and g == 1:
        # 1x1 path reduces to a matrix product over the strided frames.
        y = w.reshape(spec.out_channels, spec.in_channels) @ xp[:, :: spec.stride][:, :out_frames]
    else:
        windows = np.lib.stride_tricks.sliding_window_view(xp, eff_kernel, axis=1)
        windows = windows[:, :: spec.stride, :][:, :out_frames, :: spec.dilation]
        windows = windows.reshape(g, ig, out_frames, spec.kernel)
        wk = w.reshape(g, og, ig, spec.kernel)
        y = np.einsum("goik,gifk->gof", wk, windows, optimize=True)
        y = y.reshape(spec.out_channels, out_frames)

    if b is not None:
        y = y + b[:, None]
    return y.astype(np.float32)


def pointwise_conv(x, out_channels: int, weights, bias=None) -> np.ndarray:
    """1x1 convolution: a per-frame linear map across channels."""
    x = _as_2d(x, "input")
    spec = ConvSpec(
        in_channels=x.shape[0],
        out_channels=out_channels,
        kernel=1,
        bias=bias is not None,
    )
    return conv1d(x, spec, weights, bias)


def depthwise_conv(x, kernel: int, dilation: int, weights, bias=None) -> np.ndarray:
    """Per-channel dilated convolution (groups == channels), "same" padding.

    Output channel i depends only on input channel i.
    """
    x = _as_2d(x, "input")
    channels, frames = x.shape
    if kernel < 1 or dilation < 1:
        raise ConfigError(f"kernel and dilation must be >= 1, got {kernel}, {dilation}")
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.size != channels * kernel:
        raise ShapeError(
            f"weights have {w.size} values, expected channels*kernel = "
            f"{channels}*{kernel} (channels axis)"
        )
    w = w.reshape(channels, kernel)
    b = _check_bias(bias, channels)

    pad = _same_padding(kernel, dilation)
    left = pad // 2
    xp = np.zeros((channels, frames + pad), dtype=np.float64)
    xp[:, left : left + frames] = x

    y = np.zeros((channels, frames), dtype=np.float64)
    for k in range(kernel):
        y += w[:, k : k + 1] * xp[:, k * dilation : k * dilation + frames]
    if b is not None:
        y += b[:, None]
    return y.astype(np.float32)


def transposed_conv1d(x, kernel: int, stride: int, weights) -> np.ndarray:
    """Overlap-add resynthesis: N input channels to one output row.

    Every input frame t contributes its channel-weighted sum of the N basis
    kernels, placed at offset t*stride.  Output length is
    (frames-1)*stride + kernel.
    """
    x = _as_2d(x, "input")
    channels, frames = x.shape
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    if stride > kernel:
        raise ConfigError(
            f"stride ({stride}) greater than kernel ({kernel}) leaves gaps "
            "in the reconstruction"
        )
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.size != channels * kernel:
        raise ShapeError(
            f"weights have {w.size} values, expected channels*kernel = "
            f"{channels}*{kernel} (channels axis)"
        )
    w = w.reshape(channels, kernel)

    samples = (frames - 1) * stride + kernel
    contrib = w.T @ x.astype(np.float64, copy=False)  # (kernel, frames)
    out = np.zeros(samples, dtype=np.float64)
    for k in range(kernel):
        out[k : k + stride * frames : stride] += contrib[k]
    return out[None, :].astype(np.float32)


def prelu(x, slope: float) -> np.ndarray:
    """Parametric ReLU with a single shared slope for negative inputs."""
    x = _as_2d(x, "input")
    return np.where(x >= 0, x, np.float32(slope) * x).astype(np.float32)


def global_layer_norm(x, gamma, beta, eps: float = 1e-8) -> np.ndarray:
    """Normalize jointly over channels and frames, then apply a per-channel
    affine transform.

    Mean and variance are taken over the whole (channels, frames) array, so
    the result does not depend on where in time a pattern occurs.  A constant
    input has zero variance; eps keeps the division defined and the output
    collapses to beta.
    """
    x = _as_2d(x, "input")
    channels = x.shape[0]
    g = np.asarray(gamma, dtype=np.float64).reshape(-1)
    b = np.asarray(beta, dtype=np.float64).reshape(-1)
    if g.size != channels:
        raise ShapeError(f"gamma has {g.size} entries, expected {channels} (channels axis)")
    if b.size != channels:
        raise ShapeError(f"beta has {b.size} entries, expected {channels} (channels axis)")
    if eps <= 0:
        raise ConfigError(f"eps must be > 0, got {eps}")

    x64 = x.astype(np.float64, copy=False)
    mean = x64.mean()
    var = x64.var()
    y = (x64 - mean) / np.sqrt(var + eps) * g[:, None] + b[:, None]
    return y.astype(np.float32)


def relu(x) -> np.ndarray:
    return np.maximum(np.asarray(x, dtype=np.float32), np.float32(0))
