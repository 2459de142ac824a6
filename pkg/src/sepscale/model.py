"""Model assembly, deterministic initialization, and the separation forward
pass.

Weight tensors are named by a dotted scheme, stable across runs::

    meta.config                      packed copy of the ScalingConfig (not a weight)
    encoder.weight                   (N, 1, L)
    input_norm.gamma / .beta         (N,)
    bottleneck.weight / .bias        (btl, N, 1) / (btl,)
    sep.r{r}.b{b}.expand.weight      (C, btl, 1)      r in 0..R-1, b in 0..B-1
    sep.r{r}.b{b}.expand.bias        (C,)
    sep.r{r}.b{b}.prelu1.slope       (1,)
    sep.r{r}.b{b}.norm1.gamma/.beta  (C,)
    sep.r{r}.b{b}.depthwise.weight   (C, 1, P)
    sep.r{r}.b{b}.depthwise.bias     (C,)
    sep.r{r}.b{b}.prelu2.slope       (1,)
    sep.r{r}.b{b}.norm2.gamma/.beta  (C,)
    sep.r{r}.b{b}.residual.weight    (btl, C, 1)
    sep.r{r}.b{b}.residual.bias      (btl,)
    sep.r{r}.b{b}.skip.weight        (skip, C, 1)
    sep.r{r}.b{b}.skip.bias          (skip,)
    mask.prelu.slope                 (1,)
    mask.weight / .bias              (ns*N, skip, 1) / (ns*N,)
    decoder.weight                   (N, L)

``meta.*`` entries are bookkeeping, not weights: they are excluded from all
parameter counts.  A weight store is a plain dict mapping tensor name to a
float32 numpy array; insertion order is meaningful and preserved by the file
format.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .config import MASK_ACTIVATIONS, ScalingConfig, dilation_schedule
from .errors import ConfigError, InputTooShortError, WeightLoadError

WeightStore = dict[str, np.ndarray]

META_CONFIG = "meta.config"
_META_FORMAT = 1

# splitmix64 constants (public-domain generator by Steele, Lea and Flood).
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK64 = (1 << 64) - 1


def _mix64(value: int) -> int:
    z = value & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def _splitmix_uniform(seed: int, name: str, count: int) -> np.ndarray:
    """``count`` doubles in [0, 1) from a splitmix64 stream.

    The stream for a tensor is keyed by mix64(seed XOR fnv1a64(name)), so the
    values drawn for one tensor do not depend on the others.  Output i mixes
    the state key + (i+1)*golden-gamma; the top 53 bits become the mantissa.
    """
    key = _mix64((seed & _MASK64) ^ _fnv1a64(name.encode("utf-8")))
    with np.errstate(over="ignore"):
        idx = np.arange(1, count + 1, dtype=np.uint64)
        state = np.uint64(key) + idx * np.uint64(_GOLDEN)
        z = (state ^ (state >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def tensor_shapes(config: ScalingConfig) -> dict[str, tuple[int, ...]]:
    """Ordered name -> shape map of every weight tensor the config demands.

    Pure function of the config; independent of input length and of the
    dilation base (dilation changes indexing, not weight shapes).
    """
    n = config.encoder_filters
    ell = config.encoder_kernel
    btl = config.bottleneck_channels
    skip = config.skip_channels
    c = config.depthwise_channels
    p = config.conv_kernel
    ns = config.num_sources

    shapes: dict[str, tuple[int, ...]] = {
        "encoder.weight": (n, 1, ell),
        "input_norm.gamma": (n,),
        "input_norm.beta": (n,),
        "bottleneck.weight": (btl, n, 1),
        "bottleneck.bias": (btl,),
    }
    for r in range(config.num_repeats):
        for b in range(config.num_blocks):
            prefix = f"sep.r{r}.b{b}."
            shapes[prefix + "expand.weight"] = (c, btl, 1)
            shapes[prefix + "expand.bias"] = (c,)
            shapes[prefix + "prelu1.slope"] = (1,)
            shapes[prefix + "norm1.gamma"] = (c,)
            shapes[prefix + "norm1.beta"] = (c,)
            shapes[prefix + "depthwise.weight"] = (c, 1, p)
            shapes[prefix + "depthwise.bias"] = (c,)
            shapes[prefix + "prelu2.slope"] = (1,)
            shapes[prefix + "norm2.gamma"] = (c,)
            shapes[prefix + "norm2.beta"] = (c,)
            shapes[prefix + "residual.weight"] = (btl, c, 1)
            shapes[prefix + "residual.bias"] = (btl,)
            shapes[prefix + "skip.weight"] = (skip, c, 1)
            shapes[prefix + "skip.bias"] = (skip,)
    shapes["mask.prelu.slope"] = (1,)
    shapes["mask.weight"] = (ns * n, skip, 1)
    shapes["mask.bias"] = (ns * n,)
    shapes["decoder.weight"] = (n, ell)
    return shapes


def config_to_meta(config: ScalingConfig) -> np.ndarray:
    """Pack the config into the 14-value ``meta.config`` tensor."""
    return np.array(
        [
            _META_FORMAT,
            config.num_blocks,
            config.num_repeats,
            config.depthwise_channels,
            config.dilation_base,
            config.encoder_filters,
            config.encoder_kernel,
            config.encoder_stride,
            config.bottleneck_channels,
            config.skip_channels,
            config.conv_kernel,
            config.num_sources,
            config.sample_rate,
            MASK_ACTIVATIONS.index(config.mask_activation),
        ],
        dtype=np.float32,
    )


def config_from_store(store: WeightStore) -> ScalingConfig:
    """Rebuild the ScalingConfig recorded in a store's ``meta.config``."""
    if META_CONFIG not in store:
        raise WeightLoadError(
            f"store carries no '{META_CONFIG}' tensor; pass the configuration explicitly"
        )
    meta = np.asarray(store[META_CONFIG], dtype=np.float64).reshape(-1)
    if meta.size != 14 or int(meta[0]) != _META_FORMAT:
        raise WeightLoadError(f"unrecognized '{META_CONFIG}' layout")
    vals = [int(v) for v in meta[1:]]
    act = vals[12]
    if not 0 <= act < len(MASK_ACTIVATIONS):
        raise WeightLoadError(f"unknown mask activation code {act} in '{META_CONFIG}'")
    return ScalingConfig(
        num_blocks=vals[0],
        num_repeats=vals[1],
        depthwise_channels=vals[2],
        dilation_base=vals[3],
        encoder_filters=vals[4],
        encoder_kernel=vals[5],
        encoder_stride=vals[6],
        bottleneck_channels=vals[7],
        skip_channels=vals[8],
        conv_kernel=vals[9],
        num_sources=vals[10],
        sample_rate=vals[11],
        mask_activation=MASK_ACTIVATIONS[act],
    )


def count_store_params(store: WeightStore) -> int:
    """Total scalar count of the weight tensors in a store (meta excluded)."""
    return sum(v.size for k, v in store.items() if not k.startswith("meta."))


def init_random(config: ScalingConfig, seed: int) -> WeightStore:
    """Deterministically seeded weight store for the given config.

    Convolution weights are drawn uniformly from [-s, s) with
    s = 1/sqrt(fan_in) via the splitmix64 stream documented at
    :func:`_splitmix_uniform`; biases start at zero, norm gains at one, norm
    shifts at zero, and PReLU slopes at 0.25.  The same seed always yields a
    byte-identical store.
    """
    fan_in = {
        "encoder.weight": config.encoder_kernel,
        "bottleneck.weight": config.encoder_filters,
        "expand.weight": config.bottleneck_channels,
        "depthwise.weight": config.conv_kernel,
        "residual.weight": config.depthwise_channels,
        "skip.weight": config.depthwise_channels,
        "mask.weight": config.skip_channels,
        "decoder.weight": config.encoder_filters,
    }

    store: WeightStore = {META_CONFIG: config_to_meta(config)}
    for name, shape in tensor_shapes(config).items():
        count = int(np.prod(shape))
        leaf = ".".join(name.split(".")[-2:])
        if leaf in fan_in:
            scale = 1.0 / np.sqrt(fan_in[leaf])
            u = _splitmix_uniform(seed, name, count)
            data = ((2.0 * u - 1.0) * scale).astype(np.float32)
        elif name.endswith(".gamma"):
            data = np.ones(count, dtype=np.float32)
        elif name.endswith(".slope"):
            data = np.full(count, 0.25, dtype=np.float32)
        else:  # biases and norm shifts
            data = np.zeros(count, dtype=np.float32)
        store[name] = data.reshape(shape)
    return store


@dataclass(frozen=True)
class SeparationModel:
    """Immutable assembled network: config plus validated weight tensors.

    Safe to share across threads; :func:`separate` allocates per-call scratch
    only.
    """

    config: ScalingConfig
    weights: WeightStore = field(repr=False)

    def tensor(self, name: str) -> np.ndarray:
        return self.weights[name]

    def scalar(self, name: str) -> float:
        return float(self.weights[name].reshape(-1)[0])


def build_model(config: ScalingConfig, store: WeightStore) -> SeparationModel:
    """Validate a weight store against the config and freeze it into a model.

    Raises WeightLoadError naming the first missing, mis-shaped, or
    unexpected tensor.  A ``meta.config`` entry, when present, must agree
    with ``config``.
    """
    expected = tensor_shapes(config)
    weights: WeightStore = {}
    for name, shape in expected.items():
        if name not in store:
            raise WeightLoadError(f"missing tensor '{name}'")
        arr = np.asarray(store[name], dtype=np.float32)
        if arr.shape != shape:
            raise WeightLoadError(
                f"tensor '{name}' has shape {arr.shape}, expected {shape}"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        weights[name] = arr
    for name in store:
        if name not in expected and not name.startswith("meta."):
            raise WeightLoadError(f"unexpected tensor '{name}'")
    if META_CONFIG in store and config_from_store(store) != config:
        raise WeightLoadError(
            f"'{META_CONFIG}' in the store disagrees with the requested configuration"
        )
    return SeparationModel(config=config, weights=weights)


def _activate_masks(x: np.ndarray, kind: str) -> np.ndarray:
    """Apply the mask nonlinearity to (sources, N, frames) logits."""
    if kind == "relu":
        return np.maximum(x, np.float32(0))
    if kind == "sigmoid":
        x64 = x.astype(np.float64)
        z = np.exp(-np.abs(x64))
        out = np.where(x64 >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
        return out.astype(np.float32)
    if kind == "softmax":
        x64 = x.astype(np.float64)
        x64 -= x64.max(axis=0, keepdims=True)
        e = np.exp(x64)
        return (e / e.sum(axis=0, keepdims=True)).astype(np.float32)
    raise ConfigError(f"unknown mask activation {kind!r}")


def _forward(model: SeparationModel, audio) -> tuple[list[np.ndarray], np.ndarray]:
    cfg = model.config
    a = np.asarray(audio, dtype=np.float32)
    if a.ndim != 1:
        raise ConfigError(f"audio must be a 1-D array, got {a.ndim} dims")
    t = a.size
    if t < cfg.encoder_kernel:
        raise InputTooShortError(
            f"input of {t} samples is shorter than one encoder frame "
            f"({cfg.encoder_kernel} samples)"
        )
    if not np.all(np.isfinite(a)):
        raise ConfigError("audio contains non-finite samples")

    stride = cfg.encoder_stride
    frames = -(-t // stride)
    padded = (frames - 1) * stride + cfg.encoder_kernel
    x = np.zeros((1, padded), dtype=np.float32)
    x[0, :t] = a

    enc_spec = nn.ConvSpec(1, cfg.encoder_filters, cfg.encoder_kernel,
                           stride=stride, bias=False)
    encoded = nn.relu(nn.conv1d(x, enc_spec, model.tensor("encoder.weight"),
                                padding="valid"))

    h = nn.global_layer_norm(encoded, model.tensor("input_norm.gamma"),
                             model.tensor("input_norm.beta"))
    h = nn.pointwise_conv(h, cfg.bottleneck_channels,
                          model.tensor("bottleneck.weight"),
                          model.tensor("bottleneck.bias"))

    skip_total = np.zeros((cfg.skip_channels, encoded.shape[1]), dtype=np.float64)
    dilations = dilation_schedule(cfg)
    index = 0
    for r in range(cfg.num_repeats):
        for b in range(cfg.num_blocks):
            p = f"sep.r{r}.b{b}."
            y = nn.pointwise_conv(h, cfg.depthwise_channels,
                                  model.tensor(p + "expand.weight"),
                                  model.tensor(p + "expand.bias"))
            y = nn.prelu(y, model.scalar(p + "prelu1.slope"))
            y = nn.global_layer_norm(y, model.tensor(p + "norm1.gamma"),
                                     model.tensor(p + "norm1.beta"))
            y = nn.depthwise_conv(y, cfg.conv_kernel, dilations[index],
                                  model.tensor(p + "depthwise.weight"),
                                  model.tensor(p + "depthwise.bias"))
            y = nn.prelu(y, model.scalar(p + "prelu2.slope"))
            y = nn.global_layer_norm(y, model.tensor(p + "norm2.gamma"),
                                     model.tensor(p + "norm2.beta"))
            residual = nn.pointwise_conv(y, cfg.bottleneck_channels,
                                         model.tensor(p + "residual.weight"),
                                         model.tensor(p + "residual.bias"))
            skip_total += nn.pointwise_conv(y, cfg.skip_channels,
                                            model.tensor(p + "skip.weight"),
                                            model.tensor(p + "skip.bias"))
            h = h + residual
            index += 1

    s = nn.prelu(skip_total.astype(np.float32), model.scalar("mask.prelu.slope"))
    logits = nn.pointwise_conv(s, cfg.num_sources * cfg.encoder_filters,
                               model.tensor("mask.weight"),
                               model.tensor("mask.bias"))
    masks = _activate_masks(
        logits.reshape(cfg.num_sources, cfg.encoder_filters, -1),
        cfg.mask_activation,
    )

    sources = []
    for si in range(cfg.num_sources):
        masked = (masks[si] * encoded).astype(np.float32)
        wave = nn.transposed_conv1d(masked, cfg.encoder_kernel, stride,
                                    model.tensor("decoder.weight"))
        sources.append(wave[0, :t].astype(np.float32))
    return sources, masks


def separate(model: SeparationModel, audio) -> list[np.ndarray]:
    """Separate a 1-D waveform into ``num_sources`` waveforms.

    Outputs are float32 arrays of exactly the input length; the tail is
    zero-padded internally to a full frame grid and trimmed back.
    """
    return _forward(model, audio)[0]


def estimate_masks(model: SeparationModel, audio) -> np.ndarray:
    """Per-source masks of shape (num_sources, N, frames) for an input."""
    return _forward(model, audio)[1]
