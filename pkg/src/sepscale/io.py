"""Bit-exact external formats: the CTWB weight container and PCM16 WAV.

CTWB layout (all integers little-endian)::

    magic   4 bytes  "CTWB"
    version u32      currently 1
    count   u32      number of tensors
    then per tensor:
        name_len u16, name bytes (UTF-8),
        rank     u8,  dims u32 * rank,
        data     f32 * prod(dims)
    crc32   u32      IEEE CRC32 of every preceding byte

Readers verify magic, version and CRC before trusting the structure, so any
single-bit corruption is rejected.  Tensor order is preserved, which makes a
write/read round trip bit-exact.

WAV support is deliberately narrow: mono 16-bit PCM.  Reading scales raw
int16 by 1/32768 exactly; writing clamps to [-1, 1] and quantizes with
round-half-away-from-zero, emitting the canonical 44-byte header.
"""

from __future__ import annotations

import os
import struct
import zlib

import numpy as np

from .errors import (
    BadMagicError,
    ChecksumError,
    TruncatedFileError,
    UnsupportedVersionError,
    WavFormatError,
    WeightFormatError,
)

WEIGHT_MAGIC = b"CTWB"
WEIGHT_VERSION = 1


def _serialize_weights(store) -> bytes:
    parts = [struct.pack("<4sII", WEIGHT_MAGIC, WEIGHT_VERSION, len(store))]
    for name, array in store.items():
        raw = name.encode("utf-8")
        if not 0 < len(raw) <= 0xFFFF:
            raise WeightFormatError(f"tensor name {name!r} has unstorable length")
        arr = np.asarray(array, dtype="<f4")
        if arr.ndim > 0xFF:
            raise WeightFormatError(f"tensor '{name}' has rank {arr.ndim} > 255")
        if any(d > 0xFFFFFFFF for d in arr.shape):
            raise WeightFormatError(f"tensor '{name}' has a dimension beyond u32")
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.tobytes())
    payload = b"".join(parts)
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    return payload + struct.pack("<I", crc)


def write_weights(store, destination) -> int:
    """Serialize a weight store; returns the number of bytes written.

    ``destination`` may be a path or a binary file object.
    """
    blob = _serialize_weights(store)
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "wb") as fh:
            fh.write(blob)
    else:
        destination.write(blob)
    return len(blob)


def read_weights(source) -> dict[str, np.ndarray]:
    """Parse a CTWB byte stream back into an ordered weight store.

    ``source`` may be a path, a binary file object, or bytes.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            buf = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        buf = bytes(source)
    else:
        buf = source.read()

    if len(buf) < 16:
        raise TruncatedFileError(f"file is {len(buf)} bytes, header needs 16")
    magic, version, count = struct.unpack_from("<4sII", buf, 0)
    if magic != WEIGHT_MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {WEIGHT_MAGIC!r}")
    if version != WEIGHT_VERSION:
        raise UnsupportedVersionError(
            f"format version {version} unsupported (reader handles {WEIGHT_VERSION})"
        )
    stored_crc = struct.unpack_from("<I", buf, len(buf) - 4)[0]
    actual_crc = zlib.crc32(buf[:-4]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise ChecksumError(
            f"crc32 mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}"
        )

    end = len(buf) - 4
    pos = 12
    store: dict[str, np.ndarray] = {}
    for _ in range(count):
        if pos + 2 > end:
            raise TruncatedFileError("file ends inside a tensor name header")
        (name_len,) = struct.unpack_from("<H", buf, pos)
        pos += 2
        if pos + name_len + 1 > end:
            raise TruncatedFileError("file ends inside a tensor record")
        try:
            name = buf[pos : pos + name_len].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise WeightFormatError(f"tensor name is not valid UTF-8: {exc}") from exc
        pos += name_len
        rank = buf[pos]
        pos += 1
        if pos + 4 * rank > end:
            raise TruncatedFileError(f"file ends inside the dims of '{name}'")
        dims = struct.unpack_from(f"<{rank}I", buf, pos)
        pos += 4 * rank
        n_values = 1
        for d in dims:
            n_values *= d
        if pos + 4 * n_values > end:
            raise TruncatedFileError(f"file ends inside the data of '{name}'")
        data = np.frombuffer(buf, dtype="<f4", count=n_values, offset=pos)
        pos += 4 * n_values
        if name in store:
            raise WeightFormatError(f"duplicate tensor name '{name}'")
        store[name] = data.reshape(dims).copy()
    if pos != end:
        raise WeightFormatError(f"{end - pos} trailing bytes after the last tensor")
    return store


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a mono 16-bit PCM WAV file.

    Returns (samples, sample_rate) with samples = raw int16 / 32768.0,
    a float32 array in [-1, 1].  Unknown chunks are skipped; anything that
    is not mono/PCM/16-bit raises WavFormatError naming the property.
    """
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < 12 or buf[:4] != b"RIFF" or buf[8:12] != b"WAVE":
        raise WavFormatError("not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(buf):
        chunk_id = buf[pos : pos + 4]
        (size,) = struct.unpack_from("<I", buf, pos + 4)
        body = buf[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise WavFormatError(f"chunk {chunk_id!r} is truncated")
        if chunk_id == b"fmt ":
            fmt = body
        elif chunk_id == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned

    if fmt is None or len(fmt) < 16:
        raise WavFormatError("missing or short 'fmt ' chunk")
    if data is None:
        raise WavFormatError("missing 'data' chunk")
    audio_format, channels, sample_rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if audio_format != 1:
        raise WavFormatError(f"unsupported format code {audio_format}, only PCM (1)")
    if channels != 1:
        raise WavFormatError(f"unsupported channel count {channels}, only mono (1)")
    if bits != 16:
        raise WavFormatError(f"unsupported bit depth {bits}, only 16-bit")
    if len(data) % 2:
        raise WavFormatError("data chunk holds a partial 16-bit sample")
    samples = np.frombuffer(data, dtype="<i2").astype(np.float32) / np.float32(32768.0)
    return samples, sample_rate


def write_wav(path, samples, sample_rate: int) -> None:
    """Write samples as mono 16-bit PCM with a canonical 44-byte header.

    Samples are clamped to [-1, 1] and quantized round-half-away-from-zero.
    """
    s = np.asarray(samples, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(s)):
        raise WavFormatError("samples contain non-finite values")
    if sample_rate < 1:
        raise WavFormatError(f"sample_rate must be >= 1, got {sample_rate}")
    scaled = np.clip(s, -1.0, 1.0) * 32768.0
    quantized = np.copysign(np.floor(np.abs(scaled) + 0.5), scaled)
    pcm = np.clip(quantized, -32768, 32767).astype("<i2")
    payload = pcm.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        1,  # PCM
        1,  # mono
        sample_rate,
        sample_rate * 2,
        2,
        16,
        b"data",
        len(payload),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
