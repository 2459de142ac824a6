"""Binary weight container and WAV round trips, byte layout, corruption."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from sepscale.errors import (
    BadMagicError,
    ChecksumError,
    TruncatedFileError,
    UnsupportedVersionError,
    WavFormatError,
    WeightFormatError,
)
from sepscale.io import read_wav, read_weights, write_wav, write_weights
from sepscale.io import _serialize_weights


def serialize(store) -> bytes:
    return _serialize_weights(store)


def stores_equal(a, b) -> bool:
    return list(a) == list(b) and all(
        a[k].shape == b[k].shape and a[k].tobytes() == b[k].tobytes() for k in a
    )


class TestWeightLayout:
    def test_empty_store_is_header_plus_crc(self):
        assert len(serialize({})) == 12 + 4

    def test_single_2x3_tensor_named_t(self):
        blob = serialize({"t": np.zeros((2, 3), dtype=np.float32)})
        assert len(blob) == 12 + (2 + 1 + 1 + 8 + 24) + 4

    def test_write_returns_byte_count(self, tmp_path):
        store = {"t": np.zeros((2, 3), dtype=np.float32)}
        path = tmp_path / "w.ctwb"
        n = write_weights(store, path)
        assert n == path.stat().st_size == 52

    def test_header_fields(self):
        blob = serialize({"a": np.zeros(1, dtype=np.float32)})
        magic, version, count = struct.unpack_from("<4sII", blob, 0)
        assert magic == b"CTWB"
        assert version == 1
        assert count == 1


class TestWeightRoundTrip:
    def test_round_trip_model_sized_store(self, tmp_path):
        rng = np.random.default_rng(0)
        store = {
            "encoder.weight": rng.standard_normal((32, 1, 16)).astype(np.float32),
            "norm.gamma": rng.standard_normal(32).astype(np.float32),
            "scalar": np.array(3.25, dtype=np.float32),
            "empty": np.zeros((0, 4), dtype=np.float32),
        }
        path = tmp_path / "model.ctwb"
        write_weights(store, path)
        assert stores_equal(read_weights(path), store)

    def test_round_trip_preserves_order(self):
        store = {f"t{i}": np.full(i + 1, float(i), dtype=np.float32) for i in range(9)}
        assert list(read_weights(serialize(store))) == list(store)

    @given(st.dictionaries(
        keys=st.text(alphabet=st.characters(min_codepoint=33, max_codepoint=126),
                     min_size=1, max_size=24),
        values=hnp.arrays(
            dtype=np.float32,
            shape=hnp.array_shapes(min_dims=0, max_dims=3, max_side=5),
            elements=st.floats(min_value=-1e6, max_value=1e6, width=32),
        ),
        max_size=6,
    ))
    @settings(max_examples=40, deadline=None)
    def test_round_trip_is_bit_exact(self, store):
        assert stores_equal(read_weights(serialize(store)), store)


class TestWeightErrors:
    def test_bad_magic(self):
        blob = bytearray(serialize({}))
        blob[:4] = b"NOPE"
        with pytest.raises(BadMagicError):
            read_weights(bytes(blob))

    def test_unsupported_version(self):
        blob = bytearray(serialize({}))
        struct.pack_into("<I", blob, 4, 99)
        # keep the CRC out of the way: version is checked before the CRC
        with pytest.raises(UnsupportedVersionError):
            read_weights(bytes(blob))

    def test_truncated_header(self):
        with pytest.raises(TruncatedFileError):
            read_weights(serialize({})[:10])

    def test_truncated_tensor(self):
        blob = serialize({"t": np.zeros(100, dtype=np.float32)})
        with pytest.raises((TruncatedFileError, ChecksumError)):
            read_weights(blob[:40])

    def test_crc_flags_payload_edit(self):
        blob = bytearray(serialize({"t": np.ones(4, dtype=np.float32)}))
        blob[-8] ^= 0x01  # inside the float data
        with pytest.raises(ChecksumError):
            read_weights(bytes(blob))

    def test_every_single_bit_flip_is_rejected(self):
        store = {"a": np.arange(6, dtype=np.float32).reshape(2, 3),
                 "b": np.ones(3, dtype=np.float32)}
        blob = serialize(store)
        rng = np.random.default_rng(1)
        for _ in range(100):
            mutated = bytearray(blob)
            pos = int(rng.integers(0, len(blob)))
            mutated[pos] ^= 1 << int(rng.integers(0, 8))
            with pytest.raises(WeightFormatError):
                read_weights(bytes(mutated))


class TestWav:
    def test_scaling_contract(self, tmp_path):
        path = tmp_path / "s.wav"
        pcm = np.array([0, 16384, -32768], dtype="<i2")
        _write_raw_wav(path, pcm.tobytes(), channels=1, bits=16, rate=8000)
        samples, rate = read_wav(path)
        assert rate == 8000
        assert np.array_equal(samples, np.array([0.0, 0.5, -1.0], dtype=np.float32))

    def test_clamping_and_rounding(self, tmp_path):
        path = tmp_path / "c.wav"
        write_wav(path, [1.5, -1.0, 0.25, -2.0], 8000)
        samples, _ = read_wav(path)
        raw = (np.asarray(samples) * 32768).astype(int)
        assert list(raw) == [32767, -32768, 8192, -32768]

    def test_round_trip_int16_exact(self, tmp_path):
        rng = np.random.default_rng(2)
        pcm = rng.integers(-32768, 32768, size=1000, dtype=np.int16)
        path = tmp_path / "r.wav"
        write_wav(path, pcm.astype(np.float32) / 32768.0, 16000)
        samples, rate = read_wav(path)
        assert rate == 16000
        assert np.array_equal((samples * 32768).astype(np.int16), pcm)

    def test_header_is_canonical_44_bytes(self, tmp_path):
        path = tmp_path / "h.wav"
        write_wav(path, np.zeros(10), 8000)
        assert path.stat().st_size == 44 + 20

    def test_stereo_rejected(self, tmp_path):
        path = tmp_path / "st.wav"
        _write_raw_wav(path, b"\x00" * 8, channels=2, bits=16, rate=8000)
        with pytest.raises(WavFormatError, match="channel"):
            read_wav(path)

    def test_wrong_bit_depth_rejected(self, tmp_path):
        path = tmp_path / "b8.wav"
        _write_raw_wav(path, b"\x00" * 8, channels=1, bits=8, rate=8000)
        with pytest.raises(WavFormatError, match="bit depth"):
            read_wav(path)

    def test_non_pcm_rejected(self, tmp_path):
        path = tmp_path / "f.wav"
        _write_raw_wav(path, b"\x00" * 8, channels=1, bits=16, rate=8000,
                       audio_format=3)
        with pytest.raises(WavFormatError, match="format code"):
            read_wav(path)

    def test_not_riff_rejected(self, tmp_path):
        path = tmp_path / "x.wav"
        path.write_bytes(b"garbage!")
        with pytest.raises(WavFormatError):
            read_wav(path)

    def test_non_finite_samples_rejected(self, tmp_path):
        with pytest.raises(WavFormatError, match="finite"):
            write_wav(tmp_path / "n.wav", [0.0, float("nan")], 8000)

    def test_skips_unknown_chunks(self, tmp_path):
        path = tmp_path / "extra.wav"
        fmt = struct.pack("<HHIIHH", 1, 1, 8000, 16000, 2, 16)
        data = np.array([100, -100], dtype="<i2").tobytes()
        junk = b"JUNK" + struct.pack("<I", 3) + b"abc\x00"  # padded to even
        body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + junk \
            + b"data" + struct.pack("<I", len(data)) + data
        path.write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)
        samples, rate = read_wav(path)
        assert rate == 8000 and samples.size == 2


def _write_raw_wav(path, payload, channels, bits, rate, audio_format=1):
    block = channels * bits // 8
    fmt = struct.pack("<HHIIHH", audio_format, channels, rate, rate * block,
                      block, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt \
        + b"data" + struct.pack("<I", len(payload)) + payload
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(body)) + body)
