"""Quantization, per-level entropy coding, and bitstream framing.

The bitstream carries only the valid feature rows; the validity mask itself
is never transmitted. The decoder recomputes it from the shared positions
and cross-checks the per-level counts echoed in the header. A trailing
64-bit checksum over the whole stream turns any corruption into a hard
error before a single feature is surfaced.
"""

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (ConfigError, CorruptionError, DynamicRangeError,
                     FormatError, PositionMismatchError)
from .grid import BoundingBox, GridConfig
from .pruning import (PackedFeatures, all_valid_mask, compute_validity, pack,
                      unpack)
from .rangecoder import SYMBOL_LIMIT, entropy_decode, entropy_encode

MAGIC = b"HGFP"
VERSION = 1

MODE_RAW = 0
MODE_QUANTIZED = 1
_MODE_BYTE = {"raw": MODE_RAW, "quantized": MODE_QUANTIZED}
_MODE_NAME = {v: k for k, v in _MODE_BYTE.items()}


@dataclass
class QuantParams:
    """Uniform quantization step, or raw float32 passthrough."""

    step: float = 0.0
    mode: str = "quantized"

    def __post_init__(self):
        if self.mode not in _MODE_BYTE:
            raise ConfigError(f"unknown quantization mode {self.mode!r}")
        if self.mode == "quantized" and not self.step > 0:
            raise ConfigError("quantization step must be positive")


def quantize_array(values, step):
    """Round values/step half away from zero to integer symbols."""
    if not step > 0:
        raise ConfigError("quantization step must be positive")
    x = np.asarray(values, np.float64) / step
    syms = np.trunc(x + np.copysign(0.5, x)).astype(np.int64)
    if syms.size and int(np.abs(syms).max()) > SYMBOL_LIMIT:
        raise DynamicRangeError(
            f"quantized magnitude exceeds {SYMBOL_LIMIT}; "
            f"step {step} is too small for this data"
        )
    return syms


def dequantize_array(symbols, step):
    return np.asarray(symbols, np.float64) * step


def quantize(features, step):
    """Quantize PackedFeatures into per-level integer symbol arrays."""
    return [quantize_array(rows, step) for rows in features.levels]


def _checksum(body):
    return hashlib.blake2b(body, digest_size=8).digest()


@dataclass
class PrunedBitstream:
    """Header plus per-level payloads of valid entries only."""

    config: GridConfig
    bbox: BoundingBox
    params: QuantParams
    valid_counts: tuple
    payloads: list = field(default_factory=list)
    version: int = VERSION

    def __post_init__(self):
        self.valid_counts = tuple(int(c) for c in self.valid_counts)
        if len(self.valid_counts) != self.config.levels:
            raise ConfigError("valid_counts length does not match levels")
        if len(self.payloads) != self.config.levels:
            raise ConfigError("payload count does not match levels")

    def to_bytes(self):
        cfg = self.config
        parts = [
            struct.pack(
                "<4sHBBIHBd", MAGIC, self.version, cfg.dims, cfg.levels,
                cfg.table_size, cfg.feature_dim,
                _MODE_BYTE[self.params.mode], float(self.params.step),
            ),
            struct.pack(f"<{cfg.dims}d", *self.bbox.min),
            struct.pack(f"<{cfg.dims}d", *self.bbox.max),
            struct.pack(f"<{cfg.levels}I", *cfg.resolutions),
            struct.pack(f"<{cfg.dims}I", *cfg.primes),
            struct.pack(f"<{cfg.levels}I", *self.valid_counts),
            struct.pack(f"<{cfg.levels}Q", *(len(p) for p in self.payloads)),
        ]
        parts.extend(self.payloads)
        body = b"".join(parts)
        return body + _checksum(body)

    @classmethod
    def from_bytes(cls, data):
        if len(data) < 30:
            raise CorruptionError("stream shorter than the minimal header")
        body, tail = data[:-8], data[-8:]
        if _checksum(body) != tail:
            raise CorruptionError("stream checksum mismatch")
        magic, version, dims, levels, table_size, feature_dim, mode, step = (
            struct.unpack_from("<4sHBBIHBd", body)
        )
        if magic != MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise FormatError(f"unsupported stream version {version}")
        if mode not in _MODE_NAME:
            raise FormatError(f"unknown quantization mode byte {mode}")
        off = struct.calcsize("<4sHBBIHBd")
        bbox_min = struct.unpack_from(f"<{dims}d", body, off)
        off += 8 * dims
        bbox_max = struct.unpack_from(f"<{dims}d", body, off)
        off += 8 * dims
        resolutions = struct.unpack_from(f"<{levels}I", body, off)
        off += 4 * levels
        primes = struct.unpack_from(f"<{dims}I", body, off)
        off += 4 * dims
        valid_counts = struct.unpack_from(f"<{levels}I", body, off)
        off += 4 * levels
        lengths = struct.unpack_from(f"<{levels}Q", body, off)
        off += 8 * levels
        payloads = []
        for n in lengths:
            payloads.append(body[off:off + n])
            off += n
        if off != len(body):
            raise FormatError(
                f"stream length mismatch: {len(body)} bytes, expected {off}"
            )
        config = GridConfig(dims, levels, resolutions, table_size,
                            feature_dim, primes)
        params = QuantParams(step=step, mode=_MODE_NAME[mode])
        return cls(config, BoundingBox(np.array(bbox_min), np.array(bbox_max)),
                   params, valid_counts, payloads)


def _encode_level(rows, params):
    if params.mode == "raw":
        return np.asarray(rows, np.float64).astype("<f4").tobytes()
    syms = quantize_array(rows, params.step)
    return entropy_encode(syms.ravel())


def encode_grid(grid, points, bbox, params, prune=True):
    """Encode the grid's valid rows for the given positions.

    With prune=False every row is treated as valid; the resulting stream is
    a size baseline and will not decode against a sparser point set.
    """
    cfg = grid.config
    if points.dims != cfg.dims:
        raise ConfigError(
            f"point set has {points.dims} dims, grid has {cfg.dims}"
        )
    if prune:
        mask = compute_validity(points, cfg, bbox)
    else:
        mask = all_valid_mask(cfg)
    packed = pack(grid, mask)
    payloads = [_encode_level(rows, params) for rows in packed.levels]
    return PrunedBitstream(cfg, bbox, params, mask.valid_counts, payloads)


def decode_grid(stream, points):
    """Recompute the mask from positions, decode payloads, rebuild the grid.

    Invalid rows are filled with zeros; by construction they never affect
    interpolation over the same positions.
    """
    cfg = stream.config
    if points.dims != cfg.dims:
        raise ConfigError(
            f"point set has {points.dims} dims, stream has {cfg.dims}"
        )
    mask = compute_validity(points, cfg, stream.bbox)
    if mask.valid_counts != stream.valid_counts:
        bad = next(
            l for l in range(cfg.levels)
            if mask.valid_counts[l] != stream.valid_counts[l]
        )
        raise PositionMismatchError(
            f"level {bad}: recomputed {mask.valid_counts[bad]} valid entries, "
            f"stream was encoded with {stream.valid_counts[bad]} "
            "(decoder positions differ from encoder positions)"
        )
    levels = []
    for l in range(cfg.levels):
        n = stream.valid_counts[l]
        payload = stream.payloads[l]
        if stream.params.mode == "raw":
            want = n * cfg.feature_dim * 4
            if len(payload) != want:
                raise CorruptionError(
                    f"level {l}: raw payload is {len(payload)} bytes, "
                    f"expected {want}"
                )
            rows = np.frombuffer(payload, "<f4").astype(np.float64)
            levels.append(rows.reshape(n, cfg.feature_dim))
        else:
            syms = entropy_decode(payload, n * cfg.feature_dim)
            rows = dequantize_array(syms, stream.params.step)
            levels.append(rows.reshape(n, cfg.feature_dim))
    return unpack(PackedFeatures(levels), mask, cfg)
